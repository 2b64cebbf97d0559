#include "runners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hosidf::io {

using nlohmann::json;

OpenLoopRun run_open_loop(const AnalysisConfig& cfg, OpenLoopFunction fn) {
    OpenLoopRun r;
    r.warnings = cfg.warnings;
    r.stability = open_loop_stability_check(cfg.system.cr, cfg.delta_grid, cfg.eps_stab);
    if (!r.stability.stable) r.warnings.push_back("reset open-loop stability check: " + r.stability.diagnostic);
    r.table = open_loop_table(open_loop_grid(cfg.system, cfg.omegas(), cfg.n_harmonics, fn, cfg.workers));
    return r;
}

ClosedLoopRun run_closed_loop(const AnalysisConfig& cfg, Sensitivity fn) {
    ClosedLoopRun r;
    r.warnings = cfg.warnings;
    const auto g = closed_loop_grid(cfg.system, cfg.omegas(), cfg.n_harmonics, fn, cfg.workers);
    for (const auto& [w, why] : g.excluded) r.excluded.emplace_back(rad_to_hz(w), why);
    if (g.omega.empty() && !g.excluded.empty()) {
        std::vector<double> ws;
        for (const auto& e : g.excluded) ws.push_back(e.first);
        throw NumericalError("every grid frequency is singular; first: " + g.excluded.front().second, ws);
    }
    r.table = closed_loop_table(g);
    return r;
}

std::string scan_message(const ScanReport& rep) {
    if (rep.intervals.empty()) return "There is No Multiple-Reset Region";
    std::ostringstream os;
    os << "Multiple-Reset Regions:";
    for (size_t i = 0; i < rep.intervals.size(); ++i)
        os << (i ? ";" : "") << ' ' << rep.intervals[i].first << " to " << rep.intervals[i].second << " [Hz]";
    return os.str();
}

ScanRun run_scan(const AnalysisConfig& cfg, double f_start, double f_end, double step, InputKind kind,
                 const ScanProgress& progress) {
    const SimConfig base = sim_config(cfg, kind, 1.0, f_start, 0.0);
    ScanRun r;
    r.report = multiple_reset_scan(base, f_start, f_end, step, cfg.workers, progress);
    r.message = scan_message(r.report);
    return r;
}

namespace {

SignalCheck check(const std::string& name, const std::vector<double>& sim, const std::vector<double>& pred) {
    SignalCheck c{name};
    for (double v : sim) c.simulated_peak = std::max(c.simulated_peak, std::abs(v));
    for (double v : pred) c.predicted_peak = std::max(c.predicted_peak, std::abs(v));
    c.error = prediction_error(sim, pred);
    return c;
}

} // namespace

SimulateRun run_simulate(const AnalysisConfig& cfg, const InputSpec& in, bool record_all) {
    if (!(in.freq_hz > 0.0)) throw std::invalid_argument("input frequency must be positive");
    SimConfig sc = sim_config(cfg, in.kind, in.amplitude, in.freq_hz, in.phase_rad);
    sc.record_all = record_all;
    SimulateRun r;
    r.trace = simulate(sc);
    r.settle_metric = steady_state_window(r.trace, r.trace.window_periods).metric;
    r.resets_per_cycle = resets_per_cycle(r.trace);

    const auto& tr = r.trace;
    const auto t = window_slice(tr, tr.t);
    const double w = hz_to_rad(in.freq_hz);
    switch (in.kind) {
    case InputKind::open_loop:
        r.checks.push_back(check("y", window_slice(tr, tr.y),
                                 reconstruct_open_loop_output(cfg.system, in.amplitude, in.phase_rad, w,
                                                              cfg.n_harmonics, t)));
        break;
    case InputKind::reference: {
        if (in.phase_rad != 0.0) throw std::invalid_argument("closed-loop predictions assume zero input phase");
        const auto p = reconstruct_closed_loop_signals(cfg.system, in.amplitude, w, cfg.n_harmonics, t);
        r.checks.push_back(check("e", window_slice(tr, tr.e), p.e));
        r.checks.push_back(check("y", window_slice(tr, tr.y), p.y));
        r.checks.push_back(check("u", window_slice(tr, tr.u), p.u));
        break;
    }
    case InputKind::disturbance:
        if (in.phase_rad != 0.0) throw std::invalid_argument("closed-loop predictions assume zero input phase");
        r.checks.push_back(check("e", window_slice(tr, tr.e),
                                 reconstruct_disturbance_error(cfg.system, in.amplitude, w, cfg.n_harmonics, t)));
        break;
    }
    return r;
}

json to_json(const StabilityReport& s) {
    return {{"stable", s.stable},
            {"marginal", s.marginal},
            {"worst_radius", std::isfinite(s.worst_radius) ? json(round12(s.worst_radius)) : json(nullptr)},
            {"worst_delta_s", round12(s.worst_delta)},
            {"diagnostic", s.diagnostic}};
}

json to_json(const ScanRun& s) {
    json intervals = json::array(), points = json::array();
    for (const auto& [a, b] : s.report.intervals) intervals.push_back({round12(a), round12(b)});
    for (const auto& p : s.report.points) {
        json jp{{"freq_hz", round12(p.freq_hz)}, {"resets_per_cycle", round12(p.resets_per_cycle)}};
        if (!p.error.empty()) jp["error"] = p.error;
        points.push_back(std::move(jp));
    }
    return {{"intervals_hz", intervals}, {"message", s.message}, {"points", points}};
}

json summary_json(const SimulateRun& s) {
    json checks = json::array();
    for (const auto& c : s.checks)
        checks.push_back({{"signal", c.name},
                          {"simulated_peak", round12(c.simulated_peak)},
                          {"predicted_peak", round12(c.predicted_peak)},
                          {"prediction_error", round12(c.error)}});
    return {{"resets_per_cycle", round12(s.resets_per_cycle)},
            {"settle_metric", round12(s.settle_metric)},
            {"effective_resets", s.trace.effective_resets},
            {"checks", checks}};
}

} // namespace hosidf::io
