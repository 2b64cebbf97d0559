#include <fstream>
#include <iostream>

#include "runners.hpp"
#include "service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

using namespace hosidf;
using namespace hosidf::io;

namespace {

enum Exit { ok = 0, usage = 1, schema = 2, numerical = 3 };

struct Source {
    std::string config;
    std::string preset;
    int harmonics = 0;
    double start = 0, stop = 0;
    int points = 0;
    double hurwitz_eps = -1;
    int workers = 0;

    void add(CLI::App* cmd) {
        cmd->add_option("-c,--config", config, "JSON config file");
        cmd->add_option("-p,--preset", preset, "Named preset instead of a config file")
            ->check(CLI::IsMember(preset_names()));
        cmd->add_option("--harmonics", harmonics, "Number of odd harmonics N_h")->check(CLI::PositiveNumber);
        cmd->add_option("--start", start, "Start frequency [Hz]")->check(CLI::PositiveNumber);
        cmd->add_option("--stop", stop, "Stop frequency [Hz]")->check(CLI::PositiveNumber);
        cmd->add_option("--points", points, "Log-spaced frequency points")->check(CLI::PositiveNumber);
        cmd->add_option("--hurwitz-eps", hurwitz_eps, "Margin for the Hurwitz warnings")->check(CLI::NonNegativeNumber);
        cmd->add_option("--workers", workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    }

    AnalysisConfig load() const {
        if (config.empty() == preset.empty()) throw CLI::ValidationError("give exactly one of --config or --preset");
        AnalysisConfig cfg = config.empty() ? preset_config(preset) : load_config(config);
        if (harmonics > 0) cfg.n_harmonics = harmonics;
        if (start > 0) cfg.f_start_hz = start;
        if (stop > 0) cfg.f_stop_hz = stop;
        if (points > 0) cfg.points = points;
        if (workers > 0) cfg.workers = workers;
        if (cfg.f_stop_hz < cfg.f_start_hz) throw CLI::ValidationError("--stop must be >= --start");
        if (hurwitz_eps >= 0) {
            cfg.hurwitz_eps = hurwitz_eps;
            cfg.warnings = hurwitz_warnings(cfg.system, hurwitz_eps);
        }
        return cfg;
    }
};

void warn(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void emit(const Table& t, const std::string& path) {
    if (path.empty() || path == "-") {
        write_csv(std::cout, t);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out, t);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Higher-order describing functions of reset control systems"};
    app.require_subcommand(1);

    Source src_ol, src_cl, src_scan, src_sim, src_unused;
    std::string out_ol, out_cl, out_sim, fn_ol = "ln", sel = "sn", input_scan = "reference", input_sim;
    double f0 = 1, f1 = 1000, df = 1, amp = 1, freq = 0, phase_deg = 0;
    bool full = false;
    std::string host = "127.0.0.1";
    int port = 8080, serve_workers = 1;

    auto* ol = app.add_subcommand("open-loop", "HOSIDFs of the reset element (cr) or the open loop (ln)");
    src_ol.add(ol);
    ol->add_option("-o,--output", out_ol, "CSV output (default stdout)");
    ol->add_option("-f,--function", fn_ol, "cr or ln")->check(CLI::IsMember({"cr", "ln"}));

    auto* cl = app.add_subcommand("closed-loop", "Closed-loop sensitivity family per harmonic");
    src_cl.add(cl);
    cl->add_option("-o,--output", out_cl, "CSV output (default stdout)");
    cl->add_option("-s,--selector", sel, "sn, tn, csn or psn")->required()->check(CLI::IsMember({"sn", "tn", "csn", "psn"}));

    auto* sc = app.add_subcommand("scan", "Multiple-reset frequency scan");
    src_scan.add(sc);
    sc->add_option("--from", f0, "Scan start [Hz]");
    sc->add_option("--to", f1, "Scan end [Hz]");
    sc->add_option("--step", df, "Scan step [Hz]");
    sc->add_option("--input", input_scan, "reference or open")->check(CLI::IsMember({"reference", "open"}));

    auto* sm = app.add_subcommand("simulate", "Hybrid time-domain simulation with prediction check");
    src_sim.add(sm);
    sm->add_option("--input", input_sim, "reference, disturbance or open")
        ->required()
        ->check(CLI::IsMember({"reference", "disturbance", "open"}));
    sm->add_option("--freq", freq, "Input frequency [Hz]")->required()->check(CLI::PositiveNumber);
    sm->add_option("--amplitude", amp, "Input amplitude");
    sm->add_option("--phase-deg", phase_deg, "Input phase (open loop only)");
    sm->add_option("-o,--output", out_sim, "Trace CSV output");
    sm->add_flag("--full", full, "Record all cycles instead of the steady-state window");

    auto* sv = app.add_subcommand("serve", "Run the HTTP analysis service");
    sv->add_option("--host", host);
    sv->add_option("--port", port)->check(CLI::Range(1, 65535));
    sv->add_option("--workers", serve_workers)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*ol) {
            const auto cfg = src_ol.load();
            const auto r = run_open_loop(cfg, fn_ol == "cr" ? OpenLoopFunction::cr : OpenLoopFunction::ln);
            warn(r.warnings);
            std::cerr << "reset element: " << r.stability.diagnostic << '\n';
            emit(r.table, out_ol);
        } else if (*cl) {
            const auto cfg = src_cl.load();
            const auto r = run_closed_loop(cfg, parse_sensitivity(sel));
            warn(r.warnings);
            for (const auto& [f, why] : r.excluded) std::cerr << "excluded " << f << " Hz: " << why << '\n';
            emit(r.table, out_cl);
        } else if (*sc) {
            if (!(df > 0)) throw CLI::ValidationError("--step must be positive");
            if (!(f0 > 0) || f1 < f0) throw CLI::ValidationError("need 0 < --from <= --to");
            const auto cfg = src_scan.load();
            warn(cfg.warnings);
            const auto r = run_scan(cfg, f0, f1, df, parse_input_kind(input_scan));
            for (const auto& p : r.report.points)
                if (!p.error.empty()) std::cerr << "failed at " << p.freq_hz << " Hz: " << p.error << '\n';
            std::cout << r.message << '\n';
            size_t failed = 0;
            for (const auto& p : r.report.points) failed += !p.error.empty();
            if (failed) return numerical;
        } else if (*sm) {
            const auto cfg = src_sim.load();
            warn(cfg.warnings);
            const InputSpec spec{parse_input_kind(input_sim), amp, freq, phase_deg * std::numbers::pi / 180.0};
            const auto r = run_simulate(cfg, spec, full);
            if (!out_sim.empty()) emit(trace_table(r.trace), out_sim);
            std::cout << "resets per cycle: " << r.resets_per_cycle << '\n';
            std::cout << "settle metric: " << r.settle_metric << '\n';
            for (const auto& c : r.checks)
                std::cout << c.name << ": simulated peak " << c.simulated_peak << ", predicted peak "
                          << c.predicted_peak << ", prediction error " << c.error << '\n';
        } else if (*sv) {
            hosidf::api::ServiceOptions opt;
            opt.workers = serve_workers;
            const hosidf::api::Service service(opt);
            httplib::Server srv;
            service.mount(srv);
            std::cerr << "listening on " << host << ':' << port << '\n';
            if (!srv.listen(host, port)) {
                std::cerr << "error: cannot bind " << host << ':' << port << '\n';
                return usage;
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return schema;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical;
    }
    return ok;
}
