#include "hosidf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "hosidf/error.hpp"

namespace hosidf {

namespace {

// A signal is a row over the stacked state.
using Row = Eigen::RowVectorXd;

struct Block {
    StateSpace ss;
    int offset = 0;
};

struct Affine {
    Row row;
    double e = 0; // coefficient of the loop error, which is solved for last
};

struct Loop {
    int n = 0;
    Eigen::MatrixXd m;
    Row e, z, zs, v, u, y;
    int reset_state = 0;
};

Loop assemble(const SimConfig& cfg) {
    const LoopConfig& sys = cfg.system;
    const double w = hz_to_rad(cfg.freq_hz);
    Eigen::MatrixXd osc_a(2, 2);
    osc_a << 0.0, w, -w, 0.0;
    // Order: oscillator, c1, cs, cr, c2, c3, plant, c4.
    std::vector<Block> b;
    b.push_back({StateSpace(osc_a, Eigen::VectorXd::Zero(2), Row::Zero(2), 0.0)});
    for (const Lti* l : {&sys.c1, &sys.cs}) b.push_back({realize(*l)});
    b.push_back({sys.cr.base});
    for (const Lti* l : {&sys.c2, &sys.c3, &sys.plant, &sys.c4}) b.push_back({realize(*l)});
    int n = 0;
    for (auto& blk : b) {
        blk.offset = n;
        n += blk.ss.states();
    }
    auto out = [&](int k) {
        Row r = Row::Zero(n);
        r.segment(b[k].offset, b[k].ss.states()) = b[k].ss.c;
        return r;
    };
    auto d = [&](int k) { return b[k].ss.d; };
    enum { OSC, C1, CS, CR, C2, C3, P, C4 };

    Row input = Row::Zero(n);
    input(0) = cfg.amplitude;
    const Row zero = Row::Zero(n);
    const Row r_in = cfg.input == InputKind::reference ? input : zero;
    const Row d_in = cfg.input == InputKind::disturbance ? input : zero;

    Loop lp;
    lp.n = n;
    lp.reset_state = b[CR].offset;
    if (cfg.input == InputKind::open_loop) {
        lp.e = input;
    } else {
        const Affine z{out(C1), d(C1)};
        const double dv = d(CR) + d(C2);
        const Affine v{out(CR) + out(C2) + dv * z.row, dv * z.e};
        const Affine u{out(C3) + d(C3) * v.row, d(C3) * v.e};
        const Affine y{out(P) + d(P) * (u.row + d_in), d(P) * u.e};
        const Affine fb{out(C4) + d(C4) * y.row, d(C4) * y.e};
        if (std::abs(1.0 + fb.e) < 1e-12) throw SingularityError("algebraic loop is singular (1 + D_loop = 0)");
        lp.e = (r_in - fb.row) / (1.0 + fb.e);
    }
    lp.z = out(C1) + d(C1) * lp.e;
    lp.zs = out(CS) + d(CS) * lp.z;
    lp.v = out(CR) + out(C2) + (d(CR) + d(C2)) * lp.z;
    lp.u = out(C3) + d(C3) * lp.v;
    lp.y = out(P) + d(P) * (lp.u + d_in);

    const Row* inputs[] = {&zero, &lp.e, &lp.z, &lp.z, &lp.z, &lp.v, nullptr, &lp.y};
    const Row plant_in = lp.u + d_in;
    lp.m = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < static_cast<int>(b.size()); ++k) {
        const int o = b[k].offset, s = b[k].ss.states();
        lp.m.block(o, o, s, s) += b[k].ss.a;
        const Row& in = k == P ? plant_in : *inputs[k];
        lp.m.middleRows(o, s) += b[k].ss.b * in;
    }
    return lp;
}

// Parlett-Reinsch diagonal balancing, radix 2. Returns d with m <- D^-1 m D.
// Canonical-form realizations of wide-band controllers span many decades, and
// the scaling-and-squaring exponential loses accuracy on such matrices.
Eigen::VectorXd balance(Eigen::MatrixXd& m) {
    const auto n = m.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    bool done = false;
    for (int sweep = 0; !done && sweep < 100; ++sweep) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(m(j, i));
                r += std::abs(m(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0, g = r / 2.0;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c > g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                d(i) *= f;
                m.row(i) /= f;
                m.col(i) *= f;
            }
        }
    }
    return d;
}

bool sign_change(double a, double b) { return (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0); }

// Last period against the one before, relative to the peak over the final periods ending at end.
double period_metric(const SimTrace& trace, int periods, size_t end) {
    const size_t spp = static_cast<size_t>(trace.samples_per_period);
    const size_t begin = end - static_cast<size_t>(periods) * spp;
    double metric = 0.0;
    for (const auto* s : {&trace.e, &trace.u, &trace.y}) {
        double peak = 0.0, diff = 0.0;
        for (size_t i = begin; i < end; ++i) peak = std::max(peak, std::abs((*s)[i]));
        if (peak == 0.0) continue;
        for (size_t i = end - spp; i < end; ++i) diff = std::max(diff, std::abs((*s)[i] - (*s)[i - spp]));
        metric = std::max(metric, diff / peak);
    }
    return metric;
}

} // namespace

Eigen::VectorXd propagate_flow(const SimConfig& cfg, const Eigen::VectorXd& x, double dt) {
    Eigen::MatrixXd m = assemble(cfg).m;
    if (x.size() != m.rows()) throw std::invalid_argument("state size does not match the interconnection");
    const Eigen::VectorXd d = balance(m);
    return ((m * dt).exp() * x.cwiseQuotient(d)).cwiseProduct(d);
}

SimTrace simulate(const SimConfig& cfg) {
    if (!(cfg.freq_hz > 0.0) || !std::isfinite(cfg.freq_hz)) throw std::invalid_argument("input frequency must be positive");
    if (cfg.steps_per_period < 8) throw std::invalid_argument("steps per period must be >= 8");
    if (cfg.settle_cycles < 1 || cfg.analysis_cycles < 2 || cfg.total_cycles < cfg.settle_cycles + cfg.analysis_cycles)
        throw std::invalid_argument("need total cycles >= settle cycles + analysis cycles, settle >= 1, analysis >= 2");
    if (cfg.max_cycles < 0) throw std::invalid_argument("max cycles must be >= 0");
    if (cfg.refractory_fraction < 0.0) throw std::invalid_argument("refractory time must be >= 0");

    Loop lp = assemble(cfg);
    // Work in balanced coordinates x = D x'.
    const Eigen::VectorXd scale = balance(lp.m);
    for (Row* r : {&lp.e, &lp.z, &lp.zs, &lp.v, &lp.u, &lp.y}) *r = r->cwiseProduct(scale.transpose());
    const double w = hz_to_rad(cfg.freq_hz);
    const double period = 1.0 / cfg.freq_hz;
    const int spp = cfg.steps_per_period;
    const double h = period / spp;
    const double refractory = cfg.refractory_fraction * period;
    const Eigen::MatrixXd phi = (lp.m * h).exp();
    const double gamma = cfg.system.cr.gamma;

    SimTrace tr;
    tr.omega = w;
    tr.dt = h;
    tr.samples_per_period = spp;
    tr.settle_threshold = cfg.settle_threshold;
    tr.effective_resets = gamma != 1.0;
    tr.reset_state = lp.reset_state;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(lp.n);
    x(0) = std::sin(cfg.phase) / scale(0);
    x(1) = std::cos(cfg.phase) / scale(1);

    long long last_idx = static_cast<long long>(cfg.total_cycles) * spp - 1;
    const long long cap_idx = static_cast<long long>(std::max(cfg.max_cycles, cfg.total_cycles)) * spp - 1;
    const long long first_rec = cfg.record_all ? 0 : static_cast<long long>(cfg.total_cycles - cfg.analysis_cycles) * spp;
    const size_t n_rec = static_cast<size_t>(last_idx - first_rec + 1);
    for (auto* s : {&tr.t, &tr.e, &tr.z, &tr.zs, &tr.v, &tr.u, &tr.y}) s->reserve(n_rec);
    tr.reset_flag.reserve(n_rec);

    double last_reset = -1e300;
    bool flag_next = false;
    for (long long idx = 0;; ++idx) {
        if (idx >= first_rec) {
            tr.t.push_back(idx * h);
            tr.e.push_back(lp.e.dot(x));
            tr.z.push_back(lp.z.dot(x));
            tr.zs.push_back(lp.zs.dot(x));
            tr.v.push_back(lp.v.dot(x));
            tr.u.push_back(lp.u.dot(x));
            tr.y.push_back(lp.y.dot(x));
            tr.reset_flag.push_back(flag_next ? 1 : 0);
        }
        flag_next = false;
        if (idx == last_idx) {
            if (cfg.record_all || idx == cap_idx ||
                period_metric(tr, cfg.analysis_cycles, tr.t.size()) <= cfg.settle_threshold)
                break;
            last_idx += spp;
            for (auto* s : {&tr.t, &tr.e, &tr.z, &tr.zs, &tr.v, &tr.u, &tr.y}) s->erase(s->begin(), s->begin() + spp);
            tr.reset_flag.erase(tr.reset_flag.begin(), tr.reset_flag.begin() + spp);
        }

        const double t0 = idx * h;
        Eigen::VectorXd xn = phi * x;
        const double a = lp.zs.dot(x), bval = lp.zs.dot(xn);
        if (sign_change(a, bval) && t0 + h - last_reset > refractory) {
            double lo = 0.0, hi = h;
            // 12 halvings put the crossing within h/4096.
            for (int it = 0; it < 12; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Eigen::VectorXd xm = (lp.m * mid).exp() * x;
                if ((lp.zs.dot(xm) >= 0.0) == (a >= 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            const double tc = t0 + hi;
            if (tc - last_reset > refractory) {
                Eigen::VectorXd xc = (lp.m * hi).exp() * x;
                ResetJump j;
                j.t = tc;
                j.x_minus = xc.cwiseProduct(scale);
                xc(lp.reset_state) *= gamma;
                j.x_plus = xc.cwiseProduct(scale);
                tr.resets.push_back(tc);
                tr.jumps.push_back(std::move(j));
                last_reset = tc;
                xn = (lp.m * (h - hi)).exp() * xc;
                flag_next = true;
            }
        }
        x = std::move(xn);
        if (!(x.lpNorm<Eigen::Infinity>() <= cfg.overflow_bound)) {
            std::ostringstream os;
            os << "simulation diverged at t=" << (idx + 1) * h << " s (f=" << cfg.freq_hz
               << " Hz); the loop is likely unstable";
            throw DivergenceError(os.str(), {w});
        }
    }

    tr.window_periods = cfg.analysis_cycles;
    tr.window_end = tr.t.size();
    tr.window_begin = tr.window_end - static_cast<size_t>(cfg.analysis_cycles) * spp;
    return tr;
}

SteadyWindow steady_state_window(const SimTrace& trace, int periods) {
    const size_t spp = static_cast<size_t>(trace.samples_per_period);
    if (periods < 2 || trace.t.size() < static_cast<size_t>(periods) * spp)
        throw std::invalid_argument("trace too short for the requested steady-state window");
    SteadyWindow w;
    w.end = trace.t.size();
    w.begin = w.end - static_cast<size_t>(periods) * spp;
    w.metric = period_metric(trace, periods, w.end);
    if (w.metric > trace.settle_threshold) {
        std::ostringstream os;
        os << "steady state not reached at " << rad_to_hz(trace.omega) << " Hz (period-to-period change "
           << w.metric << "); raise max_cycles or the settle cycles";
        throw NotSettledError(os.str(), {trace.omega});
    }
    return w;
}

double resets_per_cycle(const SimTrace& trace) {
    const SteadyWindow w = steady_state_window(trace, trace.window_periods);
    const double t0 = trace.t[w.begin], t1 = t0 + trace.window_periods * 2.0 * std::numbers::pi / trace.omega;
    const auto count = std::count_if(trace.resets.begin(), trace.resets.end(),
                                     [&](double t) { return t >= t0 && t < t1; });
    return static_cast<double>(count) / trace.window_periods;
}

std::vector<double> window_slice(const SimTrace& trace, const std::vector<double>& signal) {
    return {signal.begin() + static_cast<long>(trace.window_begin), signal.begin() + static_cast<long>(trace.window_end)};
}

double prediction_error(const std::vector<double>& simulated, const std::vector<double>& predicted) {
    if (simulated.size() != predicted.size() || simulated.empty())
        throw std::invalid_argument("prediction and simulation windows differ in size");
    double peak = 0.0, diff = 0.0;
    for (size_t i = 0; i < simulated.size(); ++i) {
        peak = std::max(peak, std::abs(simulated[i]));
        diff = std::max(diff, std::abs(simulated[i] - predicted[i]));
    }
    return peak > 0.0 ? diff / peak : diff;
}

std::vector<double> scan_frequencies(double f_start, double f_end, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("scan step must be positive");
    if (!(f_start > 0.0) || !(f_end >= f_start)) throw std::invalid_argument("scan band must satisfy 0 < start <= end");
    std::vector<double> f;
    const long long count = static_cast<long long>(std::floor((f_end - f_start) / step + 1e-9)) + 1;
    for (long long i = 0; i < count; ++i) f.push_back(f_start + i * step);
    return f;
}

ScanReport multiple_reset_scan(const SimConfig& base, double f_start, double f_end, double step, int workers,
                               const ScanProgress& progress) {
    const auto freqs = scan_frequencies(f_start, f_end, step);
    ScanReport rep;
    rep.points.resize(freqs.size());
    std::mutex mu;
    parallel_for(static_cast<int>(freqs.size()), workers, [&](int i) {
        ScanPoint pt;
        pt.freq_hz = freqs[i];
        try {
            SimConfig c = base;
            c.freq_hz = freqs[i];
            c.record_all = false;
            pt.resets_per_cycle = resets_per_cycle(simulate(c));
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        rep.points[i] = pt;
        if (progress) {
            std::lock_guard lock(mu);
            progress(pt);
        }
    });
    bool open = false;
    for (const auto& p : rep.points) {
        const bool multi = p.error.empty() && p.resets_per_cycle > 2.0;
        if (multi && !open) {
            rep.intervals.emplace_back(p.freq_hz, p.freq_hz);
            open = true;
        } else if (multi) {
            rep.intervals.back().second = p.freq_hz;
        } else {
            open = false;
        }
    }
    return rep;
}

} // namespace hosidf
