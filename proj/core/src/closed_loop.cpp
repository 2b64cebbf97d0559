#include "hosidf/closed_loop.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hosidf/error.hpp"

namespace hosidf {

namespace {

constexpr double kSingular = 1e-12;

[[noreturn]] void singular(const std::string& what, int n, double omega) {
    std::ostringstream os;
    os << what << " (n=" << n << ", omega=" << omega << " rad/s, " << rad_to_hz(omega) << " Hz)";
    throw SingularityError(os.str(), {omega});
}

double first_delta_c(const ResetController& rc, double omega, double shift) {
    const cplx dl = delta_l(rc, omega)(0);
    return std::abs(dl) * std::sin(wrapped_angle(dl) + shift);
}

} // namespace

Sensitivity parse_sensitivity(const std::string& name) {
    if (name == "sn") return Sensitivity::s;
    if (name == "tn") return Sensitivity::t;
    if (name == "csn") return Sensitivity::cs;
    if (name == "psn") return Sensitivity::ps;
    throw std::invalid_argument("unknown function '" + name + "' (valid: sn, tn, csn, psn)");
}

std::string sensitivity_name(Sensitivity s) {
    switch (s) {
    case Sensitivity::s: return "sn";
    case Sensitivity::t: return "tn";
    case Sensitivity::cs: return "csn";
    case Sensitivity::ps: return "psn";
    }
    return "";
}

double gamma_series(const std::vector<double>& psi, const std::vector<double>& delta_c, double* last_term) {
    if (psi.empty() || psi.size() != delta_c.size()) throw std::invalid_argument("gamma_series: size mismatch");
    const double dc1 = delta_c[0];
    double sum = 0.0, last = 0.0;
    for (size_t k = 1; k < psi.size(); ++k) {
        if (psi[k] == 0.0) continue;
        if (std::abs(dc1) < kSingular * std::abs(psi[k] * delta_c[k]))
            throw SingularityError("Delta_c^1 vanishes while higher harmonics do not");
        const double term = psi[k] * delta_c[k] / dc1;
        sum += term;
        if (k + 1 == psi.size()) last = std::abs(term);
    }
    if (std::abs(1.0 - sum) < kSingular) throw SingularityError("Gamma series denominator vanishes");
    if (last_term) *last_term = last;
    return 1.0 / (1.0 - sum);
}

ClosedLoopPoint::ClosedLoopPoint(const LoopConfig& cfg, double omega, int n_harmonics)
    : cfg_(&cfg), omega_(omega), orders_(odd_orders(n_harmonics)) {
    const OpenLoopPoint ol(cfg, omega);
    const ResetKernel& kernel = ol.kernel();
    const double angle_cs = kernel.angle_cs();

    for (int n : orders_) {
        const double nw = n * omega;
        const cplx c1 = cfg.c1.eval(nw), c3 = cfg.c3.eval(nw), p = cfg.plant.eval(nw), c4 = cfg.c4.eval(nw);
        const cplx path = c3 * p * c4 * c1;
        LoopTerms lt;
        lt.l_l = (kernel.base(nw) + cfg.c2.eval(nw)) * path;
        lt.l_rho = kernel.c_rho(n) * path;
        const cplx one_l = 1.0 + lt.l_l;
        if (std::abs(one_l) < kSingular * std::max(1.0, std::abs(lt.l_l)))
            singular("base-linear loop resonance: 1+L_l vanishes", n, omega);
        lt.s_l = 1.0 / one_l;
        lt.psi_n = std::abs(lt.l_rho) / std::abs(one_l);
        if (n == 1)
            lt.delta_c_n = first_delta_c(cfg.cr, omega, -angle_cs);
        else
            lt.delta_c_n = -first_delta_c(cfg.cr, nw,
                                          wrapped_angle(lt.l_rho) - wrapped_angle(one_l) - n * angle_cs);
        terms_.push_back(lt);
        ln_.push_back(ol.ln(n));
        c4_.push_back(c4);
        p_.push_back(p);
    }

    std::vector<double> psi, dc;
    for (const auto& lt : terms_) {
        psi.push_back(lt.psi_n);
        dc.push_back(lt.delta_c_n);
    }
    try {
        gamma_ = gamma_series(psi, dc, &last_term_);
    } catch (const SingularityError& e) {
        singular(e.what(), 1, omega);
    }

    l1_ = terms_[0].l_l + terms_[0].l_rho;
    l_o_ = l1_ + (gamma_ - 1.0) * terms_[0].l_rho;
    const cplx one_o = 1.0 + l_o_;
    if (std::abs(one_o) < kSingular * std::max(1.0, std::abs(l_o_))) singular("1+L_o vanishes", 1, omega);
    if (std::abs(c4_[0]) < kSingular) singular("C4 vanishes", 1, omega);
    if (std::abs(p_[0]) < kSingular) singular("plant zero", 1, omega);
    s1_ = 1.0 / one_o;
    t1_ = l_o_ / (c4_[0] * one_o);
    cs1_ = t1_ / p_[0];
    ps1_ = -p_[0] * c4_[0] / one_o;
}

size_t ClosedLoopPoint::index(int n) const {
    if (n < 1 || n > orders_.back()) throw std::out_of_range("harmonic order outside the computed range");
    return static_cast<size_t>((n - 1) / 2);
}

const LoopTerms& ClosedLoopPoint::terms(int n) const {
    if (n % 2 == 0) throw std::invalid_argument("loop terms exist for odd orders only");
    return terms_[index(n)];
}

cplx ClosedLoopPoint::value(Sensitivity fn, int n) const {
    if (n % 2 == 0) {
        index(n);
        return 0.0;
    }
    if (n == 1) {
        switch (fn) {
        case Sensitivity::s: return s1_;
        case Sensitivity::t: return t1_;
        case Sensitivity::cs: return cs1_;
        case Sensitivity::ps: return ps1_;
        }
    }
    const size_t k = index(n);
    const LoopTerms& lt = terms_[k];
    if (fn == Sensitivity::ps)
        return -lt.s_l * std::abs(ps1_) * std::polar(1.0, n * wrapped_angle(ps1_)) * gamma_ * ln_[k] * c4_[k];
    const cplx fac = lt.s_l * std::abs(s1_) * std::polar(1.0, n * wrapped_angle(s1_)) * gamma_ * ln_[k];
    switch (fn) {
    case Sensitivity::s: return -fac * c4_[k];
    case Sensitivity::t: return fac;
    case Sensitivity::cs:
        if (std::abs(p_[k]) < kSingular) singular("plant zero", n, omega_);
        return fac / p_[k];
    default: break;
    }
    return 0.0;
}

HarmonicRatio ClosedLoopPoint::harmonic_ratio(int n) const {
    const double s1 = std::abs(s1_);
    if (s1 == 0.0) throw SingularityError("|S_1| is zero; harmonic ratio undefined", {omega_});
    HarmonicRatio r;
    r.direct = std::abs(s(n)) / s1;
    if (n % 2 == 0 || n == 1) {
        r.formula = n == 1 ? 1.0 : 0.0;
        return r;
    }
    const size_t k = index(n);
    r.formula = std::abs(terms_[k].s_l * gamma_ * ln_[k] * c4_[k]);
    return r;
}

SdfCheck ClosedLoopPoint::sdf_check() const {
    const cplx sdf = 1.0 / (1.0 + l1_);
    const cplx gamma_rho = (gamma_ - 1.0) * terms_[0].l_rho;
    return {s1_, sdf / (1.0 + gamma_rho * sdf)};
}

double gamma(const LoopConfig& cfg, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).gamma();
}

LoopTerms loop_terms(const LoopConfig& cfg, int n, double omega) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("loop terms exist for odd orders only");
    // Only orders up to n are needed; the point computes them all.
    return ClosedLoopPoint(cfg, omega, (n + 1) / 2).terms(n);
}

cplx sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).s(n);
}
cplx comp_sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).t(n);
}
cplx control_sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).cs(n);
}
cplx process_sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).ps(n);
}
HarmonicRatio harmonic_ratio(const LoopConfig& cfg, int n, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).harmonic_ratio(n);
}
SdfCheck sdf_cross_check(const LoopConfig& cfg, double omega, int n_harmonics) {
    return ClosedLoopPoint(cfg, omega, n_harmonics).sdf_check();
}

ClosedLoopGrid closed_loop_grid(const LoopConfig& cfg, const std::vector<double>& omegas, int n_harmonics,
                                Sensitivity fn, int workers) {
    const auto orders = odd_orders(n_harmonics);
    for (size_t i = 0; i < omegas.size(); ++i) {
        if (!(omegas[i] > 0.0)) throw std::invalid_argument("grid frequencies must be positive");
        if (i > 0 && omegas[i] < omegas[i - 1]) throw std::invalid_argument("grid frequencies must be sorted");
    }
    std::vector<std::vector<cplx>> rows(omegas.size());
    std::vector<double> gam(omegas.size()), last(omegas.size());
    std::vector<std::string> errors(omegas.size());
    parallel_for(static_cast<int>(omegas.size()), workers, [&](int i) {
        try {
            ClosedLoopPoint p(cfg, omegas[i], n_harmonics);
            rows[i].reserve(orders.size());
            for (int n : orders) rows[i].push_back(p.value(fn, n));
            gam[i] = p.gamma();
            last[i] = p.last_term();
        } catch (const NumericalError& e) {
            errors[i] = e.what();
        }
    });
    ClosedLoopGrid g;
    g.function = fn;
    g.orders = orders;
    for (size_t i = 0; i < omegas.size(); ++i) {
        if (!errors[i].empty()) {
            g.excluded.emplace_back(omegas[i], errors[i]);
            continue;
        }
        g.omega.push_back(omegas[i]);
        g.values.push_back(std::move(rows[i]));
        g.gamma.push_back(gam[i]);
        g.last_term.push_back(last[i]);
    }
    return g;
}

namespace {

std::vector<double> harmonic_sum(const ClosedLoopPoint& p, Sensitivity fn, double amplitude, double omega,
                                 const std::vector<double>& t) {
    std::vector<double> out(t.size(), 0.0);
    for (int n : p.orders()) {
        const cplx v = p.value(fn, n);
        const double mag = amplitude * std::abs(v), ang = wrapped_angle(v);
        if (mag == 0.0) continue;
        for (size_t i = 0; i < t.size(); ++i) out[i] += mag * std::sin(n * omega * t[i] + ang);
    }
    return out;
}

} // namespace

ClosedLoopSignals reconstruct_closed_loop_signals(const LoopConfig& cfg, double amplitude, double omega,
                                                  int n_harmonics, const std::vector<double>& t) {
    const ClosedLoopPoint p(cfg, omega, n_harmonics);
    return {harmonic_sum(p, Sensitivity::s, amplitude, omega, t), harmonic_sum(p, Sensitivity::t, amplitude, omega, t),
            harmonic_sum(p, Sensitivity::cs, amplitude, omega, t)};
}

std::vector<double> reconstruct_disturbance_error(const LoopConfig& cfg, double amplitude, double omega,
                                                  int n_harmonics, const std::vector<double>& t) {
    const ClosedLoopPoint p(cfg, omega, n_harmonics);
    return harmonic_sum(p, Sensitivity::ps, amplitude, omega, t);
}

} // namespace hosidf
