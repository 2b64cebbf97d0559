#pragma once

#include <string>
#include <vector>

#include "hosidf/open_loop.hpp"

namespace hosidf {

struct LoopTerms {
    cplx l_l;          // base-linear loop at n*omega
    cplx l_rho;        // nonlinear loop part at n*omega
    cplx s_l;          // 1 / (1 + l_l)
    double psi_n = 0;  // |l_rho| / |1 + l_l|
    double delta_c_n = 0;
};

LoopTerms loop_terms(const LoopConfig& cfg, int n, double omega);

enum class Sensitivity { s, t, cs, ps };

Sensitivity parse_sensitivity(const std::string& name); // sn | tn | csn | psn
std::string sensitivity_name(Sensitivity s);

struct HarmonicRatio {
    double direct = 0;   // |S_n| / |S_1|
    double formula = 0;  // |S_l(nw) Gamma L_n C4(nw)|
};

struct SdfCheck {
    cplx s1_direct;
    cplx s1_via_sdf;
};

// Everything the closed-loop sensitivity family needs at one input frequency.
class ClosedLoopPoint {
public:
    ClosedLoopPoint(const LoopConfig& cfg, double omega, int n_harmonics);

    double gamma() const { return gamma_; }
    // Magnitude of the last retained series term, to spot slow convergence.
    double last_term() const { return last_term_; }
    cplx l_o() const { return l_o_; }
    cplx l1() const { return l1_; }

    cplx s(int n) const { return value(Sensitivity::s, n); }
    cplx t(int n) const { return value(Sensitivity::t, n); }
    cplx cs(int n) const { return value(Sensitivity::cs, n); }
    cplx ps(int n) const { return value(Sensitivity::ps, n); }
    cplx value(Sensitivity fn, int n) const;

    const LoopTerms& terms(int n) const;
    HarmonicRatio harmonic_ratio(int n) const;
    SdfCheck sdf_check() const;
    const std::vector<int>& orders() const { return orders_; }

private:
    const LoopConfig* cfg_;
    double omega_;
    std::vector<int> orders_;
    std::vector<LoopTerms> terms_;
    std::vector<cplx> ln_;
    std::vector<cplx> c4_;
    std::vector<cplx> p_;
    double gamma_ = 1.0;
    double last_term_ = 0.0;
    cplx l1_, l_o_, s1_, t1_, cs1_, ps1_;

    size_t index(int n) const;
};

// 1 / (1 - sum_{k>=1} psi[k] delta_c[k] / delta_c[0]); index 0 is the first harmonic.
double gamma_series(const std::vector<double>& psi, const std::vector<double>& delta_c, double* last_term = nullptr);

double gamma(const LoopConfig& cfg, double omega, int n_harmonics);
cplx sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics);
cplx comp_sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics);
cplx control_sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics);
cplx process_sensitivity_n(const LoopConfig& cfg, int n, double omega, int n_harmonics);
HarmonicRatio harmonic_ratio(const LoopConfig& cfg, int n, double omega, int n_harmonics);
SdfCheck sdf_cross_check(const LoopConfig& cfg, double omega, int n_harmonics);

struct ClosedLoopGrid {
    Sensitivity function = Sensitivity::s;
    std::vector<double> omega;
    std::vector<int> orders;
    std::vector<std::vector<cplx>> values; // [frequency][order index]
    std::vector<double> gamma;
    std::vector<double> last_term;
    // Frequencies dropped from the grid, with the reason.
    std::vector<std::pair<double, std::string>> excluded;
};

ClosedLoopGrid closed_loop_grid(const LoopConfig& cfg, const std::vector<double>& omegas, int n_harmonics,
                                Sensitivity fn, int workers = 1);

struct ClosedLoopSignals {
    std::vector<double> e;
    std::vector<double> y;
    std::vector<double> u;
};

// Steady state for r = amplitude * sin(omega t).
ClosedLoopSignals reconstruct_closed_loop_signals(const LoopConfig& cfg, double amplitude, double omega,
                                                  int n_harmonics, const std::vector<double>& t);

// Steady-state error for d = amplitude * sin(omega t) at the plant input.
std::vector<double> reconstruct_disturbance_error(const LoopConfig& cfg, double amplitude, double omega,
                                                  int n_harmonics, const std::vector<double>& t);

} // namespace hosidf
