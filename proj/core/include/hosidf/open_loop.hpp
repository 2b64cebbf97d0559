#pragma once

#include <functional>
#include <vector>

#include "hosidf/lti.hpp"
#include "hosidf/reset.hpp"

namespace hosidf {

// Generalized loop. Open-loop analysis ignores c4.
//   e -> C1 -> z ; z -> Cs -> z_s (reset trigger)
//   z -> Cr -> m ; z -> C2 -> a ; v = m + a -> C3 -> u ; y = P (u + d) ; e = r - C4 y
struct LoopConfig {
    Lti c1 = Lti::gain(1.0);
    Lti c2 = Lti::gain(0.0);
    Lti c3 = Lti::gain(1.0);
    Lti c4 = Lti::gain(1.0);
    Lti cs = Lti::gain(1.0);
    ResetController cr;
    Lti plant;
};

// Odd orders 1, 3, ..., 2*n_harmonics - 1. N_h counts the odd harmonics.
std::vector<int> odd_orders(int n_harmonics);

class OpenLoopPoint {
public:
    OpenLoopPoint(const LoopConfig& cfg, double omega);
    cplx cr(int n) const;
    cplx ln(int n) const;
    double omega() const { return omega_; }
    const ResetKernel& kernel() const { return kernel_; }

private:
    const LoopConfig* cfg_;
    double omega_;
    ResetKernel kernel_;
    cplx c1_;
};

cplx cr_hosidf(const LoopConfig& cfg, int n, double omega);
cplx ln_hosidf(const LoopConfig& cfg, int n, double omega);

enum class OpenLoopFunction { cr, ln };

struct HosidfGrid {
    std::vector<double> omega;
    std::vector<int> orders;
    std::vector<std::vector<cplx>> values; // [frequency][order index]
};

HosidfGrid open_loop_grid(const LoopConfig& cfg, const std::vector<double>& omegas, int n_harmonics,
                          OpenLoopFunction fn = OpenLoopFunction::ln, int workers = 1);

// Steady-state output for e_o = amplitude * sin(omega t + phase).
std::vector<double> reconstruct_open_loop_output(const LoopConfig& cfg, double amplitude, double phase,
                                                 double omega, int n_harmonics, const std::vector<double>& t);

// Runs fn(i) for i in [0, count) over a small thread pool.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

} // namespace hosidf
