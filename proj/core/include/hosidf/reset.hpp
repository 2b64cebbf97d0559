#pragma once

#include <string>
#include <vector>

#include "hosidf/lti.hpp"

namespace hosidf {

// Linear base dynamics plus a reset value applied to the first state.
struct ResetController {
    StateSpace base;
    double gamma = 0.0;

    ResetController(StateSpace base, double gamma);
    static ResetController from_tf(const RationalTf& tf, double gamma) { return {to_state_space(tf), gamma}; }
    int states() const { return base.states(); }
};

// diag(gamma, 1, ..., 1)
Eigen::MatrixXd reset_matrix(const ResetController& rc);

// Base-linear transfer function; gamma plays no role.
Lti base_linear_tf(const ResetController& rc);

struct StabilityReport {
    bool stable = false;
    bool marginal = false;
    double worst_radius = 0.0;
    double worst_delta = 0.0;
    std::string diagnostic;
};

std::vector<double> default_delta_grid();

// max over the grid of rho(A_rho * expm(A_R * delta)), compared with 1 - eps.
StabilityReport open_loop_stability_check(const ResetController& rc,
                                          const std::vector<double>& delta_grid = default_delta_grid(),
                                          double eps = 1e-9);

struct DeltaTerms {
    Eigen::VectorXcd delta_l;   // (jwI - A)^-1 B
    Eigen::RowVectorXcd delta_x; // C (jnwI - A)^-1 jnw
    Eigen::VectorXd delta_c;    // |delta_l| sin(angle delta_l - angle Cs), per entry
    Eigen::VectorXd delta_q;
};

// (jwI - A)^-1 B of the base dynamics.
Eigen::VectorXcd delta_l(const ResetController& rc, double omega);

DeltaTerms delta_terms(const ResetController& rc, double omega, int n, double angle_cs);

// Nonlinear part of the n-th describing function of the reset element (odd n).
cplx c_rho_n(const ResetController& rc, double omega, int n, cplx cs_response);

// Per-frequency cache: delta_q depends only on omega and angle(Cs(omega)).
// Keeps a pointer to rc, which must outlive the kernel.
class ResetKernel {
public:
    ResetKernel(const ResetController& rc, double omega, cplx cs_response);
    cplx c_rho(int n) const;
    cplx base(double omega) const { return rc_->base.eval(omega); }
    const Eigen::VectorXd& delta_q() const { return dq_; }
    double angle_cs() const { return angle_cs_; }
    double omega() const { return omega_; }

private:
    const ResetController* rc_;
    double omega_;
    double angle_cs_;
    Eigen::VectorXd dq_;
};

} // namespace hosidf
