#include "hosidf/reset.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "hosidf/error.hpp"

namespace hosidf {

namespace {

constexpr double kSingular = 1e-12;

Eigen::VectorXcd delta_l_at(const StateSpace& ss, double omega) {
    const auto n = ss.a.rows();
    Eigen::MatrixXcd m = cplx(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - ss.a.cast<cplx>();
    Eigen::VectorXcd x = m.partialPivLu().solve(ss.b.cast<cplx>());
    if (!x.allFinite()) {
        std::ostringstream os;
        os << "reset controller has a pole on the imaginary axis at omega=" << omega;
        throw SingularityError(os.str(), {omega});
    }
    return x;
}

Eigen::RowVectorXcd delta_x_at(const StateSpace& ss, double omega) {
    const auto n = ss.a.rows();
    Eigen::MatrixXcd m = cplx(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - ss.a.cast<cplx>();
    Eigen::VectorXcd x = m.transpose().partialPivLu().solve(ss.c.transpose().cast<cplx>());
    if (!x.allFinite()) {
        std::ostringstream os;
        os << "reset controller has a pole on the imaginary axis at omega=" << omega;
        throw SingularityError(os.str(), {omega});
    }
    return x.transpose() * cplx(0.0, omega);
}

Eigen::VectorXd delta_c_of(const Eigen::VectorXcd& dl, double angle_cs) {
    Eigen::VectorXd out(dl.size());
    for (int i = 0; i < dl.size(); ++i)
        out(i) = std::abs(dl(i)) * std::sin(wrapped_angle(dl(i)) - angle_cs);
    return out;
}

Eigen::VectorXd delta_q_of(const ResetController& rc, double omega, const Eigen::VectorXd& dc) {
    const int n = rc.states();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd ar = reset_matrix(rc);
    const Eigen::MatrixXd e = (rc.base.a * (std::numbers::pi / omega)).exp();
    const Eigen::MatrixXd m = ar * e + id;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!e.allFinite() || !(lu.rcond() > kSingular)) {
        std::ostringstream os;
        os << "A_rho*expm(A_R*pi/w)+I is singular at omega=" << omega << " rad/s";
        throw SingularityError(os.str(), {omega});
    }
    return (id + e) * lu.solve((ar - id) * dc);
}

void require_odd(int n) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("harmonic order must be an odd positive integer");
}

} // namespace

ResetController::ResetController(StateSpace b, double g) : base(std::move(b)), gamma(g) {
    if (!std::isfinite(gamma) || !(gamma > -1.0 && gamma <= 1.0))
        throw SchemaError("gamma: must lie in (-1, 1]");
}

Eigen::MatrixXd reset_matrix(const ResetController& rc) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(rc.states(), rc.states());
    m(0, 0) = rc.gamma;
    return m;
}

Lti base_linear_tf(const ResetController& rc) { return rc.base; }

std::vector<double> default_delta_grid() { return logspace(1e-4, 1e3, 400); }

StabilityReport open_loop_stability_check(const ResetController& rc, const std::vector<double>& delta_grid,
                                          double eps) {
    if (delta_grid.empty()) throw std::invalid_argument("delta grid must be nonempty");
    StabilityReport rep;
    const Eigen::MatrixXd ar = reset_matrix(rc);
    for (double delta : delta_grid) {
        if (!(delta > 0.0)) throw std::invalid_argument("delta grid entries must be positive");
        const Eigen::MatrixXd m = ar * (rc.base.a * delta).exp();
        if (!m.allFinite()) {
            std::ostringstream os;
            os << "matrix exponential overflow at delta=" << delta << " s";
            rep.stable = false;
            rep.marginal = false;
            rep.worst_radius = std::numeric_limits<double>::infinity();
            rep.worst_delta = delta;
            rep.diagnostic = os.str();
            return rep;
        }
        const double radius = m.eigenvalues().cwiseAbs().maxCoeff();
        if (radius > rep.worst_radius || delta == delta_grid.front()) {
            rep.worst_radius = radius;
            rep.worst_delta = delta;
        }
    }
    rep.stable = rep.worst_radius < 1.0 - eps;
    rep.marginal = std::abs(rep.worst_radius - 1.0) <= eps;
    std::ostringstream os;
    os << (rep.stable ? "stable" : rep.marginal ? "marginal" : "unstable") << ", worst spectral radius "
       << rep.worst_radius << " at delta=" << rep.worst_delta << " s";
    rep.diagnostic = os.str();
    return rep;
}

Eigen::VectorXcd delta_l(const ResetController& rc, double omega) { return delta_l_at(rc.base, omega); }

DeltaTerms delta_terms(const ResetController& rc, double omega, int n, double angle_cs) {
    require_odd(n);
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    DeltaTerms t;
    t.delta_l = delta_l_at(rc.base, omega);
    t.delta_x = delta_x_at(rc.base, n * omega);
    t.delta_c = delta_c_of(t.delta_l, angle_cs);
    t.delta_q = delta_q_of(rc, omega, t.delta_c);
    return t;
}

cplx c_rho_n(const ResetController& rc, double omega, int n, cplx cs_response) {
    return ResetKernel(rc, omega, cs_response).c_rho(n);
}

ResetKernel::ResetKernel(const ResetController& rc, double omega, cplx cs_response)
    : rc_(&rc), omega_(omega), angle_cs_(wrapped_angle(cs_response)) {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    dq_ = delta_q_of(rc, omega, delta_c_of(delta_l_at(rc.base, omega), angle_cs_));
}

cplx ResetKernel::c_rho(int n) const {
    require_odd(n);
    const cplx dx_dq = (delta_x_at(rc_->base, n * omega_) * dq_.cast<cplx>())(0);
    return 2.0 * dx_dq * std::polar(1.0, n * angle_cs_) / (n * std::numbers::pi);
}

} // namespace hosidf
