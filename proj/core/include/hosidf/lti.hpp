#pragma once

#include <complex>
#include <iosfwd>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace hosidf {

using cplx = std::complex<double>;

constexpr double hz_to_rad(double hz) { return 2.0 * std::numbers::pi * hz; }
constexpr double rad_to_hz(double w) { return w / (2.0 * std::numbers::pi); }

// Principal phase in (-pi, pi].
double wrapped_angle(cplx z);

std::vector<double> logspace(double lo, double hi, int points);
std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b);
cplx polyval(const std::vector<double>& p, cplx s);

// Coefficients in descending powers of s. One degree of improperness is allowed
// so that pure lead terms like s/w can be written directly.
struct RationalTf {
    std::vector<double> num;
    std::vector<double> den;

    RationalTf(std::vector<double> num, std::vector<double> den);
    cplx eval(double omega) const;
    int num_degree() const { return static_cast<int>(num.size()) - 1; }
    int den_degree() const { return static_cast<int>(den.size()) - 1; }
    bool proper() const { return num_degree() <= den_degree(); }
};

// Single-input single-output realization.
struct StateSpace {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
    double d = 0.0;

    StateSpace(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::RowVectorXd c, double d);
    int states() const { return static_cast<int>(a.rows()); }
    cplx eval(double omega) const;
};

// Tabulated frequency response. Interpolated linearly in log10(omega) on dB
// magnitude and unwrapped phase.
class FrfTable {
public:
    FrfTable(std::vector<double> omega, std::vector<cplx> response);
    cplx eval(double omega) const;
    const std::vector<double>& omega() const { return omega_; }
    const std::vector<cplx>& response() const { return response_; }
    double min_omega() const { return omega_.front(); }
    double max_omega() const { return omega_.back(); }

private:
    std::vector<double> omega_;
    std::vector<cplx> response_;
    std::vector<double> log_w_;
    std::vector<double> mag_db_;
    std::vector<double> phase_;
};

// Reads the `freq_hz,re,im` CSV layout.
FrfTable read_frf_csv(std::istream& in);

class Lti {
public:
    using Variant = std::variant<RationalTf, StateSpace, FrfTable>;

    Lti(RationalTf tf) : v_(std::move(tf)) {}
    Lti(StateSpace ss) : v_(std::move(ss)) {}
    Lti(FrfTable frf) : v_(std::move(frf)) {}

    static Lti gain(double k) { return RationalTf({k}, {1.0}); }
    static Lti tf(std::vector<double> num, std::vector<double> den) {
        return RationalTf(std::move(num), std::move(den));
    }

    cplx eval(double omega) const;
    const Variant& variant() const { return v_; }
    bool is_frf() const { return std::holds_alternative<FrfTable>(v_); }

private:
    Variant v_;
};

inline cplx evaluate(const Lti& sys, double omega) { return sys.eval(omega); }

// Controllable canonical form. A pure gain becomes a one-state dummy with B = 0.
StateSpace to_state_space(const RationalTf& tf);

// State-space view of any parametric block; FRF tables are rejected.
StateSpace realize(const Lti& sys);

// Series connection a*b. Rational times rational stays rational.
Lti series(const Lti& a, const Lti& b);

std::vector<cplx> poles(const Lti& sys);

// True iff every pole has real part < -eps.
bool hurwitz_check(const Lti& sys, double eps = 0.0);

} // namespace hosidf
