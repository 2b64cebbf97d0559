#include "hosidf/lti.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include "hosidf/error.hpp"

namespace hosidf {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw SchemaError(std::string(what) + ": coefficients must be finite");
}

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

} // namespace

double wrapped_angle(cplx z) {
    double a = std::arg(z);
    return a <= -std::numbers::pi ? std::numbers::pi : a;
}

std::vector<double> logspace(double lo, double hi, int points) {
    std::vector<double> out;
    if (points <= 0) return out;
    if (points == 1) return {lo};
    const double a = std::log10(lo), b = std::log10(hi);
    out.reserve(points);
    for (int i = 0; i < points; ++i)
        out.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    return r;
}

cplx polyval(const std::vector<double>& p, cplx s) {
    cplx acc = 0.0;
    for (double c : p) acc = acc * s + c;
    return acc;
}

RationalTf::RationalTf(std::vector<double> n, std::vector<double> d) : num(std::move(n)), den(std::move(d)) {
    if (num.empty()) throw SchemaError("num: must be a non-empty array");
    if (den.empty()) throw SchemaError("den: must be a non-empty array");
    require_finite(num, "num");
    require_finite(den, "den");
    if (den.front() == 0.0) throw SchemaError("den: leading coefficient must be nonzero");
    while (num.size() > 1 && num.front() == 0.0) num.erase(num.begin());
    if (num_degree() > den_degree() + 1)
        throw SchemaError("num: degree exceeds den degree by more than one");
}

cplx RationalTf::eval(double omega) const {
    const cplx s(0.0, omega);
    const cplx d = polyval(den, s);
    if (d == 0.0) {
        std::ostringstream os;
        os << "pole on the imaginary axis at omega=" << omega << " rad/s";
        throw SingularityError(os.str(), {omega});
    }
    return polyval(num, s) / d;
}

StateSpace::StateSpace(Eigen::MatrixXd a_, Eigen::VectorXd b_, Eigen::RowVectorXd c_, double d_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(d_) {
    const auto n = a.rows();
    if (n < 1) throw SchemaError("state space: at least one state is required");
    if (a.cols() != n || b.size() != n || c.size() != n)
        throw SchemaError("state space: inconsistent dimensions");
    if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !std::isfinite(d))
        throw SchemaError("state space: entries must be finite");
}

cplx StateSpace::eval(double omega) const {
    const auto n = a.rows();
    Eigen::MatrixXcd m = cplx(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - a.cast<cplx>();
    Eigen::VectorXcd x = m.partialPivLu().solve(b.cast<cplx>());
    if (!x.allFinite()) {
        std::ostringstream os;
        os << "pole on the imaginary axis at omega=" << omega << " rad/s";
        throw SingularityError(os.str(), {omega});
    }
    return (c.cast<cplx>() * x)(0) + d;
}

FrfTable::FrfTable(std::vector<double> omega, std::vector<cplx> response)
    : omega_(std::move(omega)), response_(std::move(response)) {
    if (omega_.size() != response_.size()) throw SchemaError("frd: frequency and response lengths differ");
    if (omega_.size() < 2) throw SchemaError("frd: at least 2 samples are required");
    for (size_t i = 0; i < omega_.size(); ++i) {
        if (!(omega_[i] > 0.0) || !std::isfinite(omega_[i]))
            throw SchemaError("frd: frequencies must be positive and finite");
        if (i > 0 && !(omega_[i] > omega_[i - 1]))
            throw SchemaError("frd: frequencies must be strictly increasing");
        if (!std::isfinite(response_[i].real()) || !std::isfinite(response_[i].imag()) || response_[i] == 0.0)
            throw SchemaError("frd: responses must be finite and nonzero");
    }
    double prev = 0.0;
    for (size_t i = 0; i < omega_.size(); ++i) {
        log_w_.push_back(std::log10(omega_[i]));
        mag_db_.push_back(20.0 * std::log10(std::abs(response_[i])));
        double ph = std::arg(response_[i]);
        if (i > 0) {
            while (ph - prev > std::numbers::pi) ph -= 2.0 * std::numbers::pi;
            while (ph - prev < -std::numbers::pi) ph += 2.0 * std::numbers::pi;
        }
        phase_.push_back(ph);
        prev = ph;
    }
}

cplx FrfTable::eval(double omega) const {
    if (omega < omega_.front() || omega > omega_.back()) {
        std::ostringstream os;
        os << "frequency " << omega << " rad/s outside FRF table range [" << omega_.front() << ", "
           << omega_.back() << "]; widen the table or use a rational plant";
        throw RangeError(os.str(), {omega});
    }
    auto it = std::upper_bound(omega_.begin(), omega_.end(), omega);
    size_t i = it == omega_.end() ? omega_.size() - 2 : static_cast<size_t>(it - omega_.begin()) - 1;
    if (i + 1 >= omega_.size()) i = omega_.size() - 2;
    const double t = (std::log10(omega) - log_w_[i]) / (log_w_[i + 1] - log_w_[i]);
    const double db = mag_db_[i] + t * (mag_db_[i + 1] - mag_db_[i]);
    const double ph = phase_[i] + t * (phase_[i + 1] - phase_[i]);
    return std::polar(std::pow(10.0, db / 20.0), ph);
}

FrfTable read_frf_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "freq_hz,re,im")
        throw SchemaError("frd csv: expected header 'freq_hz,re,im'");
    std::vector<double> w;
    std::vector<cplx> h;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f, re, im;
        if (!std::getline(ls, f, ',') || !std::getline(ls, re, ',') || !std::getline(ls, im))
            throw SchemaError("frd csv: row " + std::to_string(row) + " needs 3 columns");
        try {
            w.push_back(hz_to_rad(std::stod(f)));
            h.emplace_back(std::stod(re), std::stod(im));
        } catch (const std::logic_error&) {
            throw SchemaError("frd csv: row " + std::to_string(row) + " is not numeric");
        }
    }
    return FrfTable(std::move(w), std::move(h));
}

cplx Lti::eval(double omega) const {
    return std::visit([omega](const auto& s) { return s.eval(omega); }, v_);
}

StateSpace to_state_space(const RationalTf& tf) {
    if (!tf.proper()) throw SchemaError("to_state_space: transfer function is improper");
    const double lead = tf.den.front();
    std::vector<double> den(tf.den);
    for (double& x : den) x /= lead;
    const int n = tf.den_degree();
    std::vector<double> num(static_cast<size_t>(n + 1) - tf.num.size(), 0.0);
    for (double x : tf.num) num.push_back(x / lead);

    if (n == 0) {
        return StateSpace(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Zero(1),
                          Eigen::RowVectorXd::Zero(1), num[0]);
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    Eigen::RowVectorXd c(n);
    const double d = num[0];
    for (int i = 0; i < n; ++i) {
        a(0, i) = -den[i + 1];
        c(i) = num[i + 1] - d * den[i + 1];
    }
    for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    b(0) = 1.0;
    return StateSpace(std::move(a), std::move(b), std::move(c), d);
}

StateSpace realize(const Lti& sys) {
    if (const auto* tf = std::get_if<RationalTf>(&sys.variant())) return to_state_space(*tf);
    if (const auto* ss = std::get_if<StateSpace>(&sys.variant())) return *ss;
    throw SchemaError("tabulated FRF blocks have no state-space realization");
}

Lti series(const Lti& a, const Lti& b) {
    const auto* ta = std::get_if<RationalTf>(&a.variant());
    const auto* tb = std::get_if<RationalTf>(&b.variant());
    if (ta && tb) return RationalTf(polymul(ta->num, tb->num), polymul(ta->den, tb->den));

    if (a.is_frf() || b.is_frf()) {
        if (a.is_frf() && b.is_frf()) throw SchemaError("series of two FRF tables is not supported");
        const auto& tab = std::get<FrfTable>(a.is_frf() ? a.variant() : b.variant());
        const Lti& other = a.is_frf() ? b : a;
        std::vector<cplx> h;
        for (size_t i = 0; i < tab.omega().size(); ++i)
            h.push_back(tab.response()[i] * other.eval(tab.omega()[i]));
        return FrfTable(tab.omega(), std::move(h));
    }

    // Cascade: u -> a -> b -> y.
    const StateSpace sa = realize(a), sb = realize(b);
    const int na = sa.states(), nb = sb.states();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(na + nb, na + nb);
    m.topLeftCorner(na, na) = sa.a;
    m.bottomLeftCorner(nb, na) = sb.b * sa.c;
    m.bottomRightCorner(nb, nb) = sb.a;
    Eigen::VectorXd bb(na + nb);
    bb << sa.b, sb.b * sa.d;
    Eigen::RowVectorXd cc(na + nb);
    cc << sb.d * sa.c, sb.c;
    return StateSpace(std::move(m), std::move(bb), std::move(cc), sb.d * sa.d);
}

std::vector<cplx> poles(const Lti& sys) {
    Eigen::MatrixXd a;
    if (const auto* tf = std::get_if<RationalTf>(&sys.variant())) {
        const int n = tf->den_degree();
        if (n == 0) return {};
        a = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) a(0, i) = -tf->den[i + 1] / tf->den[0];
        for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    } else if (const auto* ss = std::get_if<StateSpace>(&sys.variant())) {
        a = ss->a;
    } else {
        throw SchemaError("poles: tabulated FRF blocks are not supported");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    std::vector<cplx> out;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        cplx p = es.eigenvalues()(i);
        if (std::abs(p.imag()) < 1e-10) p = {p.real(), 0.0};
        out.push_back(p);
    }
    return out;
}

bool hurwitz_check(const Lti& sys, double eps) {
    for (const cplx& p : poles(sys))
        if (!(p.real() < -eps)) return false;
    return true;
}

} // namespace hosidf
