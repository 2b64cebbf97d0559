#include "hosidf/library.hpp"

#include <cmath>
#include <sstream>

#include "hosidf/error.hpp"

namespace hosidf {

namespace {

constexpr double pi = std::numbers::pi;

RationalTf first_order(double zero, double pole) {
    // (s/zero + 1)/(s/pole + 1); zero or pole of 0 drops that factor.
    std::vector<double> num = zero > 0 ? std::vector<double>{1.0 / zero, 1.0} : std::vector<double>{1.0};
    std::vector<double> den = pole > 0 ? std::vector<double>{1.0 / pole, 1.0} : std::vector<double>{1.0};
    return {num, den};
}

RationalTf times(const RationalTf& a, const RationalTf& b) {
    return {polymul(a.num, b.num), polymul(a.den, b.den)};
}

} // namespace

RationalTf make_pid(const PidParams& p) {
    if (!(p.omega_i > 0 && p.omega_d > 0 && p.omega_t > 0 && p.omega_f > 0))
        throw SchemaError("pid: all corner frequencies must be positive");
    if (!(p.omega_d < p.omega_t)) throw SchemaError("pid: omega_d must be below omega_t");
    RationalTf pi_part({p.kp, p.kp * p.omega_i}, {1.0, 0.0});
    return times(times(pi_part, first_order(p.omega_d, p.omega_t)), first_order(0, p.omega_f));
}

RationalTf make_fore(double omega_r) {
    if (!(omega_r > 0)) throw SchemaError("fore: omega_r must be positive");
    return {{1.0}, {1.0 / omega_r, 1.0}};
}

RationalTf make_shaping_filter() { return first_order(660.0 * pi, 237.6 * pi); }

RationalTf case_study_plant() { return {{6.615e5}, {83.57, 279.4, 5.837e5}}; }

CgLpFragment make_cglp(const CgLpParams& p, const std::optional<Lti>& shaping) {
    if (!(p.omega_rc > 0)) throw SchemaError("cglp: omega_rc must be positive");
    const RationalTf lead = first_order(p.omega_rc, p.lead_lowpass ? p.pid.omega_f : 0.0);
    CgLpFragment f{LoopConfig{.c1 = Lti::gain(1.0),
                              .c2 = Lti::gain(0.0),
                              .c3 = times(lead, make_pid(p.pid)),
                              .c4 = Lti::gain(1.0),
                              .cs = shaping ? *shaping : Lti::gain(1.0),
                              .cr = ResetController::from_tf(make_fore(p.omega_r), p.gamma),
                              .plant = case_study_plant()},
                   ""};
    std::ostringstream os;
    os << "C_r = FORE(omega_r=" << p.omega_r << ", gamma=" << p.gamma << "); C_3 = lead(omega_rc=" << p.omega_rc
       << (p.lead_lowpass ? ", with omega_f pole" : "") << ") * PID; C_1 = C_4 = 1; C_2 = 0; C_s = "
       << (shaping ? "shaping filter" : "1");
    f.mapping = os.str();
    return f;
}

LoopConfig pid_case_study() {
    return LoopConfig{.c1 = Lti::gain(1.0),
                      .c2 = Lti::gain(1.0),
                      .c3 = make_pid({}),
                      .c4 = Lti::gain(1.0),
                      .cs = Lti::gain(1.0),
                      .cr = ResetController::from_tf(RationalTf({0.0}, {1.0}), 1.0),
                      .plant = case_study_plant()};
}

LoopConfig cglp_pid_case_study() { return make_cglp({}).loop; }

LoopConfig shaped_cglp_pid_case_study() {
    CgLpParams p;
    p.omega_r = 466.8 * pi;
    p.gamma = 0.4;
    return make_cglp(p, Lti(make_shaping_filter())).loop;
}

LoopConfig open_loop_example() {
    return LoopConfig{.c1 = Lti::tf({1.0 / (150 * pi), 0.0}, {1.0 / (3000 * pi), 1.0}),
                      .c2 = Lti::gain(1.0),
                      .c3 = Lti::tf({1.0}, {1.0 / (150 * pi), 1.0}),
                      .c4 = Lti::gain(1.0),
                      .cs = Lti::tf({1.0}, {1.0 / 5.0, 1.0}),
                      .cr = ResetController::from_tf(RationalTf({30 * pi}, {1.0, 0.0}), 0.0),
                      .plant = case_study_plant()};
}

LoopConfig closed_loop_example() {
    RationalTf c3 = times(RationalTf({45.0}, {1.0}), first_order(300 * pi, 30000 * pi));
    c3 = times(c3, RationalTf({1.0, 30 * pi}, {1.0, 0.0}));
    c3 = times(c3, first_order(130 * pi, 699 * pi));
    c3 = times(c3, first_order(0, 3000 * pi));
    return LoopConfig{.c1 = first_order(150 * pi, 3000 * pi),
                      .c2 = Lti::gain(1.0),
                      .c3 = c3,
                      .c4 = Lti::gain(1.0),
                      .cs = Lti::tf({1.0}, {1.0 / 100.0, 1.0}),
                      .cr = ResetController::from_tf(first_order(0, 300 * pi), 0.0),
                      .plant = case_study_plant()};
}

std::vector<std::string> preset_names() {
    return {"pid_case_study", "cglp_pid_case_study", "shaped_cglp_pid_case_study", "open_loop_example",
            "closed_loop_example"};
}

LoopConfig preset(const std::string& name) {
    if (name == "pid_case_study") return pid_case_study();
    if (name == "cglp_pid_case_study") return cglp_pid_case_study();
    if (name == "shaped_cglp_pid_case_study") return shaped_cglp_pid_case_study();
    if (name == "open_loop_example") return open_loop_example();
    if (name == "closed_loop_example") return closed_loop_example();
    throw SchemaError("preset: unknown name '" + name + "'");
}

Margins margins(const HosidfGrid& g) {
    if (g.omega.size() < 2 || g.orders.empty() || g.orders[0] != 1)
        throw std::invalid_argument("margins need a grid with at least two frequencies and the first harmonic");
    std::vector<size_t> cross;
    for (size_t i = 0; i + 1 < g.omega.size(); ++i) {
        const double a = std::abs(g.values[i][0]), b = std::abs(g.values[i + 1][0]);
        if ((a >= 1.0) != (b >= 1.0)) cross.push_back(i);
    }
    if (cross.size() != 1) {
        std::ostringstream os;
        os << "margins undefined: " << cross.size() << " 0 dB crossings found";
        for (size_t i : cross) os << " near " << rad_to_hz(g.omega[i]) << " Hz";
        throw NumericalError(os.str());
    }
    const size_t i = cross[0];
    const cplx la = g.values[i][0], lb = g.values[i + 1][0];
    const double ma = std::log10(std::abs(la)), mb = std::log10(std::abs(lb));
    const double wa = std::log10(g.omega[i]), wb = std::log10(g.omega[i + 1]);
    const double s = ma / (ma - mb);
    const double pa = wrapped_angle(la);
    double pb = wrapped_angle(lb);
    while (pb - pa > pi) pb -= 2 * pi;
    while (pb - pa < -pi) pb += 2 * pi;
    double pm = 180.0 + (pa + s * (pb - pa)) * 180.0 / pi;
    while (pm > 180.0) pm -= 360.0;
    while (pm <= -180.0) pm += 360.0;
    return {rad_to_hz(std::pow(10.0, wa + s * (wb - wa))), pm};
}

} // namespace hosidf
