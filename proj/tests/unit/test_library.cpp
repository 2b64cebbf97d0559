#include <doctest.h>

#include "hosidf/error.hpp"
#include "hosidf/library.hpp"

using namespace hosidf;

namespace {

double phase_deg(cplx z) { return std::arg(z) * 180.0 / std::numbers::pi; }
double db(double x) { return 20.0 * std::log10(x); }

} // namespace

TEST_SUITE("library") {

TEST_CASE("pid phase lead peaks inside the lead interval") {
    const PidParams p;
    const RationalTf pid = make_pid(p);
    const double mid = std::sqrt(p.omega_d * p.omega_t);
    CHECK(phase_deg(pid.eval(mid)) > phase_deg(pid.eval(p.omega_d)));
    CHECK(phase_deg(pid.eval(mid)) > phase_deg(pid.eval(p.omega_t)));
    CHECK(std::abs(pid.eval(1e-3)) > 1e3);
}

TEST_CASE("fore and shaping filter") {
    const RationalTf f = make_fore(100.0);
    CHECK(std::abs(f.eval(100.0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    const RationalTf cs = make_shaping_filter();
    CHECK(std::abs(cs.eval(1e-6)) == doctest::Approx(1.0));
    CHECK(hurwitz_check(Lti(cs)));
    const double pi = std::numbers::pi;
    const cplx at_zero = cplx(1.0, 1.0) / cplx(1.0, 660.0 / 237.6);
    CHECK(std::abs(cs.eval(660.0 * pi) - at_zero) < 1e-12);
    CHECK(phase_deg(cs.eval(660.0 * pi)) == doctest::Approx(-25.2).epsilon(2e-3));
    CHECK(std::abs(cs.eval(1e9)) == doctest::Approx(0.36));
}

TEST_CASE("cglp mapping") {
    const CgLpFragment frag = make_cglp({});
    CHECK_FALSE(frag.mapping.empty());
    CHECK(frag.loop.c1.eval(10.0) == cplx(1.0));
    CHECK(frag.loop.c2.eval(10.0) == cplx(0.0));
    CHECK(frag.loop.c4.eval(10.0) == cplx(1.0));
    CHECK(frag.loop.cs.eval(10.0) == cplx(1.0));
    CHECK(frag.loop.cr.gamma == 0.0);
    const double w = 700.0;
    const cplx expect = RationalTf({1.0 / (270.0 * std::numbers::pi), 1.0}, {1.0}).eval(w) * make_pid({}).eval(w);
    CHECK(std::abs(frag.loop.c3.eval(w) - expect) < 1e-12 * std::abs(expect));
    CgLpParams lp;
    lp.lead_lowpass = true;
    CHECK(make_cglp(lp).loop.c3.eval(w) != frag.loop.c3.eval(w));
}

TEST_CASE("cglp first-harmonic gain stays flat") {
    const CgLpParams p;
    const CgLpFragment frag = make_cglp(p);
    const RationalTf lead({1.0 / p.omega_rc, 1.0}, {1.0});
    double lo = 1e9, hi = -1e9;
    for (double w : logspace(p.omega_r / 5.0, 5.0 * p.omega_rc, 60)) {
        const double g = db(std::abs(cr_hosidf(frag.loop, 1, w) * lead.eval(w)));
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    MESSAGE("gain band " << lo << " .. " << hi << " dB");
    CHECK(lo >= -3.0);
    CHECK(hi <= 3.0);
}

TEST_CASE("presets") {
    const auto names = preset_names();
    for (const char* n : {"pid_case_study", "cglp_pid_case_study", "shaped_cglp_pid_case_study", "open_loop_example",
                          "closed_loop_example"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    for (const auto& n : names) CHECK_NOTHROW(preset(n));
    CHECK_THROWS_AS(preset("nope"), SchemaError);
    CHECK(preset("pid_case_study").cr.gamma == 1.0);
    CHECK(preset("shaped_cglp_pid_case_study").cr.gamma == doctest::Approx(0.4));
}

TEST_CASE("shaping cuts the third harmonic at 100 Hz") {
    const double w = hz_to_rad(100.0);
    const double plain = std::abs(ln_hosidf(cglp_pid_case_study(), 3, w));
    const double shaped = std::abs(ln_hosidf(shaped_cglp_pid_case_study(), 3, w));
    CHECK(shaped / plain <= 0.002);
}

TEST_CASE("margins") {
    const auto w = logspace(hz_to_rad(10.0), hz_to_rad(1000.0), 400);
    const Margins m = margins(open_loop_grid(pid_case_study(), w, 1));
    CHECK(m.bandwidth_hz == doctest::Approx(120.0).epsilon(0.02));
    CHECK(m.phase_margin_deg == doctest::Approx(25.7).epsilon(0.02));

    HosidfGrid flat;
    flat.omega = {1.0, 2.0, 3.0};
    flat.orders = {1};
    flat.values = {{2.0}, {2.0}, {2.0}};
    CHECK_THROWS_AS(margins(flat), NumericalError);
}

}
