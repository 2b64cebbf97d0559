#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hosidf/open_loop.hpp"

namespace hosidf {

// k_p (1 + w_i/s) (s/w_d + 1)/(s/w_t + 1) 1/(s/w_f + 1)
struct PidParams {
    double kp = 35.7;
    double omega_i = 24.0 * std::numbers::pi;
    double omega_d = 120.0 * std::numbers::pi;
    double omega_t = 480.0 * std::numbers::pi;
    double omega_f = 2400.0 * std::numbers::pi;
};

struct CgLpParams {
    double omega_r = 244.8 * std::numbers::pi;
    // Lead corner. 270*pi reproduces the reported margins and harmonic levels;
    // see README for why not 216*pi.
    double omega_rc = 270.0 * std::numbers::pi;
    double gamma = 0.0;
    // Give the lead its own (s/w_f + 1) pole instead of a pure zero.
    bool lead_lowpass = false;
    PidParams pid;
};

RationalTf make_pid(const PidParams& p);
RationalTf make_fore(double omega_r);
RationalTf make_shaping_filter();
RationalTf case_study_plant();

struct CgLpFragment {
    LoopConfig loop;
    std::string mapping;
};

// FORE(w_r, gamma) as C_r; lead and PID in series as C_3; C_1 = C_4 = 1, C_2 = 0.
CgLpFragment make_cglp(const CgLpParams& p, const std::optional<Lti>& shaping = std::nullopt);

// PID alone on the case-study plant, with an inert reset element.
LoopConfig pid_case_study();
LoopConfig cglp_pid_case_study();
LoopConfig shaped_cglp_pid_case_study();

// Open-loop illustrative system used for the open-loop validation.
LoopConfig open_loop_example();
// Closed-loop illustrative system used for the closed-loop validation.
LoopConfig closed_loop_example();

std::vector<std::string> preset_names();
LoopConfig preset(const std::string& name);

struct Margins {
    double bandwidth_hz = 0;
    double phase_margin_deg = 0;
};

// From the first-order column of an open-loop grid.
Margins margins(const HosidfGrid& l1_grid);

} // namespace hosidf
