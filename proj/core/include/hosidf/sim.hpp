#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hosidf/open_loop.hpp"

namespace hosidf {

enum class InputKind { reference, disturbance, open_loop };

struct SimConfig {
    LoopConfig system;
    InputKind input = InputKind::reference;
    double amplitude = 1.0;
    double freq_hz = 1.0;
    double phase = 0.0; // rad, input = amplitude * sin(2 pi f t + phase)
    int steps_per_period = 4096;
    int total_cycles = 54;
    int settle_cycles = 50;
    int analysis_cycles = 4;
    // Past total_cycles, keep adding periods until the window settles or this
    // cap is reached. Not applied when record_all is set.
    int max_cycles = 2000;
    double refractory_fraction = 1e-3; // of one input period
    double settle_threshold = 1e-4;
    double overflow_bound = 1e12;
    bool record_all = false; // otherwise only the analysis window is kept
};

struct ResetJump {
    double t = 0;
    Eigen::VectorXd x_minus;
    Eigen::VectorXd x_plus;
};

struct SimTrace {
    double omega = 0;
    double dt = 0;
    int samples_per_period = 0;
    double settle_threshold = 1e-4;
    bool effective_resets = true; // false when gamma == 1
    int reset_state = 0;          // index of the reset state in the stacked vector

    std::vector<double> t, e, z, zs, v, u, y;
    std::vector<std::uint8_t> reset_flag;
    std::vector<double> resets; // accepted z_s crossings, including the ones before the record
    std::vector<ResetJump> jumps;

    size_t window_begin = 0; // into the sample vectors
    size_t window_end = 0;
    int window_periods = 0;
};

// Exact propagation of the piecewise-linear interconnection between resets,
// with bisection localisation of z_s sign changes.
SimTrace simulate(const SimConfig& cfg);

// Flow of the stacked state over dt with no reset, in the coordinates of SimTrace::jumps.
// The first two states are the input oscillator.
Eigen::VectorXd propagate_flow(const SimConfig& cfg, const Eigen::VectorXd& x, double dt);

struct SteadyWindow {
    size_t begin = 0;
    size_t end = 0;
    double metric = 0; // last period vs the one before, relative to the peak
};

SteadyWindow steady_state_window(const SimTrace& trace, int periods);

// Resets in the steady-state window divided by the number of periods in it.
double resets_per_cycle(const SimTrace& trace);

std::vector<double> window_slice(const SimTrace& trace, const std::vector<double>& signal);

// max |sim - prediction| / max |sim| over equally sized windows.
double prediction_error(const std::vector<double>& simulated, const std::vector<double>& predicted);

struct ScanPoint {
    double freq_hz = 0;
    double resets_per_cycle = 0;
    std::string error;
};

struct ScanReport {
    std::vector<ScanPoint> points;
    std::vector<std::pair<double, double>> intervals; // Hz, where resets per cycle > 2
};

using ScanProgress = std::function<void(const ScanPoint&)>;

ScanReport multiple_reset_scan(const SimConfig& base, double f_start, double f_end, double step, int workers = 1,
                               const ScanProgress& progress = {});

std::vector<double> scan_frequencies(double f_start, double f_end, double step);

} // namespace hosidf
