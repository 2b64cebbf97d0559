#pragma once

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace hosidf::io {

// Shared by the CLI and the HTTP service so both produce the same numbers.

struct OpenLoopRun {
    Table table;
    StabilityReport stability;
    std::vector<std::string> warnings;
};

OpenLoopRun run_open_loop(const AnalysisConfig& cfg, OpenLoopFunction fn);

struct ClosedLoopRun {
    Table table;
    std::vector<std::pair<double, std::string>> excluded; // Hz, reason
    std::vector<std::string> warnings;
};

ClosedLoopRun run_closed_loop(const AnalysisConfig& cfg, Sensitivity fn);

struct ScanRun {
    ScanReport report;
    std::string message;
};

ScanRun run_scan(const AnalysisConfig& cfg, double f_start, double f_end, double step, InputKind kind,
                 const ScanProgress& progress = {});
std::string scan_message(const ScanReport& rep);

struct SignalCheck {
    std::string name;
    double simulated_peak = 0;
    double predicted_peak = 0;
    double error = 0; // pointwise, relative to the simulated peak
};

struct SimulateRun {
    SimTrace trace;
    double resets_per_cycle = 0;
    double settle_metric = 0;
    std::vector<SignalCheck> checks;
};

struct InputSpec {
    InputKind kind = InputKind::reference;
    double amplitude = 1.0;
    double freq_hz = 0.0;
    double phase_rad = 0.0;
};

SimulateRun run_simulate(const AnalysisConfig& cfg, const InputSpec& in, bool record_all);

nlohmann::json to_json(const StabilityReport& s);
nlohmann::json to_json(const ScanRun& s);
nlohmann::json summary_json(const SimulateRun& s);

} // namespace hosidf::io
