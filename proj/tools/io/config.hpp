#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hosidf/hosidf.hpp"

namespace hosidf::io {

struct AnalysisConfig {
    LoopConfig system;
    std::string preset;
    double f_start_hz = 1.0;
    double f_stop_hz = 1000.0;
    int points = 200;
    int n_harmonics = 100;
    double hurwitz_eps = 0.0;
    std::vector<double> delta_grid = default_delta_grid();
    double eps_stab = 1e-9;
    int steps_per_period = 4096;
    int total_cycles = 54;
    int max_cycles = 2000;
    int settle_cycles = 50;
    int analysis_cycles = 4;
    double refractory_fraction = 1e-3;
    double settle_threshold = 1e-4;
    int workers = 1;
    std::vector<std::string> warnings;

    std::vector<double> omegas() const;
};

// base_dir resolves relative FRF paths; an empty base_dir forbids file references.
AnalysisConfig parse_config(const nlohmann::json& j, const std::optional<std::filesystem::path>& base_dir);
AnalysisConfig load_config(const std::filesystem::path& file);
AnalysisConfig preset_config(const std::string& name);

// Assumption-style checks on C1..C4 and Cs. Violations are warnings.
std::vector<std::string> hurwitz_warnings(const LoopConfig& sys, double eps);

SimConfig sim_config(const AnalysisConfig& cfg, InputKind kind, double amplitude, double freq_hz, double phase_rad);

InputKind parse_input_kind(const std::string& s); // reference | disturbance | open

} // namespace hosidf::io
