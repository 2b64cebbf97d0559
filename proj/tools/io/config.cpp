#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hosidf::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw SchemaError(path + ": " + msg); }

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) fail(path + "." + k, "unknown field");
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "must be a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path, int min) {
    if (!j.is_number_integer()) fail(path, "must be an integer");
    const auto v = j.get<long long>();
    if (v < min || v > 1'000'000'000) fail(path, "must be >= " + std::to_string(min));
    return static_cast<int>(v);
}

std::vector<double> numbers(const json& j, const std::string& path, bool nonempty = true) {
    if (!j.is_array()) fail(path, "must be an array of numbers");
    if (nonempty && j.empty()) fail(path, "must be a non-empty array");
    std::vector<double> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <class F>
auto rethrow_with_path(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        if (msg.rfind("blocks.", 0) == 0) throw;
        throw SchemaError(path + "." + msg);
    }
}

FrfTable parse_frd(const json& j, const std::string& path, const std::optional<std::filesystem::path>& base) {
    if (j.is_string()) {
        if (!base) fail(path, "file references are not accepted here; give the table inline");
        std::filesystem::path p = j.get<std::string>();
        if (p.is_relative()) p = *base / p;
        std::ifstream in(p);
        if (!in) fail(path, "cannot open '" + p.string() + "'");
        return rethrow_with_path(path, [&] { return read_frf_csv(in); });
    }
    only_keys(j, path, {"freq_hz", "re", "im"});
    for (const char* k : {"freq_hz", "re", "im"})
        if (!j.contains(k)) fail(path + "." + k, "missing");
    const auto f = numbers(j["freq_hz"], path + ".freq_hz");
    const auto re = numbers(j["re"], path + ".re");
    const auto im = numbers(j["im"], path + ".im");
    if (re.size() != f.size() || im.size() != f.size()) fail(path, "freq_hz, re and im must have equal length");
    std::vector<double> w;
    std::vector<cplx> h;
    for (size_t i = 0; i < f.size(); ++i) {
        w.push_back(hz_to_rad(f[i]));
        h.emplace_back(re[i], im[i]);
    }
    return rethrow_with_path(path, [&] { return FrfTable(w, h); });
}

StateSpace parse_ss(const json& j, const std::string& path) {
    for (const char* k : {"a", "b", "c", "d"})
        if (!j.contains(k)) fail(path + "." + k, "missing");
    const json& ja = j["a"];
    if (!ja.is_array() || ja.empty()) fail(path + ".a", "must be a non-empty array of rows");
    const auto n = static_cast<int>(ja.size());
    Eigen::MatrixXd a(n, n);
    for (int r = 0; r < n; ++r) {
        const auto row = numbers(ja[r], path + ".a[" + std::to_string(r) + "]");
        if (static_cast<int>(row.size()) != n) fail(path + ".a", "must be square");
        for (int c = 0; c < n; ++c) a(r, c) = row[c];
    }
    const auto b = numbers(j["b"], path + ".b"), c = numbers(j["c"], path + ".c");
    if (static_cast<int>(b.size()) != n || static_cast<int>(c.size()) != n) fail(path, "b and c must match a");
    return rethrow_with_path(path, [&] {
        return StateSpace(a, Eigen::Map<const Eigen::VectorXd>(b.data(), n),
                          Eigen::Map<const Eigen::RowVectorXd>(c.data(), n), number(j["d"], path + ".d"));
    });
}

Lti parse_block(const json& j, const std::string& path, const std::optional<std::filesystem::path>& base) {
    if (j.is_number()) return Lti::gain(j.get<double>());
    if (!j.is_object()) fail(path, "must be a number or an object");
    if (j.contains("gain")) {
        only_keys(j, path, {"gain"});
        return Lti::gain(number(j["gain"], path + ".gain"));
    }
    if (j.contains("frd")) {
        only_keys(j, path, {"frd"});
        return parse_frd(j["frd"], path + ".frd", base);
    }
    if (j.contains("a")) {
        only_keys(j, path, {"a", "b", "c", "d"});
        return parse_ss(j, path);
    }
    only_keys(j, path, {"num", "den"});
    if (!j.contains("num")) fail(path + ".num", "missing");
    if (!j.contains("den")) fail(path + ".den", "missing");
    const auto num = numbers(j["num"], path + ".num"), den = numbers(j["den"], path + ".den");
    return rethrow_with_path(path, [&] { return Lti(RationalTf(num, den)); });
}

ResetController parse_cr(const json& j, const std::string& path, const std::optional<ResetController>& fallback) {
    only_keys(j, path, {"num", "den", "a", "b", "c", "d", "gamma"});
    double gamma = fallback ? fallback->gamma : 0.0;
    if (j.contains("gamma")) gamma = number(j["gamma"], path + ".gamma");
    else if (!fallback) fail(path + ".gamma", "missing");
    std::optional<StateSpace> base;
    if (j.contains("a")) {
        base = parse_ss(j, path);
    } else if (j.contains("num") || j.contains("den")) {
        if (!j.contains("num")) fail(path + ".num", "missing");
        if (!j.contains("den")) fail(path + ".den", "missing");
        const auto num = numbers(j["num"], path + ".num"), den = numbers(j["den"], path + ".den");
        base = rethrow_with_path(path, [&] { return to_state_space(RationalTf(num, den)); });
    } else if (fallback) {
        base = fallback->base;
    } else {
        fail(path, "needs num/den (or a/b/c/d)");
    }
    return rethrow_with_path(path, [&] { return ResetController(*base, gamma); });
}

} // namespace

std::vector<double> AnalysisConfig::omegas() const {
    std::vector<double> w;
    for (double f : logspace(f_start_hz, f_stop_hz, points)) w.push_back(hz_to_rad(f));
    return w;
}

std::vector<std::string> hurwitz_warnings(const LoopConfig& sys, double eps) {
    std::vector<std::string> out;
    const std::pair<const char*, const Lti*> blocks[] = {
        {"c1", &sys.c1}, {"c2", &sys.c2}, {"c3", &sys.c3}, {"c4", &sys.c4}, {"cs", &sys.cs}};
    for (const auto& [name, b] : blocks) {
        if (b->is_frf()) continue;
        if (!hurwitz_check(*b, eps)) out.push_back(std::string(name) + " is not strictly Hurwitz");
    }
    return out;
}

AnalysisConfig parse_config(const json& j, const std::optional<std::filesystem::path>& base_dir) {
    only_keys(j, "config",
              {"preset", "blocks", "frequency", "n_harmonics", "hurwitz_eps", "stability", "simulation", "workers"});
    AnalysisConfig cfg{.system = pid_case_study()};
    std::optional<LoopConfig> pre;
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) fail("preset", "must be a string");
        cfg.preset = j["preset"].get<std::string>();
        pre = preset(cfg.preset);
    }
    const json blocks = j.value("blocks", json::object());
    only_keys(blocks, "blocks", {"c1", "c2", "c3", "c4", "cs", "cr", "plant"});
    if (!pre) {
        if (!blocks.contains("cr")) fail("blocks.cr", "missing (or give a preset)");
        if (!blocks.contains("plant")) fail("blocks.plant", "missing (or give a preset)");
    }
    auto block = [&](const char* name, const Lti& dflt) {
        return blocks.contains(name) ? parse_block(blocks[name], std::string("blocks.") + name, base_dir) : dflt;
    };
    const LoopConfig defaults = pre ? *pre : LoopConfig{.cr = pid_case_study().cr, .plant = Lti::gain(1.0)};
    cfg.system = LoopConfig{.c1 = block("c1", defaults.c1),
                            .c2 = block("c2", defaults.c2),
                            .c3 = block("c3", defaults.c3),
                            .c4 = block("c4", defaults.c4),
                            .cs = block("cs", defaults.cs),
                            .cr = blocks.contains("cr")
                                      ? parse_cr(blocks["cr"], "blocks.cr",
                                                 pre ? std::optional<ResetController>(pre->cr) : std::nullopt)
                                      : defaults.cr,
                            .plant = block("plant", defaults.plant)};

    if (j.contains("frequency")) {
        const json& f = j["frequency"];
        only_keys(f, "frequency", {"start_hz", "stop_hz", "points"});
        if (f.contains("start_hz")) cfg.f_start_hz = number(f["start_hz"], "frequency.start_hz");
        if (f.contains("stop_hz")) cfg.f_stop_hz = number(f["stop_hz"], "frequency.stop_hz");
        if (f.contains("points")) cfg.points = integer(f["points"], "frequency.points", 1);
    }
    if (!(cfg.f_start_hz > 0.0)) fail("frequency.start_hz", "must be positive");
    if (!(cfg.f_stop_hz >= cfg.f_start_hz)) fail("frequency.stop_hz", "must be >= start_hz");
    if (j.contains("n_harmonics")) cfg.n_harmonics = integer(j["n_harmonics"], "n_harmonics", 1);
    if (j.contains("hurwitz_eps")) cfg.hurwitz_eps = number(j["hurwitz_eps"], "hurwitz_eps");
    if (j.contains("workers")) cfg.workers = integer(j["workers"], "workers", 1);
    if (j.contains("stability")) {
        const json& s = j["stability"];
        only_keys(s, "stability", {"delta_min", "delta_max", "points", "eps"});
        const double lo = s.contains("delta_min") ? number(s["delta_min"], "stability.delta_min") : 1e-4;
        const double hi = s.contains("delta_max") ? number(s["delta_max"], "stability.delta_max") : 1e3;
        const int n = s.contains("points") ? integer(s["points"], "stability.points", 1) : 400;
        if (!(lo > 0.0) || !(hi >= lo)) fail("stability", "need 0 < delta_min <= delta_max");
        cfg.delta_grid = logspace(lo, hi, n);
        if (s.contains("eps")) cfg.eps_stab = number(s["eps"], "stability.eps");
    }
    if (j.contains("simulation")) {
        const json& s = j["simulation"];
        only_keys(s, "simulation",
                  {"steps_per_period", "total_cycles", "settle_cycles", "analysis_cycles", "max_cycles", "refractory", "threshold"});
        if (s.contains("steps_per_period")) cfg.steps_per_period = integer(s["steps_per_period"], "simulation.steps_per_period", 8);
        if (s.contains("total_cycles")) cfg.total_cycles = integer(s["total_cycles"], "simulation.total_cycles", 3);
        if (s.contains("settle_cycles")) cfg.settle_cycles = integer(s["settle_cycles"], "simulation.settle_cycles", 1);
        if (s.contains("analysis_cycles")) cfg.analysis_cycles = integer(s["analysis_cycles"], "simulation.analysis_cycles", 2);
        if (s.contains("max_cycles")) cfg.max_cycles = integer(s["max_cycles"], "simulation.max_cycles", 0);
        if (s.contains("refractory")) cfg.refractory_fraction = number(s["refractory"], "simulation.refractory");
        if (s.contains("threshold")) cfg.settle_threshold = number(s["threshold"], "simulation.threshold");
        if (cfg.total_cycles < cfg.settle_cycles + cfg.analysis_cycles)
            fail("simulation.total_cycles", "must be >= settle_cycles + analysis_cycles");
        if (cfg.refractory_fraction < 0.0) fail("simulation.refractory", "must be >= 0");
    }
    cfg.warnings = hurwitz_warnings(cfg.system, cfg.hurwitz_eps);
    return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("config: cannot open '" + file.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j, file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
}

AnalysisConfig preset_config(const std::string& name) { return parse_config(json{{"preset", name}}, std::nullopt); }

SimConfig sim_config(const AnalysisConfig& cfg, InputKind kind, double amplitude, double freq_hz, double phase_rad) {
    SimConfig s{.system = cfg.system};
    s.input = kind;
    s.amplitude = amplitude;
    s.freq_hz = freq_hz;
    s.phase = phase_rad;
    s.steps_per_period = cfg.steps_per_period;
    s.total_cycles = cfg.total_cycles;
    s.settle_cycles = cfg.settle_cycles;
    s.analysis_cycles = cfg.analysis_cycles;
    s.max_cycles = cfg.max_cycles;
    s.refractory_fraction = cfg.refractory_fraction;
    s.settle_threshold = cfg.settle_threshold;
    return s;
}

InputKind parse_input_kind(const std::string& s) {
    if (s == "reference" || s == "r") return InputKind::reference;
    if (s == "disturbance" || s == "d") return InputKind::disturbance;
    if (s == "open" || s == "open_loop" || s == "e") return InputKind::open_loop;
    throw std::invalid_argument("unknown input kind '" + s + "' (valid: reference, disturbance, open)");
}

} // namespace hosidf::io
