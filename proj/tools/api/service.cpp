#include "service.hpp"

#include <cmath>
#include <memory>

// Eigen first: httplib pulls in <resolv.h>, whose _res macro clashes with Eigen.
#include "runners.hpp"

#include <httplib.h>

namespace hosidf::api {

using nlohmann::json;
using namespace hosidf::io;

namespace {

// Client-side problem with the request size.
struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Response problem(int status, const std::string& title, const std::string& detail,
                 const std::vector<double>& omegas = {}) {
    json j{{"type", "about:blank"}, {"title", title}, {"status", status}, {"detail", detail}};
    if (!omegas.empty()) {
        json f = json::array();
        for (double w : omegas) f.push_back(round12(rad_to_hz(w)));
        j["frequencies_hz"] = f;
    }
    return {status, j.dump(), "application/problem+json"};
}

json parse_body(const std::string& body) {
    if (body.empty()) throw SchemaError("request body is empty");
    try {
        json j = json::parse(body);
        if (!j.is_object()) throw SchemaError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
}

AnalysisConfig request_config(const json& req, const ServiceOptions& opt) {
    if (!req.contains("config")) throw SchemaError("config: missing");
    AnalysisConfig cfg = parse_config(req["config"], std::nullopt);
    cfg.workers = std::min(cfg.workers, opt.workers);
    return cfg;
}

std::string str_field(const json& req, const char* key, const std::string& dflt) {
    if (!req.contains(key)) return dflt;
    if (!req[key].is_string()) throw SchemaError(std::string(key) + ": must be a string");
    return req[key].get<std::string>();
}

double num_field(const json& req, const char* key, std::optional<double> dflt) {
    if (!req.contains(key)) {
        if (!dflt) throw SchemaError(std::string(key) + ": missing");
        return *dflt;
    }
    if (!req[key].is_number()) throw SchemaError(std::string(key) + ": must be a number");
    return req[key].get<double>();
}

json with_warnings(json j, const std::vector<std::string>& warnings) {
    j["warnings"] = warnings;
    return j;
}

void check_grid(const AnalysisConfig& cfg, const ServiceOptions& opt) {
    if (static_cast<std::size_t>(cfg.points) * static_cast<std::size_t>(cfg.n_harmonics) > opt.max_grid_cells)
        throw TooLarge("grid of " + std::to_string(cfg.points) + " x " + std::to_string(cfg.n_harmonics) +
                       " cells exceeds the limit of " + std::to_string(opt.max_grid_cells));
}

json open_loop(const json& req, const ServiceOptions& opt) {
    const AnalysisConfig cfg = request_config(req, opt);
    check_grid(cfg, opt);
    const std::string fn = str_field(req, "function", "ln");
    if (fn != "ln" && fn != "cr") throw SchemaError("function: must be 'ln' or 'cr'");
    const auto r = run_open_loop(cfg, fn == "cr" ? OpenLoopFunction::cr : OpenLoopFunction::ln);
    json j = to_json(r.table);
    j["function"] = fn;
    j["stability"] = to_json(r.stability);
    return with_warnings(std::move(j), r.warnings);
}

json closed_loop(const json& req, const ServiceOptions& opt) {
    const AnalysisConfig cfg = request_config(req, opt);
    check_grid(cfg, opt);
    Sensitivity fn;
    try {
        fn = parse_sensitivity(str_field(req, "selector", "sn"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("selector: ") + e.what());
    }
    const auto r = run_closed_loop(cfg, fn);
    json j = to_json(r.table);
    j["selector"] = sensitivity_name(fn);
    json ex = json::array();
    for (const auto& [f, why] : r.excluded) ex.push_back({{"freq_hz", round12(f)}, {"reason", why}});
    j["excluded"] = ex;
    return with_warnings(std::move(j), r.warnings);
}

struct ScanArgs {
    AnalysisConfig cfg;
    double start, stop, step;
    InputKind kind;
};

ScanArgs scan_args(const json& req, const ServiceOptions& opt) {
    ScanArgs a{request_config(req, opt), num_field(req, "start_hz", 1.0), num_field(req, "stop_hz", 1000.0),
               num_field(req, "step_hz", 1.0), InputKind::reference};
    try {
        a.kind = parse_input_kind(str_field(req, "input", "reference"));
        const auto n = scan_frequencies(a.start, a.stop, a.step).size();
        if (n > opt.max_scan_points)
            throw TooLarge("scan of " + std::to_string(n) + " frequencies exceeds the limit of " +
                           std::to_string(opt.max_scan_points));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
    }
    return a;
}

json scan(const json& req, const ServiceOptions& opt) {
    const ScanArgs a = scan_args(req, opt);
    return to_json(run_scan(a.cfg, a.start, a.stop, a.step, a.kind));
}

json simulate(const json& req, const ServiceOptions& opt) {
    const AnalysisConfig cfg = request_config(req, opt);
    if (!req.contains("input") || !req["input"].is_object()) throw SchemaError("input: missing or not an object");
    const json& in = req["input"];
    InputSpec spec;
    try {
        spec.kind = parse_input_kind(str_field(in, "kind", "reference"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("input.kind: ") + e.what());
    }
    spec.amplitude = num_field(in, "amplitude", 1.0);
    spec.freq_hz = num_field(in, "freq_hz", std::nullopt);
    spec.phase_rad = num_field(in, "phase_deg", 0.0) * std::numbers::pi / 180.0;
    if (!(spec.freq_hz > 0.0)) throw SchemaError("input.freq_hz: must be positive");
    const bool full = req.value("full", false);
    const long long rows = static_cast<long long>(cfg.steps_per_period) * (full ? cfg.total_cycles : cfg.analysis_cycles);
    if (rows > opt.max_sim_samples) throw TooLarge("trace of " + std::to_string(rows) + " samples exceeds the limit");
    const auto r = run_simulate(cfg, spec, full);
    const std::size_t stride = std::max<std::size_t>(1, (r.trace.t.size() + opt.max_trace_rows - 1) / opt.max_trace_rows);
    json j = to_json(trace_table(r.trace, stride));
    j["stride"] = stride;
    j["summary"] = summary_json(r);
    return with_warnings(std::move(j), cfg.warnings);
}

Response dispatch(const std::string& path, const json& req, const ServiceOptions& opt) {
    if (path == "/analyze/open-loop") return {200, open_loop(req, opt).dump()};
    if (path == "/analyze/closed-loop") return {200, closed_loop(req, opt).dump()};
    if (path == "/analyze/scan") return {200, scan(req, opt).dump()};
    if (path == "/analyze/simulate") return {200, simulate(req, opt).dump()};
    return problem(404, "Not Found", "unknown endpoint " + path);
}

} // namespace

Response Service::handle(const std::string& path, const std::string& body) const {
    if (body.size() > opt_.max_body_bytes) return problem(413, "Payload Too Large", "request body exceeds the limit");
    try {
        return dispatch(path, parse_body(body), opt_);
    } catch (const TooLarge& e) {
        return problem(413, "Payload Too Large", e.what());
    } catch (const SchemaError& e) {
        return problem(400, "Invalid Request", e.what());
    } catch (const NumericalError& e) {
        return problem(422, "Numerical Failure", e.what(), e.omegas());
    } catch (const std::invalid_argument& e) {
        return problem(400, "Invalid Request", e.what());
    } catch (const json::exception& e) {
        return problem(400, "Invalid Request", e.what());
    } catch (const std::exception& e) {
        return problem(500, "Internal Error", e.what());
    }
}

void Service::mount(httplib::Server& srv) const {
    srv.set_payload_max_length(opt_.max_body_bytes);
    const std::string origin = opt_.cors_origin;
    srv.set_default_headers({{"Access-Control-Allow-Origin", origin},
                             {"Access-Control-Allow-Methods", "POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    srv.Options(R"(/analyze/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    for (const char* path : {"/analyze/open-loop", "/analyze/closed-loop", "/analyze/simulate"}) {
        srv.Post(path, [this](const httplib::Request& req, httplib::Response& res) {
            const Response r = handle(req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        });
    }

    // Scans may stream NDJSON progress (one line per frequency, then the result).
    srv.Post("/analyze/scan", [this](const httplib::Request& req, httplib::Response& res) {
        bool stream = false;
        try {
            const json j = json::parse(req.body);
            stream = j.is_object() && j.value("stream", false);
        } catch (const std::exception&) {
        }
        if (!stream) {
            const Response r = handle(req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
            return;
        }
        std::shared_ptr<ScanArgs> args;
        try {
            args = std::make_shared<ScanArgs>(scan_args(parse_body(req.body), opt_));
        } catch (const std::exception&) {
            const Response r = handle(req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
            return;
        }
        res.set_chunked_content_provider("application/x-ndjson", [args](size_t, httplib::DataSink& sink) {
            auto progress = [&sink](const ScanPoint& p) {
                json line{{"freq_hz", round12(p.freq_hz)}, {"resets_per_cycle", round12(p.resets_per_cycle)}};
                if (!p.error.empty()) line["error"] = p.error;
                const std::string s = line.dump() + "\n";
                sink.write(s.data(), s.size());
            };
            json result;
            try {
                result = {{"result", to_json(run_scan(args->cfg, args->start, args->stop, args->step, args->kind,
                                                      progress))}};
            } catch (const std::exception& e) {
                result = {{"error", e.what()}};
            }
            const std::string s = result.dump() + "\n";
            sink.write(s.data(), s.size());
            sink.done();
            return true;
        });
    });
}

} // namespace hosidf::api
