#include <doctest.h>

#include <fstream>
#include <thread>

#include "runners.hpp"
#include "service.hpp"
// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

using namespace hosidf;
using namespace hosidf::io;
using nlohmann::json;

namespace {

const std::filesystem::path kData = HOSIDF_TEST_DATA;

json closed_loop_request() {
    std::ifstream in(kData / "closed_loop_example.json");
    return {{"config", json::parse(in)}, {"selector", "sn"}};
}

std::vector<std::vector<double>> rows_of(const json& j) {
    std::vector<std::vector<double>> out;
    for (const auto& r : j["rows"]) out.push_back(r.get<std::vector<double>>());
    return out;
}

} // namespace

TEST_SUITE("api") {

TEST_CASE("closed-loop payload equals the shared table") {
    const api::Service svc;
    const api::Response r = svc.handle("/analyze/closed-loop", closed_loop_request().dump());
    REQUIRE(r.status == 200);
    const json j = json::parse(r.body);
    const Table ref = run_closed_loop(load_config(kData / "closed_loop_example.json"), Sensitivity::s).table;
    CHECK(j["columns"].get<std::vector<std::string>>() == ref.columns);
    CHECK(rows_of(j) == ref.rows);
    CHECK(j["selector"] == "sn");
    CHECK(j["excluded"].empty());
}

TEST_CASE("stateless") {
    const api::Service svc;
    const std::string body = closed_loop_request().dump();
    CHECK(svc.handle("/analyze/closed-loop", body).body == svc.handle("/analyze/closed-loop", body).body);
}

TEST_CASE("open-loop payload") {
    const api::Service svc;
    const json req{{"config", {{"preset", "cglp_pid_case_study"}, {"frequency", {{"points", 5}}}, {"n_harmonics", 3}}},
                   {"function", "cr"}};
    const api::Response r = svc.handle("/analyze/open-loop", req.dump());
    REQUIRE(r.status == 200);
    const json j = json::parse(r.body);
    CHECK(j["rows"].size() == 15);
    CHECK(j["stability"]["stable"] == true);
    CHECK(j["function"] == "cr");
}

TEST_CASE("error mapping") {
    const api::Service svc({.max_body_bytes = 4096, .max_grid_cells = 1000});
    auto status = [&](const std::string& path, const std::string& body) { return svc.handle(path, body).status; };
    CHECK(status("/analyze/closed-loop", "") == 400);
    CHECK(status("/analyze/closed-loop", "{nope") == 400);
    CHECK(status("/analyze/closed-loop", R"({"config": {"preset": "closed_loop_example", "x": 1}})") == 400);
    CHECK(status("/analyze/closed-loop", R"({"config": {"preset": "closed_loop_example", "n_harmonics": 2}, "selector": "qq"})") == 400);
    CHECK(status("/analyze/nothing", "{}") == 404);
    CHECK(status("/analyze/closed-loop", std::string(5000, ' ')) == 413);
    CHECK(status("/analyze/closed-loop", R"({"config": {"preset": "closed_loop_example"}})") == 413);
    CHECK(status("/analyze/simulate", R"({"config": {"preset": "closed_loop_example"}})") == 400);
    // File references are not allowed over the wire.
    CHECK(status("/analyze/open-loop",
                  R"({"config": {"preset": "closed_loop_example", "blocks": {"plant": {"frd": "/etc/passwd"}}}})") ==
          400);

    const api::Response bad = svc.handle("/analyze/open-loop", R"({"config": {"preset": "closed_loop_example",
        "frequency": {"start_hz": 1, "stop_hz": 50, "points": 5}, "n_harmonics": 2,
        "blocks": {"plant": {"frd": {"freq_hz": [1, 100], "re": [1, 0.5], "im": [0, -0.5]}}}}})");
    CHECK(bad.status == 422);
    CHECK(bad.content_type == "application/problem+json");
    const json p = json::parse(bad.body);
    CHECK(p["status"] == 422);
    CHECK(!p["frequencies_hz"].empty());
}

TEST_CASE("scan and simulate payloads") {
    const api::Service svc;
    const json scan{{"config", {{"preset", "closed_loop_example"}}}, {"start_hz", 100}, {"stop_hz", 300}, {"step_hz", 100}};
    const api::Response s = svc.handle("/analyze/scan", scan.dump());
    REQUIRE(s.status == 200);
    const json sj = json::parse(s.body);
    CHECK(sj["intervals_hz"].empty());
    CHECK(sj["message"] == "There is No Multiple-Reset Region");
    CHECK(sj["points"].size() == 3);

    const json sim{{"config", {{"preset", "closed_loop_example"}, {"n_harmonics", 20}}},
                   {"input", {{"kind", "reference"}, {"freq_hz", 200}}}};
    const api::Response r = svc.handle("/analyze/simulate", sim.dump());
    REQUIRE(r.status == 200);
    const json j = json::parse(r.body);
    CHECK(j["columns"].size() == 8);
    CHECK(j["rows"].size() <= 4096);
    CHECK(j["summary"]["resets_per_cycle"] == 2.0);
}

TEST_CASE("http server with cors and streaming") {
    const api::Service svc;
    httplib::Server srv;
    svc.mount(srv);
    const int port = srv.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(120, 0);
    const std::string body = closed_loop_request().dump();
    auto res = cli.Post("/analyze/closed-loop", body, "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(res->body == svc.handle("/analyze/closed-loop", body).body);

    auto opt = cli.Options("/analyze/scan");
    REQUIRE(opt);
    CHECK(opt->status == 204);
    CHECK(opt->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

    const json scan{{"config", {{"preset", "closed_loop_example"}}}, {"start_hz", 100}, {"stop_hz", 400},
                    {"step_hz", 100}, {"stream", true}};
    auto st = cli.Post("/analyze/scan", scan.dump(), "application/json");
    REQUIRE(st);
    CHECK(st->status == 200);
    std::vector<json> lines;
    std::istringstream in(st->body);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) lines.push_back(json::parse(l));
    REQUIRE(lines.size() == 5);
    for (size_t i = 0; i < 4; ++i) CHECK(lines[i].contains("resets_per_cycle"));
    CHECK(lines[4]["result"]["intervals_hz"].empty());

    auto bad = cli.Post("/analyze/closed-loop", "{}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(bad->get_header_value("Content-Type") == "application/problem+json");

    srv.stop();
    th.join();
}

}
