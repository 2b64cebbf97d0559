#pragma once

#include <cstddef>
#include <string>

namespace httplib {
class Server;
}

namespace hosidf::api {

struct ServiceOptions {
    std::size_t max_body_bytes = 4u << 20;
    std::size_t max_grid_cells = 2'000'000;   // frequencies x harmonics
    std::size_t max_scan_points = 20'000;
    long long max_sim_samples = 5'000'000;    // recorded trace rows
    std::size_t max_trace_rows = 4096;        // after decimation
    int workers = 1;
    std::string cors_origin = "*";
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

// Stateless request handler; the HTTP layer only forwards to it.
class Service {
public:
    explicit Service(ServiceOptions opt = {}) : opt_(std::move(opt)) {}

    Response handle(const std::string& path, const std::string& body) const;
    void mount(httplib::Server& srv) const;
    const ServiceOptions& options() const { return opt_; }

private:
    ServiceOptions opt_;
};

} // namespace hosidf::api
