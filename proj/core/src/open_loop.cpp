#include "hosidf/open_loop.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "hosidf/error.hpp"

namespace hosidf {

std::vector<int> odd_orders(int n_harmonics) {
    if (n_harmonics < 1) throw std::invalid_argument("number of harmonics must be >= 1");
    std::vector<int> out;
    for (int k = 0; k < n_harmonics; ++k) out.push_back(2 * k + 1);
    return out;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first;
    std::mutex mu;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first) first = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

OpenLoopPoint::OpenLoopPoint(const LoopConfig& cfg, double omega)
    : cfg_(&cfg), omega_(omega), kernel_(cfg.cr, omega, cfg.cs.eval(omega)), c1_(cfg.c1.eval(omega)) {}

cplx OpenLoopPoint::cr(int n) const {
    if (n < 1) throw std::invalid_argument("harmonic order must be positive");
    if (n % 2 == 0) return 0.0;
    if (n == 1) return kernel_.base(omega_) + kernel_.c_rho(1);
    return kernel_.c_rho(n);
}

cplx OpenLoopPoint::ln(int n) const {
    if (n < 1) throw std::invalid_argument("harmonic order must be positive");
    if (n % 2 == 0) return 0.0;
    const auto& c = *cfg_;
    if (n == 1) return c1_ * (cr(1) + c.c2.eval(omega_)) * c.c3.eval(omega_) * c.plant.eval(omega_);
    const double nw = n * omega_;
    return c1_ * std::polar(1.0, (n - 1) * wrapped_angle(c1_)) * kernel_.c_rho(n) * c.c3.eval(nw) *
           c.plant.eval(nw);
}

cplx cr_hosidf(const LoopConfig& cfg, int n, double omega) { return OpenLoopPoint(cfg, omega).cr(n); }
cplx ln_hosidf(const LoopConfig& cfg, int n, double omega) { return OpenLoopPoint(cfg, omega).ln(n); }

HosidfGrid open_loop_grid(const LoopConfig& cfg, const std::vector<double>& omegas, int n_harmonics,
                          OpenLoopFunction fn, int workers) {
    HosidfGrid g;
    g.omega = omegas;
    g.orders = odd_orders(n_harmonics);
    g.values.assign(omegas.size(), std::vector<cplx>(g.orders.size()));
    for (size_t i = 0; i < omegas.size(); ++i) {
        if (!(omegas[i] > 0.0)) throw std::invalid_argument("grid frequencies must be positive");
        if (i > 0 && omegas[i] < omegas[i - 1]) throw std::invalid_argument("grid frequencies must be sorted");
    }
    std::vector<std::string> errors(omegas.size());
    parallel_for(static_cast<int>(omegas.size()), workers, [&](int i) {
        try {
            OpenLoopPoint p(cfg, omegas[i]);
            for (size_t k = 0; k < g.orders.size(); ++k)
                g.values[i][k] = fn == OpenLoopFunction::cr ? p.cr(g.orders[k]) : p.ln(g.orders[k]);
        } catch (const NumericalError& e) {
            errors[i] = e.what();
        }
    });
    std::vector<double> bad;
    std::ostringstream os;
    for (size_t i = 0; i < errors.size(); ++i) {
        if (errors[i].empty()) continue;
        if (bad.empty()) os << "open-loop grid failed at";
        os << " [" << i << "] " << rad_to_hz(omegas[i]) << " Hz: " << errors[i] << ";";
        bad.push_back(omegas[i]);
    }
    if (!bad.empty()) throw NumericalError(os.str(), bad);
    return g;
}

std::vector<double> reconstruct_open_loop_output(const LoopConfig& cfg, double amplitude, double phase,
                                                 double omega, int n_harmonics, const std::vector<double>& t) {
    OpenLoopPoint p(cfg, omega);
    std::vector<double> y(t.size(), 0.0);
    for (int n : odd_orders(n_harmonics)) {
        const cplx l = p.ln(n);
        const double mag = std::abs(amplitude * l), ang = n * phase + wrapped_angle(l);
        for (size_t i = 0; i < t.size(); ++i) y[i] += mag * std::sin(n * omega * t[i] + ang);
    }
    return y;
}

} // namespace hosidf
