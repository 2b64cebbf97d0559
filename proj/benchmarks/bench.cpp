#include <benchmark/benchmark.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "hosidf/hosidf.hpp"

using namespace hosidf;

namespace {

void open_loop_grid_bench(benchmark::State& st) {
    const LoopConfig cfg = cglp_pid_case_study();
    const auto w = logspace(hz_to_rad(1.0), hz_to_rad(1000.0), 200);
    const int nh = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(open_loop_grid(cfg, w, nh));
    st.SetItemsProcessed(st.iterations() * 200 * nh);
}
BENCHMARK(open_loop_grid_bench)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void closed_loop_grid_bench(benchmark::State& st) {
    const LoopConfig cfg = closed_loop_example();
    const auto w = logspace(hz_to_rad(1.0), hz_to_rad(1000.0), 200);
    const int nh = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(closed_loop_grid(cfg, w, nh, Sensitivity::s));
    st.SetItemsProcessed(st.iterations() * 200 * nh);
}
BENCHMARK(closed_loop_grid_bench)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void simulate_bench(benchmark::State& st) {
    SimConfig c{.system = closed_loop_example()};
    c.freq_hz = 200.0;
    c.steps_per_period = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(simulate(c));
}
BENCHMARK(simulate_bench)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void expm_bench(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n) * 10.0;
    for (auto _ : st) {
        Eigen::MatrixXd e = a.exp();
        benchmark::DoNotOptimize(e.data());
    }
}
BENCHMARK(expm_bench)->Arg(2)->Arg(6)->Arg(16);

void kernel_bench(benchmark::State& st) {
    const ResetController rc = ResetController::from_tf(make_fore(244.8 * std::numbers::pi), 0.0);
    double w = 100.0;
    for (auto _ : st) {
        const ResetKernel k(rc, w, 1.0);
        benchmark::DoNotOptimize(k.c_rho(3));
        w += 1e-3;
    }
}
BENCHMARK(kernel_bench);

} // namespace

BENCHMARK_MAIN();
