#include <benchmark/benchmark.h>

#include "gics/config.hpp"
#include "gics/scheme.hpp"
#include "gics/sensing.hpp"
#include "gics/solver.hpp"

using namespace gics;

namespace {

const RunConfig& sim() {
    static const RunConfig c = preset_config("paper-sim");
    return c;
}

std::vector<ShotRecord> shots(int k) {
    const RunConfig& c = sim();
    return ShotSimulator(c.seeded_geometry(), c.make_object()).simulate_range(0, k, true);
}

}  // namespace

static void BM_FresnelMatrix(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Grid1D g = matched_grid(n, 632.8e-9, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(fresnel_matrix(g, g, 632.8e-9, 0.05));
}
BENCHMARK(BM_FresnelMatrix)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_Propagate(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Grid1D g = matched_grid(n, 632.8e-9, 0.05);
    const ComplexField f(g, Eigen::VectorXcd::Ones(n), 632.8e-9);
    for (auto _ : state) benchmark::DoNotOptimize(fresnel_propagate(f, 0.05, g));
}
BENCHMARK(BM_Propagate)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_SimulateShot(benchmark::State& state) {
    const RunConfig& c = sim();
    const ShotSimulator s(c.seeded_geometry(), c.make_object());
    std::int64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(s.simulate(i++, true));
}
BENCHMARK(BM_SimulateShot)->Unit(benchmark::kMillisecond);

static void BM_BuildSystem(benchmark::State& state) {
    const RunConfig& c = sim();
    const auto s = shots(static_cast<int>(state.range(0)));
    const SchemeGeometry g = c.seeded_geometry();
    for (auto _ : state)
        benchmark::DoNotOptimize(build_system(s, g, c.mode("homodyne"), c.acquisition.r2_pixels));
}
BENCHMARK(BM_BuildSystem)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_SolveHomodyne(benchmark::State& state) {
    const RunConfig& c = sim();
    const SensingSystem sys = build_system(shots(50), c.seeded_geometry(), c.mode("homodyne"), c.acquisition.r2_pixels);
    SolverConfig cfg = c.recon.solver;
    cfg.lambda_reg = 0.01 * lambda_max(sys, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(solve_l1(sys, cfg));
}
BENCHMARK(BM_SolveHomodyne)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
