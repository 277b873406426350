#include <benchmark/benchmark.h>

#include <cmath>

#include "satorb/averaging.hpp"
#include "satorb/dynamics.hpp"
#include "satorb/periodic.hpp"

using namespace satorb;

namespace {

struct SunEarthMoon {
    MassModel m{{1.0}, {{1.0}}, 1e-3, 1e-2};
    FrequencySet fs;
    SystemModel sys;
    explicit SunEarthMoon(double omega) {
        fs = make_resonant(omega, 1.0, 2 * M_PI / (1 - omega), {0}, {{1}}, 0.5);
        sys = make_full(m, derive_scales(omega, m.mu, m.nu));
    }
};

} // namespace

static void BM_CoefficientTable(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(coefficient_table(-11, 10));
}
BENCHMARK(BM_CoefficientTable)->Unit(benchmark::kMillisecond);

static void BM_CKappa(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(c_kappa(k));
}
BENCHMARK(BM_CKappa)->Arg(1)->Arg(10)->Arg(-11)->Unit(benchmark::kMicrosecond);

static void BM_FullField(benchmark::State& state) {
    const SunEarthMoon s(0.05);
    const PhaseState z = circular_state(s.sys, s.fs, {0.0, 0.3});
    Eigen::VectorXd out(z.z.size());
    for (auto _ : state) {
        s.sys.field(z.z.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_FullField);

static void BM_FullJacobian(benchmark::State& state) {
    const SunEarthMoon s(0.05);
    const PhaseState z = circular_state(s.sys, s.fs, {0.0, 0.3});
    for (auto _ : state) benchmark::DoNotOptimize(s.sys.jacobian(z.z));
}
BENCHMARK(BM_FullJacobian);

static void BM_ShootSunEarthMoon(benchmark::State& state) {
    const SunEarthMoon s(0.05);
    const GeneratingTorus gt = generating_torus(s.fs, s.sys);
    const std::vector<SymmetricSeed> seeds = symmetric_seeds(gt);
    for (auto _ : state) benchmark::DoNotOptimize(shoot_symmetric(s.sys, gt, seeds.front()));
}
BENCHMARK(BM_ShootSunEarthMoon)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
