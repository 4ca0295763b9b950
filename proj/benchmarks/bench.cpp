#include <cmath>

#include <benchmark/benchmark.h>

#include "cosmowave/energies.hpp"
#include "cosmowave/mode.hpp"

using namespace cosmowave;

namespace {

constexpr double kB = 3.0 / (8.0 * M_PI);

Background bg(SpatialType type, double gamma) { return Background::make(Cosmology::make(type, gamma, kB)); }

FieldState random_state(const Background& b, int n, std::shared_ptr<const SpatialMetric> g = nullptr) {
    if (!g) g = std::make_shared<const SpatialMetric>(SpatialMetric::flat(TorusGrid::make(n, 1.0)));
    InitialDataSpec spec;
    spec.homogeneous = {{1.0, 0.0}};
    spec.random = RandomBandlimited{4, 1, 0.1};
    return make_initial_data(spec, b, g, 1.0);
}

void BM_ScaleFactorSolve(benchmark::State& st) {
    const auto c = Cosmology::make(SpatialType::TypeMinus1, 1.0, kB);
    for (auto _ : st) benchmark::DoNotOptimize(solve_type_minus1(c, 1e-12, 1e4, 1e-12));
}
BENCHMARK(BM_ScaleFactorSolve)->Unit(benchmark::kMillisecond);

void BM_EvolveMode(benchmark::State& st) {
    const auto b = bg(SpatialType::Type0, 1.0);
    const double lam = 4.0 * M_PI * M_PI * st.range(0);
    for (auto _ : st) benchmark::DoNotOptimize(evolve_mode(b, ModeState{lam, 1.0, 1.0, 0.0}, 1e-8, 1e-12));
}
BENCHMARK(BM_EvolveMode)->Arg(1)->Arg(16)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_FlatFieldDecade(benchmark::State& st) {
    const auto b = bg(SpatialType::Type0, 1.0);
    const auto s0 = random_state(b, static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(evolve_field(s0, 0.1));
}
BENCHMARK(BM_FlatFieldDecade)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CurvedFieldDecade(benchmark::State& st) {
    const auto b = bg(SpatialType::Type0, 1.0);
    const auto grid = TorusGrid::make(16, 1.0);
    auto g = std::make_shared<const SpatialMetric>(
        SpatialMetric::conformal(sample(grid, [](double x, double, double) { return 0.1 * std::cos(2 * M_PI * x); })));
    const auto s0 = random_state(b, 16, g);
    for (auto _ : st) benchmark::DoNotOptimize(evolve_field(s0, 0.1));
}
BENCHMARK(BM_CurvedFieldDecade)->Unit(benchmark::kMillisecond);

void BM_EnergyReport(benchmark::State& st) {
    const auto b = bg(SpatialType::TypeMinus1, 1.0);
    const auto s = random_state(b, static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(energy_report(s, 2, true, 0.1));
}
BENCHMARK(BM_EnergyReport)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_SobolevConstant(benchmark::State& st) {
    const auto grid = TorusGrid::make(16, 1.0);
    const auto g = SpatialMetric::flat(grid);
    for (auto _ : st) benchmark::DoNotOptimize(sobolev_constant_K(g, grid));
}
BENCHMARK(BM_SobolevConstant)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
