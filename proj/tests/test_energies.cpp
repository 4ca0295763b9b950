#include <cmath>

#include <catch_amalgamated.hpp>

#include "cosmowave/energies.hpp"

using namespace cosmowave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kB = 3.0 / (8.0 * M_PI);

std::shared_ptr<const SpatialMetric> flat(int n) {
    return std::make_shared<const SpatialMetric>(SpatialMetric::flat(TorusGrid::make(n, 1.0)));
}

FieldState random_state(const Background& bg, std::uint64_t seed, double t0 = 1.0, bool hom = true) {
    InitialDataSpec spec;
    if (hom) spec.homogeneous = {{1.0, 0.0}};
    spec.random = RandomBandlimited{2, seed, 0.3};
    return make_initial_data(spec, bg, flat(8), t0);
}

}  // namespace

TEST_CASE("exponents") {
    CHECK_THAT(beta_exponent(1.0), WithinRel(4.0 / 3.0, 1e-15));
    CHECK_THAT(beta_exponent(1.5), WithinRel(4.0 - 8.0 / 3.0, 1e-15));
    CHECK_THAT(beta_epsilon(1.0, 0.1), WithinRel(2.0, 1e-15));
    CHECK_THAT(beta_epsilon(1.5, 0.1), WithinRel(3.1, 1e-15));
    CHECK(beta_epsilon(2.0, 0.1) == 6.0);
    CHECK_THAT(default_epsilon(1.0), WithinRel(0.1, 1e-15));
    CHECK_THAT(default_epsilon(1.99), WithinRel(0.03, 1e-9));
}

TEST_CASE("energy of a single mode") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec spec;
    spec.fourier.push_back({{0, 2, 0}, 0.5, 0.0, 0.0, 2.0});
    const auto s = make_initial_data(spec, bg, flat(16), 0.5);
    const double lam = 16 * M_PI * M_PI, a = bg.a(0.5);
    for (int N = 0; N <= 2; ++N) {
        const double expect = std::pow(lam, 2 * N) * 0.5 * (4.0 + lam / (a * a) * 0.25);
        CHECK_THAT(energy(s, N), WithinRel(expect, 1e-12));
    }
    CHECK_THAT(h1_seminorm(s), WithinRel(std::sqrt(lam * 0.125), 1e-12));
    REQUIRE_THROWS_AS(energy(s, -1), Error);
}

TEST_CASE("curved energy reduces to the flat one for phi = 0") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    const auto grid = TorusGrid::make(16, 1.0);
    auto g = std::make_shared<const SpatialMetric>(SpatialMetric::conformal(Field(grid, 0.0)));
    InitialDataSpec spec;
    spec.fourier.push_back({{1, 0, 0}, 0.5, 0.0, 0.0, 2.0});
    const auto sc = make_initial_data(spec, bg, g, 1.0);
    const auto sf = make_initial_data(spec, bg, flat(16), 1.0);
    CHECK_THAT(energy(sc, 0), WithinRel(energy(sf, 0), 2e-3));
}

TEST_CASE("weighted energies are nonincreasing toward the singularity") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        for (double g : {0.8, 1.0, 4.0 / 3.0, 2.0}) {
            auto bg = Background::make(Cosmology::make(type, g, kB));
            for (std::uint64_t seed : {1u, 2u}) {
                const auto s0 = random_state(bg, seed, 1.0, false);
                const auto traj = sample_trajectory(s0, geometric_stops(1.0, 1e-4, 8));
                std::vector<EnergyReport> reps;
                for (const auto& s : traj) reps.push_back(energy_report(s, 2, false, 0.0));
                INFO("type " << int(type) << " gamma " << g << " seed " << seed);
                CHECK(monotonicity_violations(reps, 1e-6).empty());
                CHECK(sequence_violations(reps, 1e-6).empty());
            }
        }
    }
}

TEST_CASE("rescaled energies are nonincreasing for gamma < 2") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        for (double g : {0.8, 1.0, 1.5}) {
            auto bg = Background::make(Cosmology::make(type, g, kB));
            const auto s0 = random_state(bg, 3);
            const auto traj = sample_trajectory(s0, geometric_stops(1.0, 1e-4, 8));
            std::vector<EnergyReport> reps;
            for (const auto& s : traj) reps.push_back(energy_report(s, 2, true, default_epsilon(g)));
            INFO("type " << int(type) << " gamma " << g);
            CHECK(sequence_violations(reps, 1e-6).empty());
            CHECK(reps.back().weightedRescaledE.size() == 3);
        }
    }
}

TEST_CASE("violation scan") {
    EnergyReport r;
    r.weightedE = {1.0};
    std::vector<EnergyReport> reps(4, r);
    reps[1].weightedE = {0.5};
    reps[2].weightedE = {0.8};
    reps[3].weightedE = {1.1};
    for (std::size_t i = 0; i < 4; ++i) reps[i].t = 1.0 / (i + 1);
    const auto m = monotonicity_violations(reps, 1e-6);
    REQUIRE(m.size() == 1);
    CHECK(m[0].stop == 3);
    CHECK(m[0].quantity == "a6E");
    const auto s = sequence_violations(reps, 1e-6);
    CHECK(s.size() == 2);
    CHECK(monotonicity_violations(reps, 0.2).empty());
}

TEST_CASE("flux balance closes and the Hermite rule beats the trapezoid") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        auto bg = Background::make(Cosmology::make(type, 1.0, kB));
        InitialDataSpec spec;
        spec.fourier.push_back({{1, 0, 0}, 1.0, 0.0, 0.0, 0.0});
        const auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
        std::vector<double> stops;
        for (int i = 0; i < 64; ++i) stops.push_back(std::pow(1e-3, i / 63.0));
        EvolveOptions o;
        o.tol = 1e-12;
        const auto traj = sample_trajectory(s0, stops, o);
        const auto fb = flux_balance(traj);
        CHECK(fb.residual < 1e-4);
        CHECK(fb.integral > 0.0);
        CHECK(fb.residual < flux_balance_residual(traj, FluxQuadrature::Trapezoid));
    }
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    const auto s0 = random_state(bg, 1);
    const auto sparse = sample_trajectory(s0, geometric_stops(1.0, 1e-2, 2));
    try {
        flux_balance(sparse);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientSamples);
    }
}

TEST_CASE("rescaling guards") {
    auto stiff = Background::make(Cosmology::make(SpatialType::Type0, 2.0, kB));
    const auto s = random_state(stiff, 1, 1.0);  // log t vanishes at t = 1
    try {
        rescaled_fields(s, RescaleKind::Type0Hat);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DenominatorZero);
    }
    try {
        rescaled_fields(s, RescaleKind::TypeMinus1Hat);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WrongType);
    }
    // pure homogeneous data rescale to the constant C1
    auto bg = Background::make(Cosmology::make(SpatialType::TypeMinus1, 1.0, kB));
    InitialDataSpec spec;
    spec.homogeneous = {{2.5, 0.0}};
    const auto h = make_initial_data(spec, bg, flat(8), 0.3);
    auto [hat, hat_dot] = rescaled_fields(h, RescaleKind::TypeMinus1Hat);
    CHECK_THAT(hat.max_abs(), WithinRel(2.5, 1e-12));
    CHECK(hat_dot.max_abs() < 1e-10);
    CHECK(rescaled_energy(h, 1, RescaleKind::TypeMinus1Hat) < 1e-18);
}

TEST_CASE("homogeneous trajectory has no rescaled violations") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec spec;
    spec.homogeneous = {{1.0, 0.0}};
    const auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
    const auto traj = sample_trajectory(s0, geometric_stops(1.0, 1e-6, 8));
    std::vector<EnergyReport> reps;
    for (const auto& s : traj) reps.push_back(energy_report(s, 2, true, 0.1));
    CHECK(monotonicity_violations(reps, 1e-6).empty());
    CHECK(sequence_violations(reps, 1e-6).empty());
}

TEST_CASE("pointwise bounds hold along trajectories") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        for (double g : {1.0, 2.0}) {
            auto bg = Background::make(Cosmology::make(type, g, kB));
            const auto s0 = random_state(bg, 4, 0.5);
            const auto traj = sample_trajectory(s0, geometric_stops(0.5, 1e-3, 8));
            const double C = elliptic_constant_C(*s0.metric, s0.psi.grid());
            for (const auto& b : pointwise_bound(traj, 0, C)) CHECK(b.lhs <= b.rhs);
            for (const auto& b : h1_bound(traj)) CHECK(b.lhs <= b.rhs * (1 + 1e-9));
            if (g < 2.0) {
                for (const auto& b : rescaled_pointwise_bound(traj, 0, C, default_epsilon(g))) CHECK(b.lhs <= b.rhs);
            }
        }
    }
}
