#include <cmath>

#include <catch_amalgamated.hpp>

#include "cosmowave/diagnostics.hpp"
#include "cosmowave/homogeneous.hpp"
#include "cosmowave/mode.hpp"
#include "cosmowave/spectral.hpp"

using namespace cosmowave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kB = 3.0 / (8.0 * M_PI);

std::shared_ptr<const SpatialMetric> flat(int n) {
    return std::make_shared<const SpatialMetric>(SpatialMetric::flat(TorusGrid::make(n, 1.0)));
}

std::vector<FieldState> run(const Background& bg, const InitialDataSpec& spec, double t1, int per_decade = 8) {
    EvolveOptions o;
    o.tol = 1e-11;
    return sample_trajectory(make_initial_data(spec, bg, flat(8), 1.0), geometric_stops(1.0, t1, per_decade), o);
}

}  // namespace

TEST_CASE("homogeneous data have the constant profile C1") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        auto bg = Background::make(Cosmology::make(type, 1.0, kB));
        InitialDataSpec spec;
        spec.homogeneous = {{1.7, 0.0}};
        const auto traj = run(bg, spec, 1e-4);
        const auto P = extract_profile(traj, ProfileMethod::Rescale);
        CHECK_THAT(P.A.min_abs(), WithinRel(1.7, 1e-9));
        CHECK_THAT(P.A.max_abs(), WithinRel(1.7, 1e-9));
        REQUIRE(P.A_laplacians.size() == 3);
        CHECK(P.A_laplacians[1].max_abs() < 1e-9);
        CHECK(P.remainder_sup < 1e-6 * std::abs(HomogeneousWave(bg, 1.7)(1e-4).value));
        const auto lc = limit_equality_check(traj, P);
        CHECK(lc.residual < 1e-8);
    }
}

TEST_CASE("flat profile agrees with the per-mode amplitude") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.5, kB));
    InitialDataSpec spec;
    spec.homogeneous = {{1.0, 0.0}};
    spec.fourier.push_back({{1, 0, 0}, 0.1, 0.0, 0.0, 0.0});
    const auto traj = run(bg, spec, 1e-6);
    const auto P = extract_profile(traj, ProfileMethod::Rescale);
    const double lam = 4 * M_PI * M_PI;
    const auto P1 = mode_propagator(bg, lam, 1.0, std::vector<double>{1e-6}, 1e-12);
    const double Am = P1[0][0] / psi_hom_basis(bg, 1e-6);
    const auto& grid = P.A.grid();
    for (int i = 0; i < 8; ++i) {
        const double expect = 1.0 + 0.1 * Am * std::cos(2 * M_PI * i * grid.spacing());
        CHECK_THAT(P.A[grid.index(i, 3, 1)], WithinAbs(expect, 1e-8));
    }
    CHECK(P.convergence_rate > 0.0);
    CHECK_FALSE(P.heuristic);
}

TEST_CASE("limit identity and energy convergence") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        auto bg = Background::make(Cosmology::make(type, 1.5, kB));
        InitialDataSpec spec;
        spec.homogeneous = {{1.0, 0.0}};
        spec.fourier.push_back({{0, 1, 0}, 0.01, 0.0, 0.0, 0.0});
        const auto traj = run(bg, spec, 1e-6);
        const auto P = extract_profile(traj, ProfileMethod::Rescale);
        const auto lc = limit_equality_check(traj, P);
        CHECK(lc.residual < 1e-2);
        const double m = HomogeneousWave(bg, 1.0).unit_momentum();
        CHECK(lc.target > 0.0);
        CHECK_THAT(lc.target, WithinRel(m * m * inner_product(*traj.front().metric, P.A, P.A), 1e-12));
        const auto ec = energy_convergence_check(traj, P);
        CHECK(ec.t.size() == traj.size());
        CHECK(ec.weighted.back() < ec.weighted.front());
    }
}

TEST_CASE("stiff profile route") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 2.0, kB));
    InitialDataSpec spec;
    spec.fourier.push_back({{1, 0, 0}, 1.0, 0.0, 1.0, 0.0});
    auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
    const auto traj = sample_trajectory(s0, geometric_stops(1.0, 1e-3, 8));
    const auto P = extract_profile(traj, ProfileMethod::StiffIntegral);
    const auto sp = stiff_profile(bg, ModeState{4 * M_PI * M_PI, 1.0, 1.0, 1.0}, 1e-10);
    CHECK_THAT(P.A.max_abs(), WithinRel(std::abs(sp.A_mode), 1e-6));
    try {
        limit_equality_check(traj, P);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WrongRegime);
        CHECK(std::string(e.what()).find("gamma = 2") != std::string::npos);
    }
    REQUIRE_THROWS_AS(energy_convergence_check(traj, P), Error);

    auto dust = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec h;
    h.homogeneous = {{1.0, 0.0}};
    const auto tr = run(dust, h, 1e-2);
    try {
        extract_profile(tr, ProfileMethod::StiffIntegral);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MethodMismatch);
    }
}

TEST_CASE("rate fit needs four stops") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec spec;
    spec.homogeneous = {{1.0, 0.0}};
    spec.fourier.push_back({{1, 0, 0}, 0.1, 0.0, 0.0, 0.0});
    auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
    const auto traj = sample_trajectory(s0, std::vector<double>{1.0, 0.1, 0.01});
    try {
        extract_profile(traj, ProfileMethod::Rescale);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotConverged);
    }
}

TEST_CASE("curved metrics use the pointwise quotient") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    const auto grid = TorusGrid::make(8, 1.0);
    auto g = std::make_shared<const SpatialMetric>(SpatialMetric::conformal(
        sample(grid, [](double x, double, double) { return 0.1 * std::cos(2 * M_PI * x); })));
    InitialDataSpec spec;
    spec.homogeneous = {{2.0, 0.0}};
    const auto traj = sample_trajectory(make_initial_data(spec, bg, g, 1.0), geometric_stops(1.0, 1e-2, 4));
    const auto P = extract_profile(traj, ProfileMethod::Rescale);
    CHECK_THAT(P.A.max_abs(), WithinRel(2.0, 1e-8));
    try {
        extract_profile(traj, ProfileMethod::StiffIntegral);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK((e.code() == ErrorCode::UnsupportedMetric || e.code() == ErrorCode::MethodMismatch));
    }
}
