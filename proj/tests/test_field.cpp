#include <cmath>

#include <catch_amalgamated.hpp>

#include "cosmowave/field.hpp"
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

}  // namespace

TEST_CASE("geometric stops") {
    const auto st = geometric_stops(1.0, 1e-2, 4);
    REQUIRE(st.size() == 9);
    CHECK(st.front() == 1.0);
    CHECK_THAT(st.back(), WithinRel(1e-2, 1e-14));
    for (std::size_t i = 1; i < st.size(); ++i) CHECK_THAT(st[i - 1] / st[i], WithinRel(std::pow(10.0, 0.25), 1e-12));
    REQUIRE_THROWS_AS(geometric_stops(1e-2, 1.0, 4), Error);
}

TEST_CASE("flat single mode matches the mode solver") {
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        auto bg = Background::make(Cosmology::make(type, 4.0 / 3.0, kB));
        InitialDataSpec spec;
        spec.fourier.push_back({{1, 1, 0}, 0.3, 0.0, -0.2, 0.0});
        const auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
        EvolveOptions o;
        o.tol = 1e-12;
        const auto s1 = evolve_field(s0, 1e-3, o);
        const double lam = 8 * M_PI * M_PI;
        const auto m = evolve_mode(bg, ModeState{lam, 1.0, 0.3, -0.2}, 1e-3, 1e-12);
        const auto& grid = s0.psi.grid();
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; j += 3) {
                const double ph = std::cos(2 * M_PI * (i + j) * grid.spacing());
                CHECK_THAT(s1.psi[grid.index(i, j, 5)], WithinAbs(m.u * ph, 1e-8 * std::abs(m.u)));
                CHECK_THAT(s1.psi_dot[grid.index(i, j, 5)], WithinAbs(m.u_dot * ph, 1e-8 * std::abs(m.u_dot)));
            }
        }
        CHECK(s1.t == 1e-3);
    }
}

TEST_CASE("homogeneous data stay homogeneous and exact") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec spec;
    spec.homogeneous = {{2.0, 1.0}};
    const auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
    const auto s1 = evolve_field(s0, 1e-5);
    const auto h = HomogeneousWave(bg, 2.0, 1.0)(1e-5);
    CHECK_THAT(s1.psi.min_abs(), WithinRel(h.value, 1e-9));
    CHECK_THAT(s1.psi.max_abs(), WithinRel(h.value, 1e-9));
    CHECK_THAT(s1.psi_dot.max_abs(), WithinRel(std::abs(h.d_dt), 1e-9));
}

TEST_CASE("trajectory sampling is one continuous solve") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec spec;
    spec.random = RandomBandlimited{2, 11, 1.0};
    const auto s0 = make_initial_data(spec, bg, flat(8), 1.0);
    const std::vector<double> stops{1.0, 0.3, 0.1};
    const auto traj = sample_trajectory(s0, stops);
    REQUIRE(traj.size() == 3);
    CHECK(traj[0].psi.values() == s0.psi.values());
    const auto direct = evolve_field(s0, 0.1);
    double err = 0.0;
    for (std::size_t i = 0; i < direct.psi.size(); ++i) err = std::max(err, std::abs(direct.psi[i] - traj[2].psi[i]));
    CHECK(err < 1e-8 * direct.psi.max_abs());
    const std::vector<double> up{1.0, 2.0};
    REQUIRE_THROWS_AS(sample_trajectory(s0, up), Error);
}

TEST_CASE("random data are reproducible and band limited") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    InitialDataSpec spec;
    spec.random = RandomBandlimited{3, 99, 0.5};
    const auto a = make_initial_data(spec, bg, flat(16), 1.0);
    const auto b = make_initial_data(spec, bg, flat(16), 1.0);
    CHECK(a.psi.values() == b.psi.values());
    CHECK(a.psi_dot.values() == b.psi_dot.values());
    const auto S = Spectrum::forward(a.psi);
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (S.k_squared(i) > 27) CHECK(std::abs(S[i]) < 1e-14);
    }
    spec.random->kmax = 8;
    REQUIRE_THROWS_AS(make_initial_data(spec, bg, flat(16), 1.0), Error);
}

TEST_CASE("curved path refuses small times") {
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    const auto grid = TorusGrid::make(8, 1.0);
    auto g = std::make_shared<const SpatialMetric>(SpatialMetric::conformal(
        sample(grid, [](double x, double, double) { return 0.1 * std::cos(2 * M_PI * x); })));
    InitialDataSpec spec;
    spec.homogeneous = {{1.0, 0.0}};
    const auto s0 = make_initial_data(spec, bg, g, 1.0);
    try {
        evolve_field(s0, 1e-4);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CFLViolation);
    }
    const auto s1 = evolve_field(s0, 0.5);
    const auto h = HomogeneousWave(bg, 1.0)(0.5);
    CHECK_THAT(s1.psi.max_abs(), WithinRel(h.value, 1e-8));
}
