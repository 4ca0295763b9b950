#include <cmath>
#include <random>

#include <catch_amalgamated.hpp>

#include "cosmowave/spatial.hpp"
#include "cosmowave/spectral.hpp"

using namespace cosmowave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Field random_smooth(const TorusGrid& grid, std::uint64_t seed, int kmax = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<FourierTerm> terms;
    for (int a = 0; a <= kmax; ++a)
        for (int b = -kmax; b <= kmax; ++b)
            for (int c = -kmax; c <= kmax; ++c) terms.push_back({{a, b, c}, N(rng), N(rng)});
    return fourier_series(grid, terms);
}

SpatialMetric wavy(const TorusGrid& grid) {
    return SpatialMetric::conformal(sample(grid, [](double x, double y, double) {
        return 0.1 * std::cos(2 * M_PI * x) + 0.05 * std::sin(2 * M_PI * y);
    }));
}

}  // namespace

TEST_CASE("grid validation") {
    REQUIRE_THROWS_AS(TorusGrid::make(7), Error);
    REQUIRE_THROWS_AS(TorusGrid::make(16, -1.0), Error);
    const auto g = TorusGrid::make(16, 2.0);
    CHECK(g.size() == 4096);
    CHECK_THAT(g.wave_scale(), WithinRel(M_PI * M_PI, 1e-15));
    REQUIRE_THROWS_AS(require_same_grid(g, TorusGrid::make(8, 2.0)), Error);
}

TEST_CASE("spectrum round trip and Parseval") {
    const auto grid = TorusGrid::make(16, 1.0);
    const Field f = random_smooth(grid, 5);
    const Field back = Spectrum::forward(f).inverse();
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(f[i] - back[i]));
    CHECK(err < 1e-12 * f.max_abs());
    const auto flat = SpatialMetric::flat(grid);
    const double l2 = inner_product(flat, f, f);
    CHECK_THAT(Spectrum::forward(f).weighted_norm_sq([](double) { return 1.0; }), WithinRel(l2, 1e-12));
}

TEST_CASE("flat Laplacian of eigenmodes") {
    const auto grid = TorusGrid::make(16, 1.0);
    const auto flat = SpatialMetric::flat(grid);
    const Field e = fourier_series(grid, {{{1, 2, 0}, 1.0, 0.5}});
    const Field le = laplace_beltrami(flat, e);
    const double lam = grid.wave_scale() * 5;
    for (std::size_t i = 0; i < e.size(); ++i) CHECK_THAT(le[i], WithinAbs(-lam * e[i], 1e-9 * lam));
    const Field l2 = laplace_power(flat, e, 2);
    for (std::size_t i = 0; i < e.size(); i += 97) CHECK_THAT(l2[i], WithinAbs(lam * lam * e[i], 1e-8 * lam * lam));
    CHECK_THAT(gradient_norm_sq(flat, e), WithinRel(-inner_product(flat, e, le), 1e-12));
}

TEST_CASE("curved Laplacian is symmetric and annihilates constants") {
    const auto grid = TorusGrid::make(16, 1.0);
    const auto g = wavy(grid);
    const Field f1 = random_smooth(grid, 1, 2), f2 = random_smooth(grid, 2, 2);
    const double a = inner_product(g, f1, laplace_beltrami(g, f2));
    const double b = inner_product(g, laplace_beltrami(g, f1), f2);
    CHECK_THAT(a, WithinRel(b, 1e-10));
    const Field c(grid, 3.0);
    CHECK(laplace_beltrami(g, c).max_abs() < 1e-9);
    CHECK_THAT(gradient_norm_sq(g, f1), WithinRel(-inner_product(g, f1, laplace_beltrami(g, f1)), 1e-10));
    CHECK(gradient_norm_sq(g, f1) > 0.0);
    CHECK(g.volume() > 0.0);
    CHECK_THAT(integrate(g, Field(grid, 1.0)), WithinRel(g.volume(), 1e-12));
}

TEST_CASE("curved Laplacian converges to fourth order") {
    // g = e^{2 phi} delta: Delta f = e^{-3 phi} div(e^{phi} grad f)
    auto exact = [](double x) {
        const double phi = 0.1 * std::cos(2 * M_PI * x), dphi = -0.2 * M_PI * std::sin(2 * M_PI * x);
        const double f1 = 2 * M_PI * std::cos(2 * M_PI * x), f2 = -4 * M_PI * M_PI * std::sin(2 * M_PI * x);
        return std::exp(-2 * phi) * (f2 + dphi * f1);
    };
    double prev = 0.0, ratio = 0.0;
    for (int n : {16, 32}) {
        const auto grid = TorusGrid::make(n, 1.0);
        const auto g = SpatialMetric::conformal(sample(grid, [](double x, double, double) {
            return 0.1 * std::cos(2 * M_PI * x);
        }));
        const Field f = sample(grid, [](double x, double, double) { return std::sin(2 * M_PI * x); });
        const Field lf = laplace_beltrami(g, f);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(lf[grid.index(i, 0, 0)] - exact(i * grid.spacing())));
        if (prev > 0.0) ratio = prev / err;
        prev = err;
    }
    CHECK(ratio > 12.0);
}

TEST_CASE("embedding constant is valid and nearly sharp") {
    const auto grid = TorusGrid::make(16, 1.0);
    const auto flat = SpatialMetric::flat(grid);
    const double K = sobolev_constant_K(flat, grid);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Field f = random_smooth(grid, seed, 4);
        const double rhs = K * std::sqrt(inner_product(flat, f, f) +
                                         inner_product(flat, laplace_beltrami(flat, f), laplace_beltrami(flat, f)));
        CHECK(f.max_abs() <= rhs);
    }
    // extremal function sum_k e_k / (1 + lambda^2), truncated to the grid
    Spectrum s(grid);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double lam = s.eigenvalue(i);
        s[i] = 1.0 / (1.0 + lam * lam);
    }
    const Field f = s.inverse();
    const Field lf = laplace_beltrami(flat, f);
    const double rhs = K * std::sqrt(inner_product(flat, f, f) + inner_product(flat, lf, lf));
    CHECK(f.max_abs() <= rhs);
    CHECK(f.max_abs() > 0.99 * rhs);
    CHECK_THAT(elliptic_constant_C(flat, grid), WithinRel(K, 1e-15));
    REQUIRE_THROWS_AS(sobolev_constant_K(wavy(grid), grid), Error);
}

TEST_CASE("metric json round trip") {
    const std::string text = R"({"kind": "conformal", "n": 8, "L": 1.0,
        "phi_coeffs": [{"k": [1, 0, 0], "c": 0.1, "s": 0.0}]})";
    const auto g = metric_from_json_text(text);
    CHECK(g.kind() == MetricKind::Conformal);
    const auto g2 = metric_from_json_text(metric_to_json_text(g));
    CHECK(g2.kind() == MetricKind::Conformal);
    CHECK_THAT(g2.volume(), WithinRel(g.volume(), 1e-15));
    CHECK(metric_from_json_text(R"({"kind": "flat", "n": 8})").is_flat());
    try {
        metric_from_json_text(R"({"kind": "bumpy", "n": 8})");
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
    REQUIRE_THROWS_AS(metric_from_json_text("{not json"), Error);
}
