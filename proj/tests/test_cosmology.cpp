#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <catch_amalgamated.hpp>

#include "cosmowave/cosmology.hpp"

using namespace cosmowave;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kB = 3.0 / (8.0 * M_PI);

// Independent route: t(a) = \int_0^a dx / sqrt(K x^{2-3 gamma} + 1), inverted by bisection.
double oracle_t_of_a(double gamma, double a) {
    const double K = 8.0 * M_PI * kB / 3.0;
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate([&](double x) { return 1.0 / std::sqrt(K * std::pow(x, 2.0 - 3.0 * gamma) + 1.0); }, 0.0, a);
}

double oracle_a(double gamma, double t) {
    auto f = [&](double a) { return oracle_t_of_a(gamma, a) - t; };
    boost::math::tools::eps_tolerance<double> tol(48);
    std::uintmax_t it = 200;
    auto [lo, hi] = boost::math::tools::bisect(f, 1e-300 + t * 1e-3, 10.0 * (t + std::pow(t, 2.0 / (3.0 * gamma))) + 10.0,
                                               tol, it);
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("cosmology parameters are validated") {
    REQUIRE_THROWS_AS(Cosmology::make(SpatialType::Type0, 0.6, kB), Error);
    REQUIRE_THROWS_AS(Cosmology::make(SpatialType::Type0, 2.1, kB), Error);
    REQUIRE_THROWS_AS(Cosmology::make(SpatialType::Type0, 1.0, 0.0), Error);
    REQUIRE_NOTHROW(Cosmology::make(SpatialType::Type0, 2.0, kB));
    try {
        Cosmology::make(SpatialType::Type0, 0.5, kB);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("type 0 scale factor is the power law") {
    for (double g : {0.8, 1.0, 4.0 / 3.0, 2.0}) {
        auto bg = Background::make(Cosmology::make(SpatialType::Type0, g, kB));
        const double p = 2.0 / (3.0 * g);
        for (double t : {1e-8, 1e-3, 0.5, 3.0}) {
            CHECK_THAT(bg.a(t), WithinRel(std::pow(t, p), 1e-14));
            CHECK_THAT(bg.a_dot(t), WithinRel(p * std::pow(t, p - 1), 1e-14));
            CHECK_THAT(bg.a_ddot(t), WithinRel(p * (p - 1) * std::pow(t, p - 2), 1e-13));
            CHECK_THAT(bg.rho(t), WithinRel(kB * std::pow(t, -2.0), 1e-13));
        }
    }
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    REQUIRE_THROWS_AS(bg.a(0.0), Error);
    REQUIRE_THROWS_AS(bg.a(-1.0), Error);
}

TEST_CASE("type -1 scale factor matches the quadrature oracle") {
    for (double g : {0.8, 1.0, 4.0 / 3.0, 2.0}) {
        auto bg = Background::make(Cosmology::make(SpatialType::TypeMinus1, g, kB));
        for (double t : {1e-9, 1e-6, 1e-3, 0.1, 1.0, 10.0, 300.0}) {
            INFO("gamma " << g << " t " << t);
            CHECK_THAT(bg.a(t), WithinRel(oracle_a(g, t), 1e-9));
        }
    }
}

TEST_CASE("type -1 scale factor properties") {
    for (double g : {0.8, 1.0, 4.0 / 3.0, 2.0}) {
        const auto c = Cosmology::make(SpatialType::TypeMinus1, g, kB);
        auto bg = Background::make(c);
        const double K = c.density_prefactor();
        double prev = 0.0;
        for (double lt = -11.5; lt <= 3.5; lt += 0.173) {
            const double t = std::pow(10.0, lt);
            const double a = bg.a(t), ad = bg.a_dot(t);
            INFO("gamma " << g << " t " << t);
            CHECK(a >= t);
            CHECK(a > prev);
            CHECK(ad >= 1.0);
            prev = a;
            CHECK(std::abs(ad * ad - K * std::pow(a, 2 - 3 * g) - 1.0) / (ad * ad) < 1e-9);
            // a_dddot against a centred difference of a_ddot
            const double h = 1e-4 * t;
            const double fd = (bg.a_ddot(t + h) - bg.a_ddot(t - h)) / (2 * h);
            CHECK_THAT(bg.a_dddot(t), WithinRel(fd, 1e-5));
        }
        const double p = c.expansion_exponent();
        const double lead = std::pow(1.5 * g * std::sqrt(K), p);
        CHECK_THAT(c.leading_coefficient(), WithinRel(lead, 1e-14));
        CHECK_THAT(bg.a(1e-8) / std::pow(1e-8, p), WithinRel(lead, 5e-3));
        CHECK_THAT(bg.curve()->asymptotic_constant(), WithinRel(lead, 1e-6));
    }
}

TEST_CASE("type -1 curve refuses times outside its range") {
    auto bg = Background::make(Cosmology::make(SpatialType::TypeMinus1, 1.0, kB), 1e-6, 10.0);
    REQUIRE_THROWS_AS(bg.a(1e-7), Error);
    REQUIRE_THROWS_AS(bg.a(11.0), Error);
    try {
        bg.a(100.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
    }
    REQUIRE_THROWS_AS(solve_type_minus1(Cosmology::make(SpatialType::Type0, 1.0, kB), 1e-6, 1.0, 1e-10), Error);
}

TEST_CASE("integrals of the scale factor") {
    boost::math::quadrature::tanh_sinh<double> q;
    for (auto type : {SpatialType::Type0, SpatialType::TypeMinus1}) {
        for (double g : {1.0, 2.0}) {
            auto bg = Background::make(Cosmology::make(type, g, kB));
            const double inv = bg.integral_inv_a_cubed(0.01, 1.0);
            const double ref = q.integrate([&](double s) { return std::pow(bg.a(s), -3.0); }, 0.01, 1.0);
            CHECK_THAT(inv, WithinRel(ref, 1e-8));
            const double ia = bg.integral_a_from_zero(0.5);
            const double refa = q.integrate([&](double s) { return bg.a(std::max(s, 1e-12)); }, 0.0, 0.5);
            CHECK_THAT(ia, WithinRel(refa, 1e-7));
        }
    }
    // type 0 dust closed form: \int_t^1 s^{-2} ds = 1/t - 1
    auto bg = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    CHECK_THAT(bg.integral_inv_a_cubed(0.1, 1.0), WithinRel(9.0, 1e-12));
}

TEST_CASE("far-field integral h(t)") {
    auto bg = Background::make(Cosmology::make(SpatialType::TypeMinus1, 1.0, kB));
    const auto h = far_field_integral(bg, 1e-4, 0.0, std::numeric_limits<double>::infinity());
    // h ~ 1 / (k^3 t) near 0 for dust (a ~ k t^{2/3})
    const double k = bg.curve()->asymptotic_constant();
    CHECK_THAT(h.value * 1e-4 * k * k * k, WithinRel(1.0, 1e-2));
    CHECK(h.error >= 0.0);
    // h(t1) - h(t2) equals the finite integral
    const auto h2 = far_field_integral(bg, 1e-2, 0.0, std::numeric_limits<double>::infinity());
    CHECK_THAT(h.value - h2.value, WithinRel(bg.integral_inv_a_cubed(1e-4, 1e-2), 1e-9));
    auto flat = Background::make(Cosmology::make(SpatialType::Type0, 1.0, kB));
    REQUIRE_THROWS_AS(far_field_integral(flat, 1.0), Error);
}
