#include "cosmowave/cosmology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cosmowave/ode.hpp"

namespace cosmowave {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Friedmann right-hand side f(a) = sqrt(K a^{2-3 gamma} + 1), written so it
// neither overflows nor loses precision for tiny a.
double friedmann_rate(double K, double gamma, double a) {
    return std::sqrt(K * std::pow(a, 2.0 - 3.0 * gamma) + 1.0);
}

// 1 / f(a) = a^{(3 gamma - 2)/2} / sqrt(K + a^{3 gamma - 2}).
double inverse_rate(double K, double gamma, double a) {
    if (a <= 0.0) return 0.0;
    const double e = 3.0 * gamma - 2.0;
    return std::pow(a, 0.5 * e) / std::sqrt(K + std::pow(a, e));
}

struct LogRates {
    double dy;
    double d2y;
};

// dy/dtau and d2y/dtau2 for y = log a, tau = log t.
LogRates log_rates(double K, double gamma, double tau, double y) {
    const double g = std::sqrt(K * std::exp(2.0 * tau - 3.0 * gamma * y) + std::exp(2.0 * (tau - y)));
    // K x / (K x + 1) with x = a^{2 - 3 gamma}
    const double w = 1.0 / (1.0 + std::exp(-(2.0 - 3.0 * gamma) * y) / K);
    const double d2y = g * (1.0 - g) + g * g * 0.5 * (2.0 - 3.0 * gamma) * w;
    return {g, d2y};
}

// Time at which the exact solution reaches a: t(a) = \int_0^a da' / f(a').
struct TimeOfA {
    double t;
    double rel_error;
};

TimeOfA time_of_a(double K, double gamma, double a) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0;
    const double I = integrator.integrate([&](double u) { return inverse_rate(K, gamma, a * u); }, 0.0, 1.0,
                                          1e-15, &err);
    return {a * I, I > 0.0 ? err / I : 1.0};
}

}  // namespace

Cosmology Cosmology::make(SpatialType type, double gamma, double B) {
    if (!(gamma > 2.0 / 3.0 && gamma <= 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must lie in (2/3, 2], got " + fmt(gamma));
    }
    if (!(B > 0.0) || !std::isfinite(B)) {
        throw Error(ErrorCode::InvalidArgument, "density constant B must be positive, got " + fmt(B));
    }
    return Cosmology{type, gamma, B};
}

double Cosmology::density_prefactor() const noexcept { return 8.0 * kPi * B / 3.0; }

double Cosmology::leading_coefficient() const noexcept {
    return std::pow(1.5 * gamma * std::sqrt(density_prefactor()), expansion_exponent());
}

// ---------------------------------------------------------------------------
// ScaleFactorCurve

ScaleFactorCurve::ScaleFactorCurve(Cosmology cosmo, std::vector<Node> nodes, double tol)
    : cosmo_(cosmo), nodes_(std::move(nodes)), tol_(tol) {
    if (nodes_.size() < 2) throw Error(ErrorCode::InvalidArgument, "scale factor curve needs >= 2 nodes");

    const std::size_t m = nodes_.size() - 1;
    inv_cube_piece_.resize(m);
    for (std::size_t i = 0; i < m; ++i) inv_cube_piece_[i] = piece(i, nodes_[i].tau, nodes_[i + 1].tau, -3.0);
    inv_cube_suffix_.assign(m + 1, 0.0);
    for (std::size_t i = m; i-- > 0;) inv_cube_suffix_[i] = inv_cube_suffix_[i + 1] + inv_cube_piece_[i];

    // Richardson extrapolation of a/t^p over the first decade; the leading
    // correction is relative order t^{2 - 4/(3 gamma)}.
    const double p = cosmo_.expansion_exponent();
    const double q = 2.0 - 4.0 / (3.0 * cosmo_.gamma);
    const double t1 = t_seed();
    const double t2 = std::min(10.0 * t1, t_max());
    const double r1 = a(t1) / std::pow(t1, p);
    const double r2 = a(t2) / std::pow(t2, p);
    const double rho = std::pow(t2 / t1, q);
    asymptotic_constant_ = rho > 1.0 + 1e-12 ? (rho * r1 - r2) / (rho - 1.0) : r1;
}

double ScaleFactorCurve::t_seed() const noexcept { return std::exp(nodes_.front().tau); }
double ScaleFactorCurve::t_max() const noexcept { return std::exp(nodes_.back().tau); }

bool ScaleFactorCurve::covers(double t) const noexcept {
    if (!(t > 0.0)) return false;
    const double tau = std::log(t);
    const double slack = 1e-13 * std::max(1.0, std::abs(tau));
    return tau >= nodes_.front().tau - slack && tau <= nodes_.back().tau + slack;
}

ScaleFactorCurve::Local ScaleFactorCurve::locate(double t) const {
    if (!covers(t)) {
        throw Error(ErrorCode::OutOfRange, "t = " + fmt(t) + " outside scale factor curve [" + fmt(t_seed()) +
                                               ", " + fmt(t_max()) + "]");
    }
    const double tau = std::clamp(std::log(t), nodes_.front().tau, nodes_.back().tau);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau,
                               [](double v, const Node& n) { return v < n.tau; });
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    i = std::min(i, nodes_.size() - 2);
    const double h = nodes_[i + 1].tau - nodes_[i].tau;
    return {i, (tau - nodes_[i].tau) / h, h};
}

void ScaleFactorCurve::interpolate(const Local& loc, double& y, double& dy, double& d2y) const {
    const Node& n0 = nodes_[loc.i];
    const Node& n1 = nodes_[loc.i + 1];
    const double h = loc.h;
    // Work relative to y0: the nodal values are O(log t) while the
    // second derivative is recovered at the scale of 1/h^2.
    const double y0 = 0.0, y1 = n1.y - n0.y;
    const double d0 = h * n0.dy, d1 = h * n1.dy;
    const double e0 = h * h * n0.d2y, e1 = h * h * n1.d2y;
    // Quintic Hermite coefficients in the local variable s.
    const double c0 = y0, c1 = d0, c2 = 0.5 * e0;
    const double c3 = -10.0 * y0 - 6.0 * d0 - 1.5 * e0 + 0.5 * e1 - 4.0 * d1 + 10.0 * y1;
    const double c4 = 15.0 * y0 + 8.0 * d0 + 1.5 * e0 - e1 + 7.0 * d1 - 15.0 * y1;
    const double c5 = -6.0 * y0 - 3.0 * d0 - 0.5 * e0 + 0.5 * e1 - 3.0 * d1 + 6.0 * y1;
    const double s = loc.s;
    y = n0.y + c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
    dy = (c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)))) / h;
    d2y = (2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5))) / (h * h);
}

double ScaleFactorCurve::a(double t) const {
    double y, dy, d2y;
    interpolate(locate(t), y, dy, d2y);
    return std::exp(y);
}

double ScaleFactorCurve::a_dot_interpolated(double t) const {
    double y, dy, d2y;
    interpolate(locate(t), y, dy, d2y);
    return std::exp(y) / t * dy;
}

double ScaleFactorCurve::a_ddot_interpolated(double t) const {
    double y, dy, d2y;
    interpolate(locate(t), y, dy, d2y);
    return std::exp(y) / (t * t) * (d2y + dy * dy - dy);
}

double ScaleFactorCurve::piece(std::size_t i, double tau_lo, double tau_hi, double m) const {
    if (tau_hi <= tau_lo) return 0.0;
    const double h = nodes_[i + 1].tau - nodes_[i].tau;
    auto f = [&](double tau) {
        double y, dy, d2y;
        interpolate(Local{i, (tau - nodes_[i].tau) / h, h}, y, dy, d2y);
        return std::exp(tau + m * y);
    };
    return boost::math::quadrature::gauss<double, 10>::integrate(f, tau_lo, tau_hi);
}

double ScaleFactorCurve::range_integral(double t, double t1, double m) const {
    if (t1 < t) throw Error(ErrorCode::InvalidArgument, "integration bounds reversed");
    const Local lo = locate(t);
    const Local hi = locate(t1);
    const double tau_lo = std::clamp(std::log(t), nodes_.front().tau, nodes_.back().tau);
    const double tau_hi = std::clamp(std::log(t1), nodes_.front().tau, nodes_.back().tau);
    if (lo.i == hi.i) return piece(lo.i, tau_lo, tau_hi, m);
    double sum = piece(lo.i, tau_lo, nodes_[lo.i + 1].tau, m);
    for (std::size_t i = lo.i + 1; i < hi.i; ++i) {
        sum += m == -3.0 ? inv_cube_piece_[i] : piece(i, nodes_[i].tau, nodes_[i + 1].tau, m);
    }
    sum += piece(hi.i, nodes_[hi.i].tau, tau_hi, m);
    return sum;
}

double ScaleFactorCurve::integral_inv_a_cubed(double t, double t1) const { return range_integral(t, t1, -3.0); }

double ScaleFactorCurve::integral_inv_a_cubed_to_end(double t) const {
    const Local lo = locate(t);
    const double tau_lo = std::clamp(std::log(t), nodes_.front().tau, nodes_.back().tau);
    return piece(lo.i, tau_lo, nodes_[lo.i + 1].tau, -3.0) + inv_cube_suffix_[lo.i + 1];
}

double ScaleFactorCurve::integral_a(double t, double t1) const { return range_integral(t, t1, 1.0); }

ScaleFactorCurve solve_type_minus1(const Cosmology& cosmo, double t_seed, double t_max, double tol) {
    if (cosmo.spatial_type != SpatialType::TypeMinus1) {
        throw Error(ErrorCode::WrongType, "solve_type_minus1 called for a type 0 cosmology");
    }
    if (!(t_seed > 0.0) || !(t_max > t_seed)) {
        throw Error(ErrorCode::InvalidArgument, "need 0 < t_seed < t_max");
    }
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

    const double K = cosmo.density_prefactor();
    const double gamma = cosmo.gamma;

    // Seed: start from the leading-order power law and correct it with
    // Newton steps on the exact inverse t(a) = \int_0^a da'/f(a').
    double a_seed = cosmo.leading_coefficient() * std::pow(t_seed, cosmo.expansion_exponent());
    TimeOfA toa{};
    for (int it = 0; it < 8; ++it) {
        toa = time_of_a(K, gamma, a_seed);
        const double step = (toa.t - t_seed) * friedmann_rate(K, gamma, a_seed);
        a_seed -= step;
        if (!(a_seed > 0.0)) throw Error(ErrorCode::SeedTooLarge, "seed iteration left a > 0");
        if (std::abs(step) <= 1e-15 * a_seed) break;
    }
    toa = time_of_a(K, gamma, a_seed);
    const double seed_error = std::max(toa.rel_error, std::abs(toa.t - t_seed) / t_seed);
    if (seed_error > tol) {
        throw Error(ErrorCode::SeedTooLarge,
                    "seed relative error " + fmt(seed_error) + " exceeds tolerance " + fmt(tol));
    }

    std::vector<ScaleFactorCurve::Node> nodes;
    const double tau0 = std::log(t_seed);
    const double tau1 = std::log(t_max);
    double y0 = std::log(a_seed);
    {
        const LogRates r = log_rates(K, gamma, tau0, y0);
        nodes.push_back({tau0, y0, r.dy, r.d2y});
    }

    OdeOptions opts;
    opts.rtol = tol;
    opts.atol = tol;
    // A bounded node spacing keeps the quintic interpolant and its first two
    // derivatives far below the integration tolerance.
    opts.h_max = 0.02;
    auto rhs = [K, gamma](double tau, std::span<const double> y, std::span<double> dy) {
        dy[0] = log_rates(K, gamma, tau, y[0]).dy;
    };
    Dopri5 solver(rhs, 1, opts);
    double tau = tau0;
    std::vector<double> state{y0};
    solver.integrate(tau, state, tau1, [&](double x, std::span<const double> y, std::span<const double>) {
        const LogRates r = log_rates(K, gamma, x, y[0]);
        if (!(r.dy > 0.0) || !std::isfinite(y[0])) {
            throw Error(ErrorCode::SolverDiverged, "non-increasing scale factor at tau = " + fmt(x));
        }
        nodes.push_back({x, y[0], r.dy, r.d2y});
    });
    return ScaleFactorCurve(cosmo, std::move(nodes), tol);
}

// ---------------------------------------------------------------------------
// Background

Background::Background(Cosmology cosmo) : cosmo_(cosmo) {
    if (cosmo_.spatial_type != SpatialType::Type0) {
        throw Error(ErrorCode::InvalidArgument, "type -1 background requires a solved scale factor curve");
    }
}

Background::Background(Cosmology cosmo, std::shared_ptr<const ScaleFactorCurve> curve)
    : cosmo_(cosmo), curve_(std::move(curve)) {
    if (cosmo_.spatial_type == SpatialType::TypeMinus1 && !curve_) {
        throw Error(ErrorCode::InvalidArgument, "type -1 background requires a solved scale factor curve");
    }
    if (cosmo_.spatial_type == SpatialType::Type0) curve_.reset();
}

Background Background::make(const Cosmology& cosmo, double t_seed, double t_max, double tol) {
    if (cosmo.spatial_type == SpatialType::Type0) return Background(cosmo);
    return Background(cosmo, std::make_shared<const ScaleFactorCurve>(solve_type_minus1(cosmo, t_seed, t_max, tol)));
}

double Background::t_min() const noexcept { return curve_ ? curve_->t_seed() : 0.0; }

double Background::t_max() const noexcept {
    return curve_ ? curve_->t_max() : std::numeric_limits<double>::infinity();
}

void Background::require_covered(double t) const {
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "t = " + fmt(t) + " must be positive");
    if (curve_ && !curve_->covers(t)) {
        throw Error(ErrorCode::OutOfRange, "t = " + fmt(t) + " outside scale factor curve [" +
                                               fmt(curve_->t_seed()) + ", " + fmt(curve_->t_max()) + "]");
    }
}

ScaleFactorValue Background::scale_factor(double t) const {
    require_covered(t);
    if (!curve_) {
        const double p = cosmo_.expansion_exponent();
        const double a = std::pow(t, p);
        return {a, p * a / t};
    }
    const double a = curve_->a(t);
    return {a, friedmann_rate(cosmo_.density_prefactor(), cosmo_.gamma, a)};
}

double Background::a(double t) const { return scale_factor(t).a; }
double Background::a_dot(double t) const { return scale_factor(t).a_dot; }

double Background::a_ddot(double t) const {
    const ScaleFactorValue v = scale_factor(t);
    if (!curve_) {
        const double p = cosmo_.expansion_exponent();
        return p * (p - 1.0) * v.a / (t * t);
    }
    // a'' = f'(a) f(a) = K (2 - 3 gamma) a^{1 - 3 gamma} / 2
    return 0.5 * cosmo_.density_prefactor() * (2.0 - 3.0 * cosmo_.gamma) * std::pow(v.a, 1.0 - 3.0 * cosmo_.gamma);
}

double Background::a_dddot(double t) const {
    const ScaleFactorValue v = scale_factor(t);
    const double p = cosmo_.expansion_exponent();
    if (!curve_) return p * (p - 1.0) * (p - 2.0) * v.a / (t * t * t);
    const double g = cosmo_.gamma;
    return 0.5 * cosmo_.density_prefactor() * (2.0 - 3.0 * g) * (1.0 - 3.0 * g) * std::pow(v.a, -3.0 * g) * v.a_dot;
}

double Background::rho(double t) const { return cosmo_.B * std::pow(a(t), -3.0 * cosmo_.gamma); }
double Background::pressure(double t) const { return (cosmo_.gamma - 1.0) * rho(t); }

double Background::integral_inv_a_cubed(double t, double t1) const {
    require_covered(t);
    require_covered(t1);
    if (t1 < t) throw Error(ErrorCode::InvalidArgument, "integral bounds must satisfy t <= t1");
    if (curve_) return curve_->integral_inv_a_cubed(t, t1);
    if (cosmo_.stiff()) return std::log(t1 / t);
    const double e = 1.0 - 2.0 / cosmo_.gamma;
    return (std::pow(t, e) - std::pow(t1, e)) / (2.0 / cosmo_.gamma - 1.0);
}

double Background::integral_a_from_zero(double t0) const {
    require_covered(t0);
    const double p = cosmo_.expansion_exponent();
    if (!curve_) return std::pow(t0, p + 1.0) / (p + 1.0);
    const double ts = curve_->t_seed();
    // below the seed the solution is the power law to relative O(t_seed^{2-4/(3 gamma)})
    return curve_->a(ts) * ts / (p + 1.0) + curve_->integral_a(ts, t0);
}

double Background::double_integral_inv_a_cubed(double t0) const {
    // Swap the order: \int_0^{t0} r a(r)^{-3} dr.
    require_covered(t0);
    const double p = cosmo_.expansion_exponent();
    const double e = 2.0 - 3.0 * p;  // exponent of r a^{-3} ~ r^{1 - 3p} after integration
    if (e <= 0.0) return std::numeric_limits<double>::infinity();
    if (!curve_) return std::pow(t0, e) / e;
    const Background& self = *this;
    const double ts = curve_->t_seed();
    const double as = curve_->a(ts);
    const double below = ts * ts / (as * as * as) / e;
    auto f = [&](double tau) {
        const double r = std::exp(tau);
        const double ar = self.a(r);
        return r * r / (ar * ar * ar);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    return below + integrator.integrate(f, std::log(ts), std::log(t0), 1e-12);
}

double Background::weighted_double_integral(double t0) const {
    // \int_0^{t0} a(r)^{-3} (\int_0^r a(s) ds) dr.
    require_covered(t0);
    const double p = cosmo_.expansion_exponent();
    const double e = 2.0 - 2.0 * p;  // r^{-3p} r^{p+1} = r^{1 - 2p}
    if (!curve_) return std::pow(t0, e) / (e * (p + 1.0));
    const double ts = curve_->t_seed();
    const double as = curve_->a(ts);
    // power-law extension below the seed
    const double below = (as * ts / (p + 1.0)) * (ts / (as * as * as)) / e;
    const auto& nodes = curve_->nodes();
    const double tau_end = std::log(t0);
    double inner = as * ts / (p + 1.0);
    double total = below;
    double prev_tau = nodes.front().tau;
    for (std::size_t i = 1; i < nodes.size() && prev_tau < tau_end; ++i) {
        const double hi = std::min(nodes[i].tau, tau_end);
        // Gauss-Legendre on the node interval with the inner integral
        // accumulated by the same rule at each abscissa.
        auto integrand = [&](double tau) {
            const double r = std::exp(tau);
            const double ar = curve_->a(r);
            const double in = inner + (tau > prev_tau ? curve_->integral_a(std::exp(prev_tau), r) : 0.0);
            return r * in / (ar * ar * ar);
        };
        total += boost::math::quadrature::gauss<double, 10>::integrate(integrand, prev_tau, hi);
        inner += curve_->integral_a(std::exp(prev_tau), std::exp(hi));
        prev_tau = hi;
    }
    return total;
}

ScaleFactorValue scale_factor(const Background& bg, double t) { return bg.scale_factor(t); }
double rho(const Background& bg, double t) { return bg.rho(t); }
double integral_inv_a_cubed(const Background& bg, double t, double t1) { return bg.integral_inv_a_cubed(t, t1); }

FarFieldIntegral far_field_integral(const Background& bg, double t, double t_split, double rel_tol) {
    const ScaleFactorCurve* curve = bg.curve();
    if (!curve) throw Error(ErrorCode::WrongType, "far-field integral is only defined for type -1");
    bg.require_covered(t);
    const double T = t_split > 0.0 ? t_split : curve->t_max();
    if (T < t || !curve->covers(T)) {
        throw Error(ErrorCode::OutOfRange, "tail split must satisfy t <= T_split <= t_max");
    }
    const double aT = curve->a(T);
    const double adotT = friedmann_rate(bg.cosmology().density_prefactor(), bg.gamma(), aT);
    const double upper = 0.5 / (aT * aT);
    const double lower = upper / adotT;
    const double tail = 0.5 * (upper + lower);
    const double near = T == curve->t_max() ? curve->integral_inv_a_cubed_to_end(t) : curve->integral_inv_a_cubed(t, T);
    FarFieldIntegral out{near + tail, 0.5 * (upper - lower), tail};
    if (out.error > rel_tol * out.value) {
        throw Error(ErrorCode::TailTooLarge, "tail uncertainty " + fmt(out.error) + " exceeds " +
                                                 fmt(rel_tol) + " relative at t = " + fmt(t));
    }
    return out;
}

}  // namespace cosmowave
