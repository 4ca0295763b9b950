#include "cosmowave/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cosmowave/energies.hpp"
#include "cosmowave/homogeneous.hpp"
#include "cosmowave/spectral.hpp"

namespace cosmowave {

namespace {

void require_nonstiff(const FieldState& s) {
    if (!s.metric) throw Error(ErrorCode::InvalidArgument, "field state has no metric");
    if (s.background.cosmology().stiff()) throw Error(ErrorCode::WrongRegime, std::string(kStiffRefusal));
}

double margin_of(double lhs, double rhs) {
    const double m = std::max(std::abs(lhs), std::abs(rhs));
    return m > 0.0 ? (lhs - rhs) / m : 0.0;
}

// Decisive part = the one with the smallest margin.
void finish(CriteriaReport& r) {
    r.holds = true;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : r.parts) {
        r.holds = r.holds && p.holds;
        const double m = margin_of(p.lhs, p.rhs);
        if (m < best) {
            best = m;
            r.lhs = p.lhs;
            r.rhs = p.rhs;
        }
    }
    r.margin = best;
}

double mean(const SpatialMetric& g, const Field& f) {
    Field one(f.grid());
    for (std::size_t p = 0; p < one.size(); ++p) one[p] = 1.0;
    return integrate(g, f) / integrate(g, one);
}

CriteriaReport global_check(const FieldState& s, double eps, double G, Criterion which) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
    const SpatialMetric& g = *s.metric;
    const double v2 = inner_product(g, s.psi_dot, s.psi_dot);
    if (!(v2 > 0.0)) throw Error(ErrorCode::DegenerateData, "velocity vanishes identically at t0");
    const Field lap = laplace_beltrami(g, s.psi);
    const Field lap_dot = laplace_beltrami(g, s.psi_dot);
    const double vl2 = inner_product(g, lap_dot, lap_dot);
    const double grad2 = gradient_norm_sq(g, s.psi);
    const double gradlap2 = gradient_norm_sq(g, lap);
    const double gamma = s.background.gamma();
    const double Gt = G * std::pow(s.t, 2.0 - 4.0 / (3.0 * gamma));
    const double a0 = s.background.a(s.t);

    CriteriaReport r;
    r.criterion = which;
    r.constants.G = G;
    r.constants.epsilon = eps;
    r.constants.t0 = s.t;
    const double l1 = eps * (1.0 - Gt) * v2, r1 = Gt * vl2;
    const double l2 = (1.0 - eps) * (1.0 - Gt) * a0 * a0 * v2, r2 = (1.0 + Gt) * grad2 + Gt * gradlap2;
    r.parts.push_back({"velocity", l1, r1, l1 > r1});
    r.parts.push_back({"gradient", l2, r2, l2 > r2});
    finish(r);
    return r;
}

double default_hom_amplitude(const FieldState& s) {
    const double a0 = s.background.a(s.t);
    return a0 * a0 * a0 * mean(*s.metric, s.psi_dot) / HomogeneousWave(s.background, 1.0).unit_momentum();
}

double default_momentum(const FieldState& s) {
    const double a0 = s.background.a(s.t);
    return a0 * a0 * a0 * mean(*s.metric, s.psi_dot);
}

// vol * sum (1 + lambda)^s |c|^2
double sobolev_norm(const Field& f, double s) {
    return std::sqrt(Spectrum::forward(f).weighted_norm_sq([s](double lam) { return std::pow(1.0 + lam, s); }));
}

}  // namespace

std::string_view criterion_name(Criterion c) noexcept {
    switch (c) {
        case Criterion::StiffInclusivePointwise: return "stiff-pointwise";
        case Criterion::StiffInclusiveSimplified: return "stiff-simplified";
        case Criterion::GlobalType0: return "global-type0";
        case Criterion::GlobalTypeMinus1: return "global-type-1";
        case Criterion::PointwiseNonStiff: return "pointwise";
    }
    return "?";
}

Criterion criterion_from_name(std::string_view name) {
    for (Criterion c : {Criterion::StiffInclusivePointwise, Criterion::StiffInclusiveSimplified, Criterion::GlobalType0,
                        Criterion::GlobalTypeMinus1, Criterion::PointwiseNonStiff}) {
        if (criterion_name(c) == name) return c;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown criterion '" + std::string(name) + "'");
}

double global_constant_G(double gamma) {
    const double p = 2.0 / (3.0 * gamma);
    return 4.0 / (1.0 - p * p);
}

ScaleBounds certify_scale_bounds(const Background& bg, double t0) {
    const ScaleFactorCurve* c = bg.curve();
    if (!c) throw Error(ErrorCode::WrongType, "scale bounds are certified for the type -1 curve");
    if (!(t0 > c->t_seed()) || !c->covers(t0)) {
        throw Error(ErrorCode::CertificateFail, "t0 lies outside the range covered by the computed curve");
    }
    const double p = bg.cosmology().expansion_exponent();
    // both ratios tend to the leading coefficient as t -> 0
    const double lim = c->asymptotic_constant();
    if (!(lim > 0.0) || !std::isfinite(lim)) throw Error(ErrorCode::CertificateFail, "no asymptotic constant");
    ScaleBounds b{lim, lim, lim};
    auto visit = [&](double t) {
        const ScaleFactorValue v = bg.scale_factor(t);
        const double tp = std::pow(t, p);
        b.k1 = std::min(b.k1, v.a / tp);
        b.k2 = std::max(b.k2, v.a / tp);
        b.k3 = std::max(b.k3, v.a_dot / (p * tp / t));
    };
    const auto& nodes = c->nodes();
    const double tau0 = std::log(t0);
    for (std::size_t i = 0; i < nodes.size() && nodes[i].tau < tau0; ++i) {
        visit(std::exp(nodes[i].tau));
        const double next = i + 1 < nodes.size() ? std::min(nodes[i + 1].tau, tau0) : tau0;
        visit(std::exp(0.5 * (nodes[i].tau + next)));
    }
    visit(t0);
    return b;
}

CriteriaReport check_global_type0(const FieldState& data, double epsilon) {
    require_nonstiff(data);
    if (data.background.type() != SpatialType::Type0) {
        throw Error(ErrorCode::WrongRegime, "this criterion is stated for spatial type 0");
    }
    return global_check(data, epsilon, global_constant_G(data.background.gamma()), Criterion::GlobalType0);
}

CriteriaReport check_global_type_minus1(const FieldState& data, double epsilon) {
    require_nonstiff(data);
    if (data.background.type() != SpatialType::TypeMinus1) {
        throw Error(ErrorCode::WrongRegime, "this criterion is stated for spatial type -1");
    }
    const ScaleBounds b = certify_scale_bounds(data.background, data.t);
    const double Gt = global_constant_G(data.background.gamma()) * b.k3 * std::pow(b.k2, 3) / std::pow(b.k1, 6);
    CriteriaReport r = global_check(data, epsilon, Gt, Criterion::GlobalTypeMinus1);
    r.constants.k1 = b.k1;
    r.constants.k2 = b.k2;
    r.constants.k3 = b.k3;
    r.constants.numerically_certified = true;
    return r;
}

CriteriaReport check_pointwise_nonstiff(const FieldState& data, std::optional<double> amplitude, double epsilon,
                                        std::optional<double> K) {
    require_nonstiff(data);
    const Background& bg = data.background;
    const double Kv = K ? *K : sobolev_constant_K(*data.metric, data.psi.grid());
    const double amp = amplitude ? *amplitude : default_hom_amplitude(data);
    const HomogeneousValue h = HomogeneousWave(bg, amp)(data.t);
    FieldState diff = data;
    for (std::size_t p = 0; p < diff.psi.size(); ++p) {
        diff.psi[p] -= h.value;
        diff.psi_dot[p] -= h.d_dt;
    }
    const double a6 = std::pow(bg.a(data.t), 6);
    const double e = a6 * (energy(diff, 0) + energy(diff, 1));
    const double eps = epsilon > 0.0 ? epsilon : std::sqrt(e);
    const double factor = bg.type() == SpatialType::Type0 ? 1.0 / std::abs(1.0 - 2.0 / bg.gamma()) : 1.0;

    CriteriaReport r;
    r.criterion = Criterion::PointwiseNonStiff;
    r.constants.K = Kv;
    r.constants.epsilon = eps;
    r.constants.amplitude = amp;
    r.constants.t0 = data.t;
    // The smallness condition is non-strict. An automatic epsilon meets it
    // with equality, so only a user-supplied one is reported as a part.
    if (epsilon > 0.0) r.parts.push_back({"energy", eps * eps, e, eps * eps >= e});
    r.parts.push_back({"amplitude", std::abs(amp), Kv * factor * eps, std::abs(amp) > Kv * factor * eps});
    finish(r);
    return r;
}

CriteriaReport check_stiff_inclusive(const FieldState& data, std::optional<double> amplitude,
                                     std::optional<double> C) {
    if (!data.metric) throw Error(ErrorCode::InvalidArgument, "field state has no metric");
    const Background& bg = data.background;
    const double Cv = C ? *C : elliptic_constant_C(*data.metric, data.psi.grid());
    const double mom = amplitude ? *amplitude : default_momentum(data);
    const double a0 = bg.a(data.t);
    const double a3 = a0 * a0 * a0;
    double dev = 0.0;
    for (std::size_t p = 0; p < data.psi_dot.size(); ++p) dev = std::max(dev, std::abs(a3 * data.psi_dot[p] - mom));
    const double lap = laplace_beltrami(*data.metric, data.psi).max_abs();
    const double Ia = bg.integral_a_from_zero(data.t);
    const double W = bg.weighted_double_integral(data.t);
    if (!std::isfinite(W) || !std::isfinite(Ia)) {
        throw Error(ErrorCode::QuadratureFail, "weighted double integral did not converge");
    }
    const double energies = std::sqrt(energy(data, 1)) + std::sqrt(energy(data, 2));
    const double sum = dev + lap * Ia + Cv * a3 * energies * W;

    CriteriaReport r;
    r.criterion = Criterion::StiffInclusivePointwise;
    r.constants.C = Cv;
    r.constants.amplitude = mom;
    r.constants.t0 = data.t;
    r.parts.push_back({"pointwise", std::abs(mom), sum, std::abs(mom) > sum});
    finish(r);
    return r;
}

CriteriaReport check_stiff_simplified(const FieldState& data, std::optional<double> amplitude, double slack) {
    if (!data.metric) throw Error(ErrorCode::InvalidArgument, "field state has no metric");
    if (!data.metric->is_flat()) throw Error(ErrorCode::UnsupportedMetric, "Sobolev norms are spectral (flat torus)");
    if (!(slack > 0.0)) throw Error(ErrorCode::InvalidArgument, "slack must be positive");
    const Background& bg = data.background;
    const double gamma = bg.gamma();
    const double t0 = data.t;
    const double p = 2.0 / (3.0 * gamma);
    const double g = bg.cosmology().stiff() ? std::pow(t0, 7.0 / 3.0) * (1.0 + std::abs(std::log(t0)))
                                            : (1.0 / (2.0 - 2.0 * p) + 1.0 / (1.0 + p)) * std::pow(t0, 2.0 - 2.0 * p);
    const double mom = amplitude ? *amplitude : default_momentum(data);
    const double a0 = bg.a(t0);
    const double a3 = a0 * a0 * a0;
    double dev = 0.0;
    for (std::size_t q = 0; q < data.psi_dot.size(); ++q) dev = std::max(dev, std::abs(a3 * data.psi_dot[q] - mom));
    const Field lap = laplace_beltrami(*data.metric, data.psi);
    const Field lap_dot = laplace_beltrami(*data.metric, data.psi_dot);
    const double reg = g * (sobolev_norm(lap_dot, 2.0) + sobolev_norm(lap, 3.0)) + std::pow(t0, 1.0 + p) * lap.max_abs();

    CriteriaReport r;
    r.criterion = Criterion::StiffInclusiveSimplified;
    r.advisory = true;
    r.constants.amplitude = mom;
    r.constants.slack = slack;
    r.constants.t0 = t0;
    r.parts.push_back({"velocity", slack * std::abs(mom), dev, slack * std::abs(mom) > dev});
    r.parts.push_back({"regularity", slack * std::abs(mom), reg, slack * std::abs(mom) > reg});
    finish(r);
    return r;
}

}  // namespace cosmowave
