#include "cosmowave/energies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cosmowave/homogeneous.hpp"
#include "cosmowave/spectral.hpp"

namespace cosmowave {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void check_state(const FieldState& s) {
    if (!s.metric) throw Error(ErrorCode::InvalidArgument, "field state has no metric");
    require_same_grid(s.metric->grid(), s.psi.grid());
    require_same_grid(s.psi.grid(), s.psi_dot.grid());
}

// G, dG/dt, d^2G/dt^2 for G = \int |grad psi|^2.
struct GradientSeries {
    double G, dG, d2G;
};

GradientSeries gradient_series(const FieldState& s) {
    const Background& bg = s.background;
    const double a = bg.a(s.t);
    const double H = bg.a_dot(s.t) / a;
    if (s.metric->is_flat()) {
        const Spectrum c = Spectrum::forward(s.psi);
        const Spectrum v = Spectrum::forward(s.psi_dot);
        double G = 0.0, dG = 0.0, d2G = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double lam = c.eigenvalue(k);
            if (lam == 0.0) continue;
            const double w = c.weight(k) * lam;
            const std::complex<double> acc = -lam / (a * a) * c[k] - 3.0 * H * v[k];
            G += w * std::norm(c[k]);
            dG += 2.0 * w * std::real(std::conj(c[k]) * v[k]);
            d2G += 2.0 * w * (std::norm(v[k]) + std::real(std::conj(c[k]) * acc));
        }
        const double vol = c.grid().flat_volume();
        return {vol * G, vol * dG, vol * d2G};
    }
    const SpatialMetric& g = *s.metric;
    const Field lap = laplace_beltrami(g, s.psi);
    const double pv = inner_product(g, s.psi_dot, lap);
    const double G = gradient_norm_sq(g, s.psi);
    const double dG = -2.0 * pv;
    const double d2G = 2.0 * gradient_norm_sq(g, s.psi_dot) - 2.0 * inner_product(g, lap, lap) / (a * a) + 6.0 * H * pv;
    return {G, dG, d2G};
}

// Flux integrand in tau = log t and its first two tau-derivatives.
std::array<double, 3> flux_integrand(const FieldState& s) {
    const Background& bg = s.background;
    const double t = s.t;
    const double a = bg.a(t), ad = bg.a_dot(t), add = bg.a_ddot(t), addd = bg.a_dddot(t);
    const GradientSeries gs = gradient_series(s);
    const double m0 = ad * a * a * a;
    const double m1 = add * a * a * a + 3.0 * ad * ad * a * a;
    const double m2 = addd * a * a * a + 9.0 * ad * add * a * a + 6.0 * ad * ad * ad * a;
    const double phi = m0 * gs.G;
    const double phi1 = m1 * gs.G + m0 * gs.dG;
    const double phi2 = m2 * gs.G + 2.0 * m1 * gs.dG + m0 * gs.d2G;
    return {t * phi, t * (phi + t * phi1), t * (phi + 3.0 * t * phi1 + t * t * phi2)};
}

// \int_t^{t0} w(s)^{-1/2} ds for the rescaled weight.
double inverse_sqrt_weight_integral(const Background& bg, double t, double t0, RescaleKind kind, double eps) {
    if (kind == RescaleKind::Type0Hat) {
        const double e = 1.0 - 0.5 * beta_exponent(bg.gamma());
        return (std::pow(t0, e) - std::pow(t, e)) / e;
    }
    const double be = bg.cosmology().stiff() ? 6.0 : beta_epsilon(bg.gamma(), eps);
    if (be == 6.0) return bg.integral_inv_a_cubed(t, t0);
    auto f = [&](double tau) {
        const double s = std::exp(tau);
        return s * std::pow(bg.a(s), -0.5 * be);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, std::log(t), std::log(t0), 12, 1e-12);
}

}  // namespace

double beta_exponent(double gamma) { return std::max(4.0 / (3.0 * gamma), 4.0 - 4.0 / gamma); }

double beta_epsilon(double gamma, double eps) {
    if (gamma == 2.0) return 6.0;
    return std::max(6.0 * (gamma - 1.0) + eps, 2.0);
}

double default_epsilon(double gamma) { return std::min(0.1, (12.0 - 6.0 * gamma) / 2.0); }

RescaleKind rescale_kind_for(const Background& bg) noexcept {
    return bg.type() == SpatialType::Type0 ? RescaleKind::Type0Hat : RescaleKind::TypeMinus1Hat;
}

double energy(const FieldState& s, int N) {
    check_state(s);
    if (N < 0) throw Error(ErrorCode::InvalidArgument, "energy order must be nonnegative");
    const double a = s.background.a(s.t);
    if (s.metric->is_flat()) {
        const Spectrum c = Spectrum::forward(s.psi);
        const Spectrum v = Spectrum::forward(s.psi_dot);
        double sum = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double lam = c.eigenvalue(k);
            const double l2n = N == 0 ? 1.0 : std::pow(lam, 2 * N);
            sum += c.weight(k) * l2n * (std::norm(v[k]) + lam / (a * a) * std::norm(c[k]));
        }
        return c.grid().flat_volume() * sum;
    }
    const Field f = laplace_power(*s.metric, s.psi, N);
    const Field fd = laplace_power(*s.metric, s.psi_dot, N);
    return inner_product(*s.metric, fd, fd) + gradient_norm_sq(*s.metric, f) / (a * a);
}

std::pair<Field, Field> rescaled_fields(const FieldState& s, RescaleKind kind) {
    check_state(s);
    const Background& bg = s.background;
    if ((kind == RescaleKind::Type0Hat) != (bg.type() == SpatialType::Type0)) {
        throw Error(ErrorCode::WrongType, "rescaling kind does not match the spatial type");
    }
    const HomogeneousValue h = HomogeneousWave(bg, 1.0)(s.t);
    if (!(std::abs(h.value) > 1e-12 * (1.0 + std::abs(h.d_dt) * s.t))) {
        throw Error(ErrorCode::DenominatorZero, "psi_hom vanishes at t = " + fmt(s.t));
    }
    Field hat(s.psi.grid()), hat_dot(s.psi.grid());
    for (std::size_t p = 0; p < hat.size(); ++p) {
        hat[p] = s.psi[p] / h.value;
        hat_dot[p] = (s.psi_dot[p] - hat[p] * h.d_dt) / h.value;
    }
    return {std::move(hat), std::move(hat_dot)};
}

double rescaled_energy(const FieldState& s, int N, RescaleKind kind) {
    auto [hat, hat_dot] = rescaled_fields(s, kind);
    return energy(FieldState{s.t, std::move(hat), std::move(hat_dot), s.metric, s.background}, N);
}

double h1_seminorm(const FieldState& s) {
    check_state(s);
    return std::sqrt(std::max(0.0, gradient_norm_sq(*s.metric, s.psi)));
}

double rescaled_weight(const Background& bg, double t, RescaleKind kind, double eps) {
    if (kind == RescaleKind::Type0Hat) return std::pow(t, beta_exponent(bg.gamma()));
    return std::pow(bg.a(t), beta_epsilon(bg.gamma(), eps));
}

EnergyReport energy_report(const FieldState& s, int Nmax, bool with_rescaled, double eps) {
    EnergyReport r;
    r.t = s.t;
    const double a = s.background.a(s.t);
    r.a6 = std::pow(a, 6);
    for (int N = 0; N <= Nmax; ++N) {
        r.E.push_back(energy(s, N));
        r.weightedE.push_back(r.a6 * r.E.back());
    }
    r.F = h1_seminorm(s);
    if (with_rescaled) {
        const RescaleKind kind = rescale_kind_for(s.background);
        r.rescale_weight = rescaled_weight(s.background, s.t, kind, eps);
        auto [hat, hat_dot] = rescaled_fields(s, kind);
        // Size of the two terms that cancel in d_t psi-hat; sets the noise floor.
        const HomogeneousValue h = HomogeneousWave(s.background, 1.0)(s.t);
        Field big(s.psi.grid());
        for (std::size_t p = 0; p < big.size(); ++p) {
            big[p] = (std::abs(s.psi_dot[p]) + std::abs(hat[p] * h.d_dt)) / std::abs(h.value);
        }
        r.rescaled_scale = r.rescale_weight *
                           energy(FieldState{s.t, Field(s.psi.grid()), std::move(big), s.metric, s.background}, 0);
        const FieldState hs{s.t, std::move(hat), std::move(hat_dot), s.metric, s.background};
        for (int N = 0; N <= Nmax; ++N) {
            r.rescaledE.push_back(energy(hs, N));
            r.weightedRescaledE.push_back(r.rescale_weight * r.rescaledE.back());
        }
    }
    return r;
}

FluxBalance flux_balance(const std::vector<FieldState>& traj, FluxQuadrature q) {
    if (traj.size() < 3) throw Error(ErrorCode::InsufficientSamples, "flux balance needs at least three stops");
    const double decades = std::log10(traj.front().t / traj.back().t);
    if (static_cast<double>(traj.size() - 1) < 8.0 * decades - 1e-9) {
        throw Error(ErrorCode::InsufficientSamples, "flux balance needs at least 8 stops per decade");
    }
    std::vector<std::array<double, 3>> f;
    for (const auto& s : traj) f.push_back(flux_integrand(s));
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double h = std::log(traj[i].t) - std::log(traj[i + 1].t);
        if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory must be strictly decreasing in t");
        const auto& lo = f[i + 1];
        const auto& hi = f[i];
        double piece = 0.5 * h * (lo[0] + hi[0]);
        if (q == FluxQuadrature::Hermite) piece += h * h / 10.0 * (lo[1] - hi[1]) + h * h * h / 120.0 * (lo[2] + hi[2]);
        integral += piece;
    }
    FluxBalance out;
    out.integral = integral;
    const FieldState& s0 = traj.front();
    const FieldState& s1 = traj.back();
    // Arranged as a^6 E(t) + 4 \int = a0^6 E(t0): both sides stay O(a0^6 E0)
    // even when the flux drains almost all of the energy.
    out.lhs = std::pow(s1.background.a(s1.t), 6) * energy(s1, 0) + 4.0 * integral;
    out.rhs = std::pow(s0.background.a(s0.t), 6) * energy(s0, 0);
    const double scale = std::max(std::abs(out.rhs), 1e-300);
    out.residual = std::abs(out.lhs - out.rhs) / scale;
    return out;
}

double flux_balance_residual(const std::vector<FieldState>& traj, FluxQuadrature q) {
    return flux_balance(traj, q).residual;
}

namespace {

template <class Get>
void scan(const std::vector<EnergyReport>& reports, const std::string& name, int N, double floor, double tol,
          bool against_first, Get get, std::vector<Violation>& out) {
    double bound = get(reports.front());
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const double v = get(reports[i]);
        if (v > bound * (1.0 + tol) + floor) out.push_back({name, N, i, reports[i].t, v, bound});
        if (!against_first) bound = std::min(bound, v);
    }
}

std::vector<Violation> violations(const std::vector<EnergyReport>& reports, double tol, bool against_first) {
    std::vector<Violation> out;
    if (reports.empty()) return out;
    // Round-off floor: exactly vanishing energies (homogeneous data) carry
    // transform noise far below this.
    double e0max = 0.0;
    for (const auto& r : reports) e0max = std::max(e0max, r.weightedE.front());
    const double floor = 1e-12 * e0max;
    const std::size_t nN = reports.front().weightedE.size();
    for (std::size_t N = 0; N < nN; ++N) {
        scan(reports, "a6E", static_cast<int>(N), floor, tol, against_first,
             [N](const EnergyReport& r) { return r.weightedE[N]; }, out);
    }
    if (!reports.front().weightedRescaledE.empty()) {
        // Rescaled series lose digits to cancellation; floor against the
        // uncancelled size instead of the (possibly ~0) series itself.
        double rmax = 0.0;
        for (const auto& r : reports) rmax = std::max({rmax, r.weightedRescaledE.front(), 1e-4 * r.rescaled_scale});
        const double rfloor = 1e-12 * rmax + 1e-300;
        for (std::size_t N = 0; N < nN; ++N) {
            scan(reports, "weighted_rescaled_E", static_cast<int>(N), rfloor, tol, against_first,
                 [N](const EnergyReport& r) { return r.weightedRescaledE[N]; }, out);
        }
    }
    return out;
}

}  // namespace

std::vector<Violation> monotonicity_violations(const std::vector<EnergyReport>& reports, double tol) {
    return violations(reports, tol, true);
}

std::vector<Violation> sequence_violations(const std::vector<EnergyReport>& reports, double tol) {
    return violations(reports, tol, false);
}

std::vector<PointwiseBound> pointwise_bound(const std::vector<FieldState>& traj, int N, double C) {
    if (traj.empty()) return {};
    const FieldState& s0 = traj.front();
    const Background& bg = s0.background;
    const double a0 = bg.a(s0.t);
    const double base = laplace_power(*s0.metric, s0.psi, N).max_abs();
    const double amp = C * a0 * a0 * a0 * (std::sqrt(energy(s0, N)) + std::sqrt(energy(s0, N + 1)));
    std::vector<PointwiseBound> out;
    for (const auto& s : traj) {
        const double I = s.t < s0.t ? bg.integral_inv_a_cubed(s.t, s0.t) : 0.0;
        out.push_back({s.t, laplace_power(*s.metric, s.psi, N).max_abs(), base + amp * I});
    }
    return out;
}

std::vector<PointwiseBound> rescaled_pointwise_bound(const std::vector<FieldState>& traj, int N, double C,
                                                     double eps) {
    if (traj.empty()) return {};
    const FieldState& s0 = traj.front();
    const Background& bg = s0.background;
    const RescaleKind kind = rescale_kind_for(bg);
    auto hat_state = [&](const FieldState& s) {
        auto [h, hd] = rescaled_fields(s, kind);
        return FieldState{s.t, std::move(h), std::move(hd), s.metric, s.background};
    };
    const FieldState h0 = hat_state(s0);
    const double w0 = bg.cosmology().stiff() && kind == RescaleKind::TypeMinus1Hat
                          ? std::pow(bg.a(s0.t), 6)
                          : rescaled_weight(bg, s0.t, kind, eps);
    const double base = laplace_power(*s0.metric, h0.psi, N).max_abs();
    const double amp = C * std::sqrt(w0) * (std::sqrt(energy(h0, N)) + std::sqrt(energy(h0, N + 1)));
    std::vector<PointwiseBound> out;
    for (const auto& s : traj) {
        const FieldState hs = hat_state(s);
        const double I = s.t < s0.t ? inverse_sqrt_weight_integral(bg, s.t, s0.t, kind, eps) : 0.0;
        out.push_back({s.t, laplace_power(*s.metric, hs.psi, N).max_abs(), base + amp * I});
    }
    return out;
}

std::vector<PointwiseBound> h1_bound(const std::vector<FieldState>& traj) {
    if (traj.empty()) return {};
    const FieldState& s0 = traj.front();
    const Background& bg = s0.background;
    const double a0 = bg.a(s0.t);
    const double F0 = h1_seminorm(s0);
    const double amp = std::sqrt(2.0) * std::sqrt(energy(s0, 0) + energy(s0, 1)) * a0 * a0 * a0;
    std::vector<PointwiseBound> out;
    for (const auto& s : traj) {
        const double I = s.t < s0.t ? bg.integral_inv_a_cubed(s.t, s0.t) : 0.0;
        out.push_back({s.t, h1_seminorm(s), F0 + amp * I});
    }
    return out;
}

}  // namespace cosmowave
