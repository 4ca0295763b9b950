#include "cosmowave/mode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cosmowave/homogeneous.hpp"
#include "cosmowave/ode.hpp"

namespace cosmowave {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void check_time(const Background& bg, double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "t = " + fmt(t) + " must be positive");
    if (t < kTimeFloor * (1.0 - 1e-9)) {
        throw Error(ErrorCode::OutOfRange, "t = " + fmt(t) + " is below the time floor " + fmt(kTimeFloor));
    }
    bg.require_covered(t);
}

// Power-law continuation below t_min for type -1, exact otherwise.
double a_extended(const Background& bg, double t) {
    if (t >= bg.t_min()) return bg.a(t);
    const double ts = bg.t_min();
    return bg.a(ts) * std::pow(t / ts, bg.cosmology().expansion_exponent());
}

std::vector<ModeState> ladder_impl(const Background& bg, const ModeState& s0, std::span<const double> stops,
                                   double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    if (s0.lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "eigenvalue must be nonnegative");
    check_time(bg, s0.t);
    std::vector<ModeState> out;
    out.reserve(stops.size());
    if (stops.empty()) return out;
    const double dir = stops.front() < s0.t ? -1.0 : 1.0;
    double prev = s0.t;
    for (double t : stops) {
        check_time(bg, t);
        if (dir * (t - prev) < 0.0) throw Error(ErrorCode::InvalidArgument, "stops must be monotone");
        prev = t;
    }

    const double lambda = s0.lambda;
    const double a0 = bg.a(s0.t);
    const double w0 = a0 * a0 * a0 * s0.u_dot;
    const double su = std::abs(s0.u) + std::abs(w0) * s0.t / (a0 * a0 * a0);
    const double sw = std::abs(w0) + lambda * s0.t * a0 * std::abs(s0.u);
    if (su == 0.0 && sw == 0.0) {
        for (double t : stops) out.push_back({lambda, t, 0.0, 0.0});
        return out;
    }

    auto rhs = [&bg, lambda](double tau, std::span<const double> y, std::span<double> dy) {
        const double t = std::exp(tau);
        const double a = bg.a(t);
        dy[0] = t * y[1] / (a * a * a);
        dy[1] = -lambda * t * a * y[0];
    };
    OdeOptions opts;
    opts.rtol = tol;
    Dopri5 solver(rhs, 2, opts);
    const std::array<double, 2> atol{tol * std::max(su, 1e-300), tol * std::max(sw, 1e-300)};
    solver.set_atol(atol);

    std::vector<double> y{s0.u, w0};
    double tau = std::log(s0.t);
    for (double t : stops) {
        solver.integrate(tau, y, std::log(t));
        const double a = bg.a(t);
        if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
            throw Error(ErrorCode::SolverDiverged, "non-finite mode amplitude at t = " + fmt(t));
        }
        out.push_back({lambda, t, y[0], y[1] / (a * a * a)});
    }
    return out;
}

}  // namespace

double rescaled_rate_exponent(double gamma) {
    const double beta = std::max(4.0 / (3.0 * gamma), 4.0 - 4.0 / gamma);
    return 1.0 - 0.5 * beta;
}

ModeState evolve_mode(const Background& bg, const ModeState& state, double t_target, double tol) {
    if (t_target == state.t) {
        check_time(bg, t_target);
        return state;
    }
    const double stops[] = {t_target};
    return ladder_impl(bg, state, stops, tol).front();
}

std::vector<ModeState> evolve_mode_ladder(const Background& bg, const ModeState& state,
                                          std::span<const double> stops, double tol) {
    return ladder_impl(bg, state, stops, tol);
}

std::vector<Propagator> mode_propagator(const Background& bg, double lambda, double t0,
                                        std::span<const double> stops, double tol) {
    const auto c1 = ladder_impl(bg, ModeState{lambda, t0, 1.0, 0.0}, stops, tol);
    const auto c2 = ladder_impl(bg, ModeState{lambda, t0, 0.0, 1.0}, stops, tol);
    std::vector<Propagator> out(stops.size());
    for (std::size_t i = 0; i < stops.size(); ++i) {
        out[i] = {c1[i].u, c2[i].u, c1[i].u_dot, c2[i].u_dot};
    }
    return out;
}

ModeAmplitude extract_mode_amplitude(const Background& bg, const ModeState& state, double t_stop, double tol) {
    check_time(bg, t_stop);
    if (!(t_stop < state.t)) throw Error(ErrorCode::InvalidArgument, "t_stop must precede the data time");

    if (bg.cosmology().stiff()) {
        const StiffProfile sp = stiff_profile(bg, state, tol);
        const ModeState s = evolve_mode(bg, state, t_stop, tol);
        const double q = s.u / psi_hom_basis(bg, t_stop);
        return {q, std::abs(q - sp.A_mode), 0.0};
    }

    // Halving ladder covering (up to) two decades above t_stop.
    std::vector<double> stops;
    for (int j = 7; j >= 0; --j) {
        const double t = t_stop * std::ldexp(1.0, j);
        if (t < state.t) stops.push_back(t);
    }
    if (stops.size() < 3) {
        throw Error(ErrorCode::InsufficientSamples, "t_stop too close to the data time for an error estimate");
    }
    const auto traj = ladder_impl(bg, state, stops, tol);
    std::vector<double> q(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) q[i] = traj[i].u / psi_hom_basis(bg, traj[i].t);

    const double qs = q.back();
    const double floor = 1e3 * tol * std::max(std::abs(qs), 1e-300);
    std::vector<double> d;
    for (std::size_t i = 1; i < q.size(); ++i) d.push_back(std::abs(q[i] - q[i - 1]));
    // Increments may pass through zero where two correction terms cancel, so
    // shrinking is required decade by decade rather than step by step.
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double& slot = stops[i + 1] > 10.0 * t_stop ? early : late;
        slot = std::max(slot, d[i]);
    }
    if (early > 0.0 && late > early * (1.0 + 1e-6) + floor) {
        throw Error(ErrorCode::NotConverged, "increments of u/psi_hom do not shrink toward t = " + fmt(t_stop));
    }
    const double last = d.back(), prev = d[d.size() - 2];
    double ratio = prev > floor ? last / prev : 0.0;
    if (bg.type() == SpatialType::Type0) ratio = std::max(ratio, std::exp2(-rescaled_rate_exponent(bg.gamma())));
    ratio = std::min(ratio, 0.999);
    const double err = last <= floor ? floor : last * ratio / (1.0 - ratio);
    return {qs, err, prev > 0.0 ? last / prev : 0.0};
}

StiffProfile stiff_profile(const Background& bg, const ModeState& state, double tol, double t_end) {
    if (!bg.cosmology().stiff()) throw Error(ErrorCode::MethodMismatch, "integral representation requires gamma = 2");
    check_time(bg, state.t);
    const double lambda = state.lambda;
    const double t0 = state.t;
    const double tf = t_end > 0.0 ? t_end : std::max(kTimeFloor, bg.t_min());
    if (!(tf < t0)) throw Error(ErrorCode::InvalidArgument, "t_end must precede the data time");
    const double sign = bg.type() == SpatialType::Type0 ? 1.0 : -1.0;

    // Logarithmic ladder, 20 stops per decade, ending exactly at tf and 2 tf.
    std::vector<double> stops;
    const int per_decade = 20;
    const int count = std::max(4, static_cast<int>(std::ceil(per_decade * std::log10(t0 / tf))));
    for (int i = 1; i <= count; ++i) stops.push_back(t0 * std::pow(tf / t0, static_cast<double>(i) / count));
    stops.back() = tf;
    const auto traj = ladder_impl(bg, state, stops, tol);

    // lambda \int_0^{t} a u via the local log-law u ~ u_t + kappa log(r/t),
    // a ~ a_t (r/t)^{1/3}.
    auto tail_at = [&](const ModeState& s) {
        const double a = bg.a(s.t);
        const double kappa = s.u_dot * s.t;  // = (a^3 u') t / a^3
        return lambda * a * s.t * (0.75 * s.u - 0.5625 * kappa);
    };
    auto momentum = [&](const ModeState& s) {
        const double a = bg.a(s.t);
        return a * a * a * s.u_dot;
    };
    const ModeState& sf = traj.back();
    const ModeState& sf2 = traj[traj.size() - 2];
    StiffProfile out;
    out.t_end = tf;
    out.tail = tail_at(sf);
    const double A = sign * (momentum(sf) + out.tail);
    const double A2 = sign * (momentum(sf2) + tail_at(sf2));
    const double scale = std::abs(momentum(state)) + std::abs(A) + 1e-300;
    if (std::abs(A - A2) > 1e-6 * scale + 1e2 * tol * scale) {
        throw Error(ErrorCode::QuadratureFail, "endpoint extrapolation of the integral term did not settle (" +
                                                   fmt(A) + " vs " + fmt(A2) + ")");
    }
    out.A_mode = A;

    // Remainder r(t) - r(t0) = u(t) - u(t0) - A (psi_hom(t) - psi_hom(t0)).
    const double h0 = psi_hom_basis(bg, t0);
    double M = std::abs(state.u) / (1.0 + std::abs(std::log(t0)));
    for (const auto& s : traj) M = std::max(M, std::abs(s.u) / (1.0 + std::abs(std::log(s.t))));

    // Envelope: |r(t) - r(t0)| <= lambda M \int_t^{t0} a^{-3}(s) I(s) ds with
    // I(s) = \int_0^s a (1 + |log r|) dr, measured against t0^{4/3} - t^{4/3}.
    boost::math::quadrature::tanh_sinh<double> ts;
    auto inner = [&](double s) {
        return ts.integrate([&](double r) { return a_extended(bg, r) * (1.0 + std::abs(std::log(r))); }, 0.0, s,
                            1e-10);
    };
    auto outer_piece = [&](double lo, double hi) {
        auto f = [&](double tau) {
            const double s = std::exp(tau);
            const double a = bg.a(s);
            return s * inner(s) / (a * a * a);
        };
        return boost::math::quadrature::gauss<double, 7>::integrate(f, std::log(lo), std::log(hi));
    };
    double phi = 0.0, prev_t = t0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj[i].t;
        phi += outer_piece(t, prev_t);
        prev_t = t;
        const double env = std::pow(t0, 4.0 / 3.0) - std::pow(t, 4.0 / 3.0);
        out.envelope_C = std::max(out.envelope_C, lambda * M * phi / env);
    }
    const double t043 = std::pow(t0, 4.0 / 3.0);
    for (const auto& s : traj) {
        const double D = s.u - state.u - A * (psi_hom_basis(bg, s.t) - h0);
        const double env = out.envelope_C * (t043 - std::pow(s.t, 4.0 / 3.0));
        out.remainder_sup = std::max(out.remainder_sup, std::abs(D));
        out.r_bound = std::max(out.r_bound, env);
        if (env > 0.0) out.envelope_ratio = std::max(out.envelope_ratio, std::abs(D) / env);
        else if (std::abs(D) > 0.0) out.envelope_ratio = std::numeric_limits<double>::infinity();
        out.ladder_t.push_back(s.t);
        out.ladder_u.push_back(s.u);
    }
    return out;
}

}  // namespace cosmowave
