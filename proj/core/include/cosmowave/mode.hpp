#pragma once

#include <array>
#include <span>
#include <vector>

#include "cosmowave/cosmology.hpp"

namespace cosmowave {

// Amplitude of one Laplace-Beltrami eigenmode (Delta e = -lambda e).
struct ModeState {
    double lambda = 0.0;
    double t = 1.0;
    double u = 0.0;
    double u_dot = 0.0;
};

// Smallest time any evolution is allowed to reach.
inline constexpr double kTimeFloor = 1e-12;

// u'' = -lambda a^{-2} u - 3 (a'/a) u', integrated in tau = log t on
// (u, a^3 u') with an adaptive order-5 method. Forward and backward.
ModeState evolve_mode(const Background& bg, const ModeState& state, double t_target, double tol);

// One continuous solve through `stops` (monotone, same direction).
std::vector<ModeState> evolve_mode_ladder(const Background& bg, const ModeState& state,
                                          std::span<const double> stops, double tol);

// Fundamental matrix [[du/du0, du/dv0], [dv/du0, dv/dv0]] (v = u') from t0
// to every stop.
using Propagator = std::array<double, 4>;
std::vector<Propagator> mode_propagator(const Background& bg, double lambda, double t0,
                                        std::span<const double> stops, double tol);

struct ModeAmplitude {
    double A_mode = 0.0;
    double error_estimate = 0.0;
    double observed_ratio = 0.0;  // last increment / previous increment
};

// u(t_stop) / psi_hom(t_stop) with an error estimate from the halving
// ladder above t_stop. For gamma = 2 the integral representation is used as
// the reference instead.
ModeAmplitude extract_mode_amplitude(const Background& bg, const ModeState& state, double t_stop, double tol);

struct StiffProfile {
    double A_mode = 0.0;
    double r_bound = 0.0;         // sup of C (t0^{4/3} - t^{4/3}) over the ladder
    double envelope_C = 0.0;      // measured constant of the remainder envelope
    double remainder_sup = 0.0;   // sup |r(t) - r(t0)| over the ladder
    double envelope_ratio = 0.0;  // sup |r(t) - r(t0)| / (C (t0^{4/3} - t^{4/3}))
    double tail = 0.0;            // lambda \int_0^{t_end} a u, added analytically
    double t_end = 0.0;
    std::vector<double> ladder_t;
    std::vector<double> ladder_u;
};

// gamma = 2: A = (a^3 u')(t0) + lambda \int_0^{t0} a u dr for type 0 and the
// negative of that for type -1, so that u ~ A psi_hom in both cases.
StiffProfile stiff_profile(const Background& bg, const ModeState& state, double tol, double t_end = 0.0);

// Convergence exponent of increments of psi / psi_hom: 1 - beta/2 (type 0).
double rescaled_rate_exponent(double gamma);

}  // namespace cosmowave
