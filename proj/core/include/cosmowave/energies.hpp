#pragma once

#include <string>
#include <vector>

#include "cosmowave/field.hpp"

namespace cosmowave {

enum class RescaleKind { Type0Hat, TypeMinus1Hat };

// beta = max(4/(3 gamma), 4 - 4/gamma)
double beta_exponent(double gamma);
// beta_eps = max(6 (gamma - 1) + eps, 2); 6 in the stiff case.
double beta_epsilon(double gamma, double eps);
// min(0.1, (12 - 6 gamma) / 2)
double default_epsilon(double gamma);

RescaleKind rescale_kind_for(const Background& bg) noexcept;

// E_N = \int |d_t Delta^N psi|^2 + a^{-2} |grad Delta^N psi|_g^2 dvol_g
double energy(const FieldState& s, int N);
// E_N of psi / psi_hom, (psi_hom = t^{1-2/gamma} (log t if gamma = 2) or h).
double rescaled_energy(const FieldState& s, int N, RescaleKind kind);
// sqrt(\int |grad psi|_g^2 dvol_g)
double h1_seminorm(const FieldState& s);

// Weight making the rescaled energy nonincreasing toward t -> 0:
// t^beta (type 0) or a^{beta_eps} (type -1).
double rescaled_weight(const Background& bg, double t, RescaleKind kind, double eps);

// Rescaled pair (psi / psi_hom, d_t of it).
std::pair<Field, Field> rescaled_fields(const FieldState& s, RescaleKind kind);

struct EnergyReport {
    double t = 0.0;
    std::vector<double> E;          // E_N, N = 0..Nmax
    double F = 0.0;                  // H^1 seminorm
    std::vector<double> rescaledE;   // E_N(psi-hat); empty if unavailable
    std::vector<double> weightedE;   // a^6 E_N
    std::vector<double> weightedRescaledE;
    double a6 = 0.0;
    double rescale_weight = 0.0;
    double rescaled_scale = 0.0;     // weighted size of the uncancelled terms
};

EnergyReport energy_report(const FieldState& s, int Nmax, bool with_rescaled, double eps);

// a(t)^6 E(t) = a(t0)^6 E(t0) - 4 \int_t^{t0} a' a^3 \int |grad psi|^2 ds
enum class FluxQuadrature { Trapezoid, Hermite };

struct FluxBalance {
    double lhs = 0.0;       // a(t)^6 E(t) + 4 * integral at the last stop
    double rhs = 0.0;       // a(t0)^6 E(t0)
    double integral = 0.0;  // \int a' a^3 G over the trajectory
    double residual = 0.0;  // |lhs - rhs| / |rhs|
};

FluxBalance flux_balance(const std::vector<FieldState>& traj, FluxQuadrature q = FluxQuadrature::Hermite);
double flux_balance_residual(const std::vector<FieldState>& traj, FluxQuadrature q = FluxQuadrature::Hermite);

struct Violation {
    std::string quantity;
    int N = 0;
    std::size_t stop = 0;
    double t = 0.0;
    double value = 0.0;
    double bound = 0.0;
};

// Weighted energies nonincreasing toward the singularity: each stop against
// the first (the data time), with relative slack `tol`.
std::vector<Violation> monotonicity_violations(const std::vector<EnergyReport>& reports, double tol);
// Same, but every stop against every earlier stop (nonincreasing sequence).
std::vector<Violation> sequence_violations(const std::vector<EnergyReport>& reports, double tol);

// Pointwise bounds checked along a trajectory; every entry compares a
// measured sup norm with the right-hand side of the estimate.
struct PointwiseBound {
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

// ||Delta^N psi(t)||_inf <= ||Delta^N psi(t0)||_inf + C a0^3 (sqrt E_N + sqrt E_{N+1})(t0) \int_t^{t0} a^{-3}
std::vector<PointwiseBound> pointwise_bound(const std::vector<FieldState>& traj, int N, double C);
// Rescaled analogue: the a^{-3} integral is replaced by
// w(t0)^{1/2} \int_t^{t0} w(s)^{-1/2} ds with the rescaled weight w.
std::vector<PointwiseBound> rescaled_pointwise_bound(const std::vector<FieldState>& traj, int N, double C,
                                                     double eps);
// F(t) <= F(t0) + sqrt(2) sqrt(E + E_1)(t0) a0^3 \int_t^{t0} a^{-3}
std::vector<PointwiseBound> h1_bound(const std::vector<FieldState>& traj);

}  // namespace cosmowave
