#pragma once

#include <vector>

#include "cosmowave/field.hpp"

namespace cosmowave {

enum class ProfileMethod { Rescale, StiffIntegral };

// psi = A psi_hom + r near the singularity.
struct BlowupProfile {
    Field A;
    std::vector<Field> A_laplacians;  // Delta^N A, N = 0..Nmax
    double t_stop = 0.0;
    double convergence_rate = 0.0;  // fitted exponent of ||psi/psi_hom - A||_inf in t
    double remainder_sup = 0.0;     // sup |psi - A psi_hom| over the last decade of stops
    bool heuristic = false;         // Rescale used at gamma = 2
};

struct ExtractOptions {
    int Nmax = 2;
    double tol = 1e-10;
};

// Flat metrics assemble A mode by mode from the data at traj.front(); the
// Rescale route evaluates u/psi_hom at the last stop, the StiffIntegral
// route the integral representation. Curved metrics use psi/psi_hom at the
// last stop (Rescale only). The rate is a least-squares fit of log
// increments of psi/psi_hom over the last 4 stops.
BlowupProfile extract_profile(const std::vector<FieldState>& traj, ProfileMethod method,
                              const ExtractOptions& opts = {});

// Least-squares slope of log ||q_i - q_{i+1}||_inf against log t over the
// last 4 stops, q = psi/psi_hom.
double fit_convergence_rate(const std::vector<FieldState>& traj);

struct LimitCheck {
    double t = 0.0;
    double weighted_energy = 0.0;  // a^6 E at the smallest stop
    double target = 0.0;           // (a^3 psi_hom')^2 ||A||^2
    double residual = 0.0;
};

LimitCheck limit_equality_check(const std::vector<FieldState>& traj, const BlowupProfile& profile);

struct EnergyConvergence {
    std::vector<double> t;
    std::vector<double> weighted;  // a^6 E(psi - A psi_hom)
    double decay_exponent = 0.0;   // least-squares slope of log weighted vs log t
    bool decreasing = false;
};

EnergyConvergence energy_convergence_check(const std::vector<FieldState>& traj, const BlowupProfile& profile);

}  // namespace cosmowave
