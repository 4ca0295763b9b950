#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cosmowave/cosmology.hpp"
#include "cosmowave/spatial.hpp"

namespace cosmowave {

struct FieldState {
    double t = 1.0;
    Field psi;
    Field psi_dot;
    std::shared_ptr<const SpatialMetric> metric;
    Background background;
};

struct EvolveOptions {
    double tol = 1e-10;
    int threads = 1;
    // The curved explicit path refuses stops below this time.
    double curved_t_min = 1e-3;
    // Fraction of the discrete stability bound h a / sqrt(max g^{ij}).
    double cfl_factor = 0.5;
};

FieldState evolve_field(const FieldState& state, double t_target, const EvolveOptions& opts = {});

// Snapshots along one continuous evolution; stops strictly decreasing
// (a first stop equal to state.t returns the initial state).
std::vector<FieldState> sample_trajectory(const FieldState& state, std::span<const double> stops,
                                          const EvolveOptions& opts = {});

// Geometric stop ladder from t0 down to t1 with `per_decade` stops per decade
// (t0 included).
std::vector<double> geometric_stops(double t0, double t1, int per_decade);

struct ModeData {
    std::array<int, 3> k{0, 0, 0};
    double psi_c = 0.0, psi_s = 0.0;
    double psi_dot_c = 0.0, psi_dot_s = 0.0;
};

struct RandomBandlimited {
    int kmax = 4;
    std::uint64_t seed = 1;
    double amplitude = 1.0;
};

// Superposition of a homogeneous wave, listed Fourier modes and a random
// band-limited part.
struct InitialDataSpec {
    std::optional<std::pair<double, double>> homogeneous;  // (C1, C2)
    std::vector<ModeData> fourier;
    std::optional<RandomBandlimited> random;
};

FieldState make_initial_data(const InitialDataSpec& spec, const Background& bg,
                             std::shared_ptr<const SpatialMetric> metric, double t0);

}  // namespace cosmowave
