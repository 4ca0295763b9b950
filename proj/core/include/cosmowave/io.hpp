#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cosmowave/diagnostics.hpp"
#include "cosmowave/field.hpp"

namespace cosmowave {

// Parameters that rebuild a Background deterministically.
struct BackgroundSpec {
    Cosmology cosmology;
    double t_seed = 1e-12;
    double t_max = 1e4;
    double tol = 1e-11;

    Background build() const;
};

// FNV-1a over the raw bytes.
std::uint64_t checksum(const void* data, std::size_t bytes) noexcept;

// <stem>.bin holds psi then psi_dot as little-endian doubles in grid order;
// <stem>.json is the sidecar {t, n, L, checksum, fields}.
void write_snapshot(const std::filesystem::path& stem, const FieldState& s);
FieldState read_snapshot(const std::filesystem::path& stem, std::shared_ptr<const SpatialMetric> metric,
                         const Background& bg);

// A directory with trajectory.json (background spec, metric, snapshot list)
// and one snapshot per stop.
void write_trajectory(const std::filesystem::path& dir, const std::vector<FieldState>& traj,
                      const BackgroundSpec& spec);
struct LoadedTrajectory {
    BackgroundSpec spec;
    std::vector<FieldState> states;
};
LoadedTrajectory read_trajectory(const std::filesystem::path& dir);

// <stem>.bin: A, Delta A, ... ; <stem>.json: {t_stop, rate, remainder_sup,
// norms, n, L, checksum}.
void write_profile(const std::filesystem::path& stem, const BlowupProfile& p, const SpatialMetric& g);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace cosmowave
