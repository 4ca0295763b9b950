#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cosmowave/criteria.hpp"
#include "cosmowave/diagnostics.hpp"
#include "cosmowave/field.hpp"
#include "cosmowave/io.hpp"

namespace cosmowave {

struct CriterionRequest {
    Criterion criterion = Criterion::GlobalType0;
    double epsilon = 0.5;  // pointwise: <= 0 means smallest admissible
    std::optional<double> amplitude;
    double slack = 0.1;
};

struct DiagnosticsToggles {
    bool energies = true;
    int Nmax = 2;
    std::optional<bool> rescaled;  // unset: whenever the rescaling is defined
    double epsilon = 0.0;          // 0: default for gamma
    bool flux = true;
    std::optional<ProfileMethod> profile;  // unset: none
    bool limit = false;
    bool energy_convergence = false;
    double monotonicity_tol = 1e-6;
    double flux_tol = 1e-4;
    double limit_tol = 1e-2;
};

struct Sweep {
    std::array<int, 3> k{1, 0, 0};
    std::vector<double> deltas;
};

struct Scenario {
    BackgroundSpec background;
    std::string metric_json;  // as accepted by metric_from_json_text
    InitialDataSpec data;
    double t0 = 1.0;
    std::vector<double> stops;
    EvolveOptions evolve;
    DiagnosticsToggles diagnostics;
    std::vector<CriterionRequest> criteria;
    std::optional<Sweep> sweep;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";
};

// YAML scenario; relative metric file paths resolve against base_dir.
// Errors are ConfigInvalid naming the offending key path.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

std::shared_ptr<const SpatialMetric> scenario_metric(const Scenario& s);
// Data at t0 with the scenario seed applied.
FieldState scenario_initial_state(const Scenario& s, const Background& bg);

struct RunResult {
    int status = 0;  // 0 ok, 2 tolerance violation
    std::vector<std::string> failures;
};

// Evolve, run the enabled diagnostics and criteria, and write summary.json,
// stops.csv, energies.csv, profile_convergence.csv and criteria_sweep.csv
// into s.out_dir.
RunResult run_scenario(const Scenario& s);

}  // namespace cosmowave
