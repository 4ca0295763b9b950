#pragma once

// JSON documents shared by the runner and the command-line tool.

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosmowave/criteria.hpp"
#include "cosmowave/diagnostics.hpp"
#include "cosmowave/energies.hpp"

namespace cosmowave {

using Json = nlohmann::ordered_json;

Json to_json(const EnergyReport& r);
Json to_json(const Violation& v);
Json to_json(const CriteriaReport& r);
Json to_json(const LimitCheck& c);
Json to_json(const EnergyConvergence& c);
// Metadata only; the fields go to the binary file.
Json profile_json(const BlowupProfile& p, const SpatialMetric& g);

// {stops, monotonicity_violations, sequence_violations, flux_residual}
Json energy_document(const std::vector<EnergyReport>& reports, const std::vector<Violation>& monotonicity,
                     const std::vector<Violation>& sequence, std::optional<double> flux_residual);

}  // namespace cosmowave
