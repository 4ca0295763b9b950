#include "cosmowave/report.hpp"

#include <algorithm>
#include <cmath>

namespace cosmowave {

Json to_json(const EnergyReport& r) {
    Json j;
    j["t"] = r.t;
    j["E"] = r.E;
    j["F"] = r.F;
    j["rescaledE"] = r.rescaledE;
    j["weightedE"] = r.weightedE;
    j["weightedRescaledE"] = r.weightedRescaledE;
    j["weights"] = {{"a6", r.a6}, {"rescaled", r.rescale_weight}};
    return j;
}

Json to_json(const Violation& v) {
    return {{"quantity", v.quantity}, {"N", v.N}, {"stop", v.stop}, {"t", v.t}, {"value", v.value}, {"bound", v.bound}};
}

Json to_json(const CriteriaReport& r) {
    Json j;
    j["criterion"] = criterion_name(r.criterion);
    j["holds"] = r.holds;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["advisory"] = r.advisory;
    Json c = Json::object();
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) c[k] = *v;
    };
    put("C", r.constants.C);
    put("K", r.constants.K);
    put("G", r.constants.G);
    put("epsilon", r.constants.epsilon);
    put("amplitude", r.constants.amplitude);
    put("k1", r.constants.k1);
    put("k2", r.constants.k2);
    put("k3", r.constants.k3);
    put("slack", r.constants.slack);
    c["t0"] = r.constants.t0;
    c["numerically_certified"] = r.constants.numerically_certified;
    j["constants_used"] = c;
    Json parts = Json::array();
    for (const auto& p : r.parts) parts.push_back({{"name", p.name}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"holds", p.holds}});
    j["parts"] = parts;
    return j;
}

Json to_json(const LimitCheck& c) {
    return {{"t", c.t}, {"weighted_energy", c.weighted_energy}, {"target", c.target}, {"residual", c.residual}};
}

Json to_json(const EnergyConvergence& c) {
    Json stops = Json::array();
    for (std::size_t i = 0; i < c.t.size(); ++i) stops.push_back({{"t", c.t[i]}, {"weighted", c.weighted[i]}});
    return {{"stops", stops}, {"decay_exponent", c.decay_exponent}, {"decreasing", c.decreasing}};
}

Json profile_json(const BlowupProfile& p, const SpatialMetric& g) {
    Json norms = Json::array();
    for (const auto& f : p.A_laplacians) norms.push_back(std::sqrt(std::max(0.0, inner_product(g, f, f))));
    return {{"t_stop", p.t_stop},
            {"rate", p.convergence_rate},
            {"remainder_sup", p.remainder_sup},
            {"heuristic", p.heuristic},
            {"norms", norms},
            {"min_abs", p.A.min_abs()},
            {"max_abs", p.A.max_abs()}};
}

Json energy_document(const std::vector<EnergyReport>& reports, const std::vector<Violation>& monotonicity,
                     const std::vector<Violation>& sequence, std::optional<double> flux_residual) {
    Json j;
    Json stops = Json::array();
    for (const auto& r : reports) stops.push_back(to_json(r));
    j["stops"] = stops;
    Json mv = Json::array(), sv = Json::array();
    for (const auto& v : monotonicity) mv.push_back(to_json(v));
    for (const auto& v : sequence) sv.push_back(to_json(v));
    j["monotonicity_violations"] = mv;
    j["sequence_violations"] = sv;
    j["flux_residual"] = flux_residual ? Json(*flux_residual) : Json(nullptr);
    return j;
}

}  // namespace cosmowave
