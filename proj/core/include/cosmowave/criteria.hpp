#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cosmowave/field.hpp"

namespace cosmowave {

enum class Criterion {
    StiffInclusivePointwise,
    StiffInclusiveSimplified,
    GlobalType0,
    GlobalTypeMinus1,
    PointwiseNonStiff,
};

// CLI / JSON names: stiff-pointwise, stiff-simplified, global-type0,
// global-type-1, pointwise.
std::string_view criterion_name(Criterion c) noexcept;
Criterion criterion_from_name(std::string_view name);

struct CriteriaConstants {
    std::optional<double> C, K, G, epsilon, amplitude, k1, k2, k3, slack;
    double t0 = 0.0;
    bool numerically_certified = false;  // k1..k3 read off the computed curve
};

// Every decisive inequality is oriented as lhs > rhs (lhs >= rhs for the
// energy smallness condition), so margin > 0 whenever it is satisfied.
struct CriteriaReport {
    Criterion criterion = Criterion::GlobalType0;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool advisory = false;
    CriteriaConstants constants;
    // Every individual inequality: (name, lhs, rhs).
    struct Part {
        std::string name;
        double lhs, rhs;
        bool holds;
    };
    std::vector<Part> parts;
};

double global_constant_G(double gamma);

struct ScaleBounds {
    double k1, k2, k3;
};
// k1 t^p <= a <= k2 t^p and a' <= k3 p t^{p-1} on (0, t0], p = 2/(3 gamma),
// from the dense output plus its t -> 0 limit.
ScaleBounds certify_scale_bounds(const Background& bg, double t0);

CriteriaReport check_global_type0(const FieldState& data, double epsilon);
CriteriaReport check_global_type_minus1(const FieldState& data, double epsilon);

// amplitude: the homogeneous wave is amplitude * psi_0 (psi_0 = t^{1-2/gamma}
// or h); defaults to the best fit to the mean velocity. epsilon <= 0 picks the
// smallest epsilon satisfying the energy condition. K defaults to the
// embedding constant of the flat torus.
CriteriaReport check_pointwise_nonstiff(const FieldState& data, std::optional<double> amplitude, double epsilon,
                                        std::optional<double> K = std::nullopt);

// amplitude is the target momentum a^3 psi_t; defaults to its mean at t0.
CriteriaReport check_stiff_inclusive(const FieldState& data, std::optional<double> amplitude,
                                     std::optional<double> C = std::nullopt);
// Three-term screen with the implied constants set to 1; holds if the sum is
// below slack * |amplitude|. Advisory only.
CriteriaReport check_stiff_simplified(const FieldState& data, std::optional<double> amplitude, double slack = 0.1);

}  // namespace cosmowave
