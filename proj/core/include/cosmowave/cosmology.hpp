#pragma once

#include <memory>
#include <vector>

#include "cosmowave/error.hpp"

namespace cosmowave {

enum class SpatialType { Type0, TypeMinus1 };

// Background fluid: equation of state p = (gamma - 1) rho with
// rho = B a^{-3 gamma}, and the spatial type selecting the Friedmann
// constraint (kappa = 0 or -1).
struct Cosmology {
    SpatialType spatial_type = SpatialType::Type0;
    double gamma = 1.0;
    double B = 3.0 / (8.0 * 3.14159265358979323846);

    // Validates 2/3 < gamma <= 2 and B > 0.
    static Cosmology make(SpatialType type, double gamma, double B);

    bool stiff() const noexcept { return gamma == 2.0; }
    // 2 / (3 gamma): a(t) ~ t^p near the singularity.
    double expansion_exponent() const noexcept { return 2.0 / (3.0 * gamma); }
    // 8 pi B / 3.
    double density_prefactor() const noexcept;
    // lim a(t) / t^{2/(3 gamma)} for the kappa = -1 scale factor.
    double leading_coefficient() const noexcept;
};

struct ScaleFactorValue {
    double a = 0.0;
    double a_dot = 0.0;
};

// Dense output of the kappa = -1 scale factor on [t_seed, t_max].
//
// Nodes are stored in the logarithmic variables (tau = log t, y = log a)
// together with dy/dtau and d^2y/dtau^2, and interpolated with quintic
// Hermite polynomials, which keeps a > 0 and (with the strictly positive
// nodal slopes) a increasing. Immutable once built.
class ScaleFactorCurve {
public:
    struct Node {
        double tau;
        double y;
        double dy;
        double d2y;
    };

    ScaleFactorCurve(Cosmology cosmo, std::vector<Node> nodes, double tol);

    const Cosmology& cosmology() const noexcept { return cosmo_; }
    double t_seed() const noexcept;
    double t_max() const noexcept;
    double tol() const noexcept { return tol_; }
    double asymptotic_constant() const noexcept { return asymptotic_constant_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    bool covers(double t) const noexcept;
    // a(t) from the interpolant.
    double a(double t) const;
    // Derivatives of the interpolant itself (not of the ODE right-hand side).
    double a_dot_interpolated(double t) const;
    double a_ddot_interpolated(double t) const;

    // \int_t^{t1} a(s)^{-3} ds on the dense output, t_seed <= t <= t1 <= t_max.
    double integral_inv_a_cubed(double t, double t1) const;
    // \int_t^{t_max} a(s)^{-3} ds, O(1) via suffix sums.
    double integral_inv_a_cubed_to_end(double t) const;
    // \int_t^{t1} a(s) ds on the dense output.
    double integral_a(double t, double t1) const;

private:
    struct Local {
        std::size_t i;
        double s;  // fractional position in [0, 1]
        double h;
    };
    Local locate(double t) const;
    void interpolate(const Local& loc, double& y, double& dy, double& d2y) const;
    // \int over log-time of exp(k tau + m y(tau)) across a partial interval.
    double piece(std::size_t i, double tau_lo, double tau_hi, double m) const;
    double range_integral(double t, double t1, double m) const;

    Cosmology cosmo_;
    std::vector<Node> nodes_;
    double tol_;
    double asymptotic_constant_ = 0.0;
    std::vector<double> inv_cube_piece_;   // per-interval \int a^{-3}
    std::vector<double> inv_cube_suffix_;  // \int_{tau_i}^{tau_max} a^{-3}
};

// Solve  da/dt = sqrt((8 pi B / 3) a^{2 - 3 gamma} + 1),  a(0) = 0  on
// [t_seed, t_max]. Integration runs in tau = log t on y = log a with an
// order-5 embedded Runge-Kutta method.
ScaleFactorCurve solve_type_minus1(const Cosmology& cosmo, double t_seed, double t_max, double tol);

struct FarFieldIntegral {
    double value = 0.0;
    double error = 0.0;  // rigorous bound on |value - h(t)| from the tail
    double tail = 0.0;
};

// Cosmology plus (for type -1) its solved curve; the object every other
// module evaluates the scale factor through. Cheap to copy.
class Background {
public:
    // Type 0 only.
    explicit Background(Cosmology cosmo);
    Background(Cosmology cosmo, std::shared_ptr<const ScaleFactorCurve> curve);

    // Convenience: type 0 directly, type -1 solved with defaults.
    static Background make(const Cosmology& cosmo, double t_seed = 1e-12, double t_max = 1e4,
                           double tol = 1e-11);

    const Cosmology& cosmology() const noexcept { return cosmo_; }
    const ScaleFactorCurve* curve() const noexcept { return curve_.get(); }
    SpatialType type() const noexcept { return cosmo_.spatial_type; }
    double gamma() const noexcept { return cosmo_.gamma; }

    // Smallest and largest admissible time (type 0: [0+, inf)).
    double t_min() const noexcept;
    double t_max() const noexcept;
    void require_covered(double t) const;

    ScaleFactorValue scale_factor(double t) const;
    double a(double t) const;
    double a_dot(double t) const;
    double a_ddot(double t) const;
    double a_dddot(double t) const;
    double rho(double t) const;
    double pressure(double t) const;

    double integral_inv_a_cubed(double t, double t1) const;
    // \int_0^{t0} a(s) ds. Type -1 extends below t_seed by the power law.
    double integral_a_from_zero(double t0) const;
    // \int_0^{t0} \int_s^{t0} a(r)^{-3} dr ds.
    double double_integral_inv_a_cubed(double t0) const;
    // \int_0^{t0} a(s) \int_s^{t0} a(r)^{-3} dr ds.
    double weighted_double_integral(double t0) const;

private:
    Cosmology cosmo_;
    std::shared_ptr<const ScaleFactorCurve> curve_;
};

ScaleFactorValue scale_factor(const Background& bg, double t);
double rho(const Background& bg, double t);
double integral_inv_a_cubed(const Background& bg, double t, double t1);

// h(t) = \int_t^\infty a^{-3} for type -1: dense-output quadrature on
// [t, t_split] plus a tail bracketed between 1/(2 a_dot a^2) and 1/(2 a^2)
// at t_split (a is concave and a_dot >= 1). t_split <= 0 means t_max.
FarFieldIntegral far_field_integral(const Background& bg, double t, double t_split = 0.0,
                                    double rel_tol = 1e-8);

}  // namespace cosmowave
