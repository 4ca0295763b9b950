#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cosmowave/error.hpp"

namespace cosmowave {

// Uniform periodic grid on [0, L)^3 with n points per axis.
struct TorusGrid {
    int n = 32;
    double L = 1.0;

    static TorusGrid make(int n, double L = 1.0);

    std::size_t size() const noexcept { return static_cast<std::size_t>(n) * n * n; }
    double spacing() const noexcept { return L / n; }
    double flat_volume() const noexcept { return L * L * L; }
    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    // eigenvalue scale (2 pi / L)^2
    double wave_scale() const noexcept;
    bool operator==(const TorusGrid&) const = default;
};

class Field {
public:
    Field() = default;
    explicit Field(TorusGrid grid, double value = 0.0);
    Field(TorusGrid grid, std::vector<double> values);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    double max_abs() const noexcept;
    double min_abs() const noexcept;
    bool all_finite() const noexcept;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s) noexcept;

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

// Build a field from a function of the physical coordinates.
template <class F>
Field sample(const TorusGrid& grid, F&& f) {
    Field out(grid);
    const double h = grid.spacing();
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.n; ++k) out[grid.index(i, j, k)] = f(i * h, j * h, k * h);
    return out;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b);

// One real Fourier term c cos(2 pi k.x / L) + s sin(2 pi k.x / L).
struct FourierTerm {
    std::array<int, 3> k{0, 0, 0};
    double c = 0.0;
    double s = 0.0;
};

Field fourier_series(const TorusGrid& grid, const std::vector<FourierTerm>& terms);

enum class MetricKind { Flat, Conformal, General };

// Riemannian metric on the torus. Symmetric components are stored in the
// order xx, xy, xz, yy, yz, zz.
class SpatialMetric {
public:
    static SpatialMetric flat(TorusGrid grid);
    // g = e^{2 phi} delta
    static SpatialMetric conformal(const Field& phi);
    static SpatialMetric general(const std::array<Field, 6>& g);

    MetricKind kind() const noexcept { return kind_; }
    const TorusGrid& grid() const noexcept { return grid_; }
    bool is_flat() const noexcept { return kind_ == MetricKind::Flat; }

    double sqrt_det(std::size_t i) const noexcept { return kind_ == MetricKind::Flat ? 1.0 : sqrt_det_[i]; }
    // Inverse metric components at a grid point.
    std::array<double, 6> inverse(std::size_t i) const noexcept;
    // max over the grid of the largest eigenvalue of g^{ij}
    double max_inverse_eigenvalue() const noexcept { return max_inv_eig_; }
    double volume() const noexcept { return volume_; }

    // Metric file description (only for metrics built from Fourier data).
    const std::vector<FourierTerm>& phi_terms() const noexcept { return phi_terms_; }
    void set_phi_terms(std::vector<FourierTerm> t) { phi_terms_ = std::move(t); }

private:
    SpatialMetric() = default;
    void finish();

    MetricKind kind_ = MetricKind::Flat;
    TorusGrid grid_;
    std::vector<double> sqrt_det_;
    std::array<std::vector<double>, 6> inv_;
    double max_inv_eig_ = 1.0;
    double volume_ = 1.0;
    std::vector<FourierTerm> phi_terms_;
};

// Laplace-Beltrami operator. Flat: spectral. Curved: divergence form with
// fourth-order centred differences.
Field laplace_beltrami(const SpatialMetric& g, const Field& f);
// Delta^N f
Field laplace_power(const SpatialMetric& g, const Field& f, int N);

// \int_M f dvol_g
double integrate(const SpatialMetric& g, const Field& f);
// \int_M f1 f2 dvol_g
double inner_product(const SpatialMetric& g, const Field& f1, const Field& f2);
// \int_M |grad f|_g^2 dvol_g, consistent with laplace_beltrami:
// gradient_norm_sq(f) = -inner_product(f, laplace_beltrami(f)).
double gradient_norm_sq(const SpatialMetric& g, const Field& f);

// Valid constant K in  ||f||_C0 <= K (||f||_L2^2 + ||Delta f||_L2^2)^{1/2}
// for the flat torus: lattice sum plus a rigorous integral tail bound.
// radius <= 0 picks max(n/2, 256).
double sobolev_constant_K(const SpatialMetric& g, const TorusGrid& grid, double radius = 0.0);
// ||f||_C0 <= C (||f||_L2 + ||Delta f||_L2); C = K.
double elliptic_constant_C(const SpatialMetric& g, const TorusGrid& grid, double radius = 0.0);

// Metric files: {kind, L, n, phi_coeffs: [{k: [k1,k2,k3], c, s}]}, plus for
// kind "general" a "g" object mapping xx..zz to coefficient lists.
SpatialMetric load_metric(const std::filesystem::path& path);
SpatialMetric metric_from_json_text(const std::string& text);
std::string metric_to_json_text(const SpatialMetric& g);

}  // namespace cosmowave
