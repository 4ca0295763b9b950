#pragma once

#include <complex>
#include <vector>

#include "cosmowave/spatial.hpp"

namespace cosmowave {

// Half-spectrum of a real field: f(x) = sum_k c_k exp(2 pi i k.x / L) with
// c_k = DFT(f)_k / n^3, stored for k3 = 0..n/2 (FFTW r2c layout).
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(TorusGrid grid);

    static Spectrum forward(const Field& f);
    Field inverse() const;

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return c_.size(); }
    int half() const noexcept { return grid_.n / 2 + 1; }
    std::complex<double>& operator[](std::size_t i) noexcept { return c_[i]; }
    const std::complex<double>& operator[](std::size_t i) const noexcept { return c_[i]; }

    // Signed wavenumber for storage index along a full axis.
    int wavenumber(int idx) const noexcept { return idx <= grid_.n / 2 ? idx : idx - grid_.n; }
    // |k|^2 (integer) at storage slot.
    int k_squared(std::size_t slot) const noexcept;
    // lambda_k = (2 pi / L)^2 |k|^2
    double eigenvalue(std::size_t slot) const noexcept { return grid_.wave_scale() * k_squared(slot); }
    // Multiplicity of the slot in the full spectrum (1 or 2).
    double weight(std::size_t slot) const noexcept;

    // vol * sum_k |c_k|^2 w(lambda_k) over the full spectrum.
    template <class W>
    double weighted_norm_sq(W&& w) const {
        double sum = 0.0;
        for (std::size_t s = 0; s < c_.size(); ++s) sum += weight(s) * std::norm(c_[s]) * w(eigenvalue(s));
        return grid_.flat_volume() * sum;
    }

private:
    TorusGrid grid_;
    std::vector<std::complex<double>> c_;
};

}  // namespace cosmowave
