#include "cosmowave/spectral.hpp"

#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace cosmowave {

namespace {
// The FFTW planner is not re-entrant.
std::mutex planner_mutex;
}  // namespace

Spectrum::Spectrum(TorusGrid grid) : grid_(grid), c_(static_cast<std::size_t>(grid.n) * grid.n * (grid.n / 2 + 1)) {}

Spectrum Spectrum::forward(const Field& f) {
    const TorusGrid& g = f.grid();
    Spectrum out(g);
    std::vector<double> in(f.values());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_r2c_3d(g.n, g.n, g.n, in.data(), reinterpret_cast<fftw_complex*>(out.c_.data()),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan);
    }
    const double norm = 1.0 / static_cast<double>(g.size());
    for (auto& c : out.c_) c *= norm;
    return out;
}

Field Spectrum::inverse() const {
    Field out(grid_);
    std::vector<std::complex<double>> work(c_);  // c2r overwrites its input
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_c2r_3d(grid_.n, grid_.n, grid_.n, reinterpret_cast<fftw_complex*>(work.data()),
                                    out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

int Spectrum::k_squared(std::size_t slot) const noexcept {
    const int h = half();
    const int k3 = static_cast<int>(slot % h);
    const std::size_t rest = slot / h;
    const int k2 = wavenumber(static_cast<int>(rest % grid_.n));
    const int k1 = wavenumber(static_cast<int>(rest / grid_.n));
    return k1 * k1 + k2 * k2 + k3 * k3;
}

double Spectrum::weight(std::size_t slot) const noexcept {
    const int k3 = static_cast<int>(slot % half());
    return (k3 == 0 || 2 * k3 == grid_.n) ? 1.0 : 2.0;
}

}  // namespace cosmowave
