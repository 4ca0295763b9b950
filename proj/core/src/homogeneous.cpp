#include "cosmowave/homogeneous.hpp"

#include <cmath>
#include <limits>

namespace cosmowave {

HomogeneousWave::HomogeneousWave(Background bg, double C1, double C2) : bg_(std::move(bg)), C1_(C1), C2_(C2) {
    if (!std::isfinite(C1) || !std::isfinite(C2)) throw Error(ErrorCode::InvalidArgument, "non-finite amplitude");
    if (const ScaleFactorCurve* c = bg_.curve()) {
        // Evaluating h everywhere reuses the same tail as far_field_integral.
        // At t_max the value is the tail itself, so its relative bracket is not the
        // relevant accuracy measure; callers check h(t) through far_field_integral.
        tail_ = far_field_integral(bg_, c->t_max(), 0.0, std::numeric_limits<double>::infinity()).tail;
    }
}

double HomogeneousWave::unit_momentum() const noexcept {
    if (bg_.type() == SpatialType::TypeMinus1) return -1.0;
    if (bg_.cosmology().stiff()) return 1.0;
    return 1.0 - 2.0 / bg_.gamma();
}

HomogeneousValue HomogeneousWave::operator()(double t) const {
    bg_.require_covered(t);
    const double a = bg_.a(t);
    const double d_dt = momentum() / (a * a * a);
    if (const ScaleFactorCurve* c = bg_.curve()) {
        return {C1_ * (c->integral_inv_a_cubed_to_end(t) + tail_) + C2_, d_dt};
    }
    if (bg_.cosmology().stiff()) return {C1_ * std::log(t) + C2_, d_dt};
    return {C1_ * std::pow(t, 1.0 - 2.0 / bg_.gamma()) + C2_, d_dt};
}

HomogeneousValue psi_hom(const HomogeneousWave& w, double t) { return w(t); }

double psi_hom_basis(const Background& bg, double t) { return HomogeneousWave(bg, 1.0)(t).value; }

}  // namespace cosmowave
