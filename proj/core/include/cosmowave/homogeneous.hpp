#pragma once

#include "cosmowave/cosmology.hpp"

namespace cosmowave {

struct HomogeneousValue {
    double value = 0.0;
    double d_dt = 0.0;
};

// Spatially constant wave C1 * psi_0(t) + C2 with
//   type 0, gamma < 2:  psi_0 = t^{1 - 2/gamma}
//   type 0, gamma = 2:  psi_0 = log t
//   type -1:            psi_0 = h(t) = \int_t^\infty a^{-3}
class HomogeneousWave {
public:
    HomogeneousWave(Background bg, double C1, double C2 = 0.0);

    const Background& background() const noexcept { return bg_; }
    double C1() const noexcept { return C1_; }
    double C2() const noexcept { return C2_; }

    HomogeneousValue operator()(double t) const;
    // a^3 d/dt psi_0 for the unit basis wave: (1 - 2/gamma), 1 or -1.
    double unit_momentum() const noexcept;
    // The conserved a^3 d/dt psi_hom = C1 * unit_momentum().
    double momentum() const noexcept { return C1_ * unit_momentum(); }
    // Whether the wave may be divided by (C1 != 0, C2 == 0).
    bool is_rescaling_denominator() const noexcept { return C1_ != 0.0 && C2_ == 0.0; }

    // Tail of h beyond t_max (type -1), fixed at construction.
    double tail() const noexcept { return tail_; }

private:
    Background bg_;
    double C1_;
    double C2_;
    double tail_ = 0.0;
};

HomogeneousValue psi_hom(const HomogeneousWave& w, double t);

// Unit basis wave (C1 = 1, C2 = 0) of the background.
double psi_hom_basis(const Background& bg, double t);

}  // namespace cosmowave
