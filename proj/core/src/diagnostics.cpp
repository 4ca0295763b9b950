#include "cosmowave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>

#include "cosmowave/energies.hpp"
#include "cosmowave/homogeneous.hpp"
#include "cosmowave/mode.hpp"
#include "cosmowave/spectral.hpp"

namespace cosmowave {

namespace {

void require_nonstiff(const Background& bg) {
    if (bg.cosmology().stiff()) throw Error(ErrorCode::WrongRegime, std::string(kStiffRefusal));
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Field quotient(const FieldState& s) {
    const double h = psi_hom_basis(s.background, s.t);
    if (h == 0.0) throw Error(ErrorCode::DenominatorZero, "psi_hom vanishes at a trajectory stop");
    return (1.0 / h) * s.psi;
}

std::vector<Field> laplacians(const SpatialMetric& g, const Field& A, int Nmax) {
    std::vector<Field> out{A};
    for (int N = 1; N <= Nmax; ++N) out.push_back(laplace_beltrami(g, out.back()));
    return out;
}

std::vector<Field> spectral_laplacians(const Spectrum& a, int Nmax) {
    std::vector<Field> out;
    Spectrum s = a;
    out.push_back(s.inverse());
    for (int N = 1; N <= Nmax; ++N) {
        for (std::size_t k = 0; k < s.size(); ++k) s[k] *= -s.eigenvalue(k);
        out.push_back(s.inverse());
    }
    return out;
}

// Linear map (u0, u0') -> A for one eigenvalue.
struct ModeMap {
    double du = 0.0, dv = 0.0;
};

ModeMap rescale_map(const Background& bg, double lambda, double t0, double t_stop, double tol) {
    const double stop[1] = {t_stop};
    const Propagator P = mode_propagator(bg, lambda, t0, stop, tol).front();
    const double h = psi_hom_basis(bg, t_stop);
    return {P[0] / h, P[1] / h};
}

ModeMap stiff_map(const Background& bg, double lambda, double t0, double tol) {
    if (lambda == 0.0) {
        const double a0 = bg.a(t0);
        return {0.0, a0 * a0 * a0 / HomogeneousWave(bg, 1.0).unit_momentum()};
    }
    return {stiff_profile(bg, ModeState{lambda, t0, 1.0, 0.0}, tol).A_mode,
            stiff_profile(bg, ModeState{lambda, t0, 0.0, 1.0}, tol).A_mode};
}

}  // namespace

double fit_convergence_rate(const std::vector<FieldState>& traj) {
    if (traj.size() < 4) throw Error(ErrorCode::NotConverged, "rate fit needs at least 4 stops");
    std::vector<double> x, y;
    Field prev = quotient(traj[traj.size() - 4]);
    for (std::size_t i = traj.size() - 3; i < traj.size(); ++i) {
        Field q = quotient(traj[i]);
        const double d = (q - prev).max_abs();
        if (!(d > 0.0)) throw Error(ErrorCode::NotConverged, "psi/psi_hom has stopped changing; rate undefined");
        x.push_back(std::log(traj[i].t));
        y.push_back(std::log(d));
        prev = std::move(q);
    }
    return slope(x, y);
}

BlowupProfile extract_profile(const std::vector<FieldState>& traj, ProfileMethod method, const ExtractOptions& opts) {
    if (traj.size() < 2) throw Error(ErrorCode::InsufficientSamples, "profile extraction needs a trajectory");
    const FieldState& s0 = traj.front();
    const FieldState& s1 = traj.back();
    const Background& bg = s0.background;
    const bool stiff = bg.cosmology().stiff();
    if (method == ProfileMethod::StiffIntegral && !stiff) {
        throw Error(ErrorCode::MethodMismatch, "the integral representation applies only to gamma = 2");
    }
    BlowupProfile out;
    out.t_stop = s1.t;
    out.heuristic = stiff && method == ProfileMethod::Rescale;

    if (s0.metric->is_flat()) {
        const Spectrum c = Spectrum::forward(s0.psi);
        const Spectrum v = Spectrum::forward(s0.psi_dot);
        Spectrum a(c.grid());
        double peak = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) peak = std::max({peak, std::abs(c[k]), std::abs(v[k])});
        std::map<int, ModeMap> maps;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (std::abs(c[k]) <= 1e-15 * peak && std::abs(v[k]) <= 1e-15 * peak) continue;
            const int k2 = c.k_squared(k);
            auto it = maps.find(k2);
            if (it == maps.end()) {
                const double lam = c.eigenvalue(k);
                const ModeMap m = method == ProfileMethod::StiffIntegral ? stiff_map(bg, lam, s0.t, opts.tol)
                                                                         : rescale_map(bg, lam, s0.t, s1.t, opts.tol);
                it = maps.emplace(k2, m).first;
            }
            a[k] = it->second.du * c[k] + it->second.dv * v[k];
        }
        out.A_laplacians = spectral_laplacians(a, opts.Nmax);
    } else {
        if (method == ProfileMethod::StiffIntegral) {
            throw Error(ErrorCode::UnsupportedMetric,
                        "the integral representation needs the trajectory down to t = 0; flat metrics only");
        }
        out.A_laplacians = laplacians(*s0.metric, quotient(s1), opts.Nmax);
    }
    out.A = out.A_laplacians.front();

    if (traj.size() >= 4) {
        out.convergence_rate = fit_convergence_rate(traj);
    } else if (!stiff) {
        throw Error(ErrorCode::NotConverged, "rate fit needs at least 4 stops");
    }
    for (const auto& s : traj) {
        if (s.t > 10.0 * s1.t) continue;
        const double h = psi_hom_basis(bg, s.t);
        out.remainder_sup = std::max(out.remainder_sup, (s.psi - h * out.A).max_abs());
    }
    return out;
}

LimitCheck limit_equality_check(const std::vector<FieldState>& traj, const BlowupProfile& profile) {
    if (traj.empty()) throw Error(ErrorCode::InsufficientSamples, "empty trajectory");
    const FieldState& s = traj.back();
    require_nonstiff(s.background);
    LimitCheck out;
    out.t = s.t;
    out.weighted_energy = std::pow(s.background.a(s.t), 6) * energy(s, 0);
    const double m = HomogeneousWave(s.background, 1.0).unit_momentum();
    out.target = m * m * inner_product(*s.metric, profile.A, profile.A);
    if (!(out.target > 0.0)) throw Error(ErrorCode::DegenerateData, "profile has zero norm");
    out.residual = std::abs(out.weighted_energy - out.target) / out.target;
    return out;
}

EnergyConvergence energy_convergence_check(const std::vector<FieldState>& traj, const BlowupProfile& profile) {
    if (traj.empty()) throw Error(ErrorCode::InsufficientSamples, "empty trajectory");
    require_nonstiff(traj.front().background);
    EnergyConvergence out;
    std::vector<double> x, y;
    for (const auto& s : traj) {
        const HomogeneousValue h = HomogeneousWave(s.background, 1.0)(s.t);
        const FieldState r{s.t, s.psi - h.value * profile.A, s.psi_dot - h.d_dt * profile.A, s.metric, s.background};
        const double w = std::pow(s.background.a(s.t), 6) * energy(r, 0);
        out.t.push_back(s.t);
        out.weighted.push_back(w);
        if (w > 0.0) {
            x.push_back(std::log(s.t));
            y.push_back(std::log(w));
        }
    }
    out.decreasing = true;
    for (std::size_t i = 1; i < out.weighted.size(); ++i) {
        if (out.weighted[i] > out.weighted[i - 1]) out.decreasing = false;
    }
    if (x.size() >= 2) out.decay_exponent = slope(x, y);
    return out;
}

}  // namespace cosmowave
