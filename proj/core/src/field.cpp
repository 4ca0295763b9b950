#include "cosmowave/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "cosmowave/homogeneous.hpp"
#include "cosmowave/mode.hpp"
#include "cosmowave/ode.hpp"
#include "cosmowave/spectral.hpp"

namespace cosmowave {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void validate_stops(const FieldState& s, std::span<const double> stops) {
    if (!s.metric) throw Error(ErrorCode::InvalidArgument, "field state has no metric");
    require_same_grid(s.metric->grid(), s.psi.grid());
    require_same_grid(s.psi.grid(), s.psi_dot.grid());
    double prev = s.t;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        const double t = stops[i];
        if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTime, "stop t = " + fmt(t) + " must be positive");
        const bool first_equal = i == 0 && t == s.t;
        if (!first_equal && !(t < prev)) throw Error(ErrorCode::InvalidArgument, "stops must be strictly decreasing");
        prev = t;
        s.background.require_covered(t);
    }
}

// Run fn(i) for i in [0, count) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<FieldState> flat_trajectory(const FieldState& s0, std::span<const double> stops, const EvolveOptions& o) {
    const Spectrum c0 = Spectrum::forward(s0.psi);
    const Spectrum v0 = Spectrum::forward(s0.psi_dot);

    // Group slots by |k|^2; each group shares one fundamental matrix.
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t slot = 0; slot < c0.size(); ++slot) {
        if (c0[slot] == 0.0 && v0[slot] == 0.0) continue;
        groups[c0.k_squared(slot)].push_back(slot);
    }
    std::vector<std::pair<int, std::vector<std::size_t>>> work(groups.begin(), groups.end());

    std::vector<Spectrum> cu(stops.size(), Spectrum(c0.grid())), cv(stops.size(), Spectrum(c0.grid()));
    parallel_for(work.size(), o.threads, [&](std::size_t g) {
        const double lambda = c0.grid().wave_scale() * work[g].first;
        const auto P = mode_propagator(s0.background, lambda, s0.t, stops, o.tol);
        for (std::size_t i = 0; i < stops.size(); ++i) {
            for (std::size_t slot : work[g].second) {
                cu[i][slot] = P[i][0] * c0[slot] + P[i][1] * v0[slot];
                cv[i][slot] = P[i][2] * c0[slot] + P[i][3] * v0[slot];
            }
        }
    });

    std::vector<FieldState> out;
    out.reserve(stops.size());
    for (std::size_t i = 0; i < stops.size(); ++i) {
        out.push_back({stops[i], cu[i].inverse(), cv[i].inverse(), s0.metric, s0.background});
    }
    return out;
}

std::vector<FieldState> curved_trajectory(const FieldState& s0, std::span<const double> stops,
                                          const EvolveOptions& o) {
    for (double t : stops) {
        if (t < o.curved_t_min) {
            throw Error(ErrorCode::CFLViolation, "curved explicit path refuses t = " + fmt(t) +
                                                     " below " + fmt(o.curved_t_min) +
                                                     ": the stability-limited step count grows without bound");
        }
    }
    const SpatialMetric& g = *s0.metric;
    const Background& bg = s0.background;
    const TorusGrid grid = g.grid();
    const std::size_t N = grid.size();

    auto rhs = [&](double tau, std::span<const double> y, std::span<double> dy) {
        const double t = std::exp(tau);
        const double a = bg.a(t);
        Field psi(grid, std::vector<double>(y.begin(), y.begin() + N));
        const Field lap = laplace_beltrami(g, psi);
        const double c1 = t / (a * a * a), c2 = t * a;
        for (std::size_t p = 0; p < N; ++p) {
            dy[p] = c1 * y[N + p];
            dy[N + p] = c2 * lap[p];
        }
    };
    OdeOptions opts;
    opts.rtol = o.tol;
    Dopri5 solver(rhs, 2 * N, opts);

    const double a0 = bg.a(s0.t);
    const double a03 = a0 * a0 * a0;
    std::vector<double> y(2 * N);
    double su = 0.0, sw = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
        y[p] = s0.psi[p];
        y[N + p] = a03 * s0.psi_dot[p];
        su = std::max(su, std::abs(y[p]));
        sw = std::max(sw, std::abs(y[N + p]));
    }
    const double scale_u = su + sw * s0.t / a03;
    const double scale_w = sw + su * s0.t * a0 * g.max_inverse_eigenvalue() / (grid.spacing() * grid.spacing());
    std::vector<double> atol(2 * N);
    for (std::size_t p = 0; p < N; ++p) {
        atol[p] = o.tol * std::max(scale_u, 1e-300);
        atol[N + p] = o.tol * std::max(scale_w, 1e-300);
    }
    solver.set_atol(atol);
    const double h = grid.spacing();
    const double c = std::sqrt(g.max_inverse_eigenvalue());
    solver.set_step_limit([&](double tau) {
        const double t = std::exp(tau);
        return o.cfl_factor * h * bg.a(t) / (t * c);
    });

    std::vector<FieldState> out;
    double tau = std::log(s0.t);
    for (double t : stops) {
        solver.integrate(tau, y, std::log(t));
        const double a = bg.a(t);
        const double a3 = a * a * a;
        FieldState s{t, Field(grid), Field(grid), s0.metric, bg};
        for (std::size_t p = 0; p < N; ++p) {
            s.psi[p] = y[p];
            s.psi_dot[p] = y[N + p] / a3;
        }
        if (!s.psi.all_finite() || !s.psi_dot.all_finite()) {
            throw Error(ErrorCode::SolverDiverged, "non-finite field at t = " + fmt(t));
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Add c cos(2 pi k.x/L) + s sin(2 pi k.x/L) to a half spectrum.
void add_term(Spectrum& sp, std::array<int, 3> k, double c, double s) {
    const int n = sp.grid().n;
    for (int kk : k) {
        if (2 * std::abs(kk) >= n) throw Error(ErrorCode::InvalidArgument, "wavenumber not resolved by the grid");
    }
    auto slot = [&](int k1, int k2, int k3) {
        auto wrap = [n](int v) { return (v % n + n) % n; };
        return (static_cast<std::size_t>(wrap(k1)) * n + wrap(k2)) * sp.half() + k3;
    };
    const std::complex<double> plus(0.5 * c, -0.5 * s);
    if (k[2] > 0) {
        sp[slot(k[0], k[1], k[2])] += plus;
    } else if (k[2] < 0) {
        sp[slot(-k[0], -k[1], -k[2])] += std::conj(plus);
    } else if (k[0] == 0 && k[1] == 0) {
        sp[0] += c;
    } else {
        sp[slot(k[0], k[1], 0)] += plus;
        sp[slot(-k[0], -k[1], 0)] += std::conj(plus);
    }
}

}  // namespace

std::vector<double> geometric_stops(double t0, double t1, int per_decade) {
    if (!(t0 > 0.0) || !(t1 > 0.0) || !(t1 < t0) || per_decade < 1) {
        throw Error(ErrorCode::InvalidArgument, "need t0 > t1 > 0 and at least one stop per decade");
    }
    const int count = static_cast<int>(std::lround(per_decade * std::log10(t0 / t1)));
    std::vector<double> out;
    for (int i = 0; i <= count; ++i) out.push_back(t0 * std::pow(t1 / t0, static_cast<double>(i) / count));
    out.front() = t0;
    out.back() = t1;
    return out;
}

std::vector<FieldState> sample_trajectory(const FieldState& state, std::span<const double> stops,
                                          const EvolveOptions& opts) {
    validate_stops(state, stops);
    std::vector<FieldState> out;
    std::span<const double> rest = stops;
    if (!rest.empty() && rest.front() == state.t) {
        out.push_back(state);
        rest = rest.subspan(1);
    }
    if (rest.empty()) return out;
    auto tail = state.metric->is_flat() ? flat_trajectory(state, rest, opts) : curved_trajectory(state, rest, opts);
    for (auto& s : tail) out.push_back(std::move(s));
    return out;
}

FieldState evolve_field(const FieldState& state, double t_target, const EvolveOptions& opts) {
    if (t_target == state.t) return state;
    if (t_target > state.t) {
        // Forward evolution: same machinery, stops increasing.
        if (!state.metric) throw Error(ErrorCode::InvalidArgument, "field state has no metric");
        state.background.require_covered(t_target);
        const double stops[] = {t_target};
        if (state.metric->is_flat()) return flat_trajectory(state, stops, opts).front();
        return curved_trajectory(state, stops, opts).front();
    }
    const double stops[] = {t_target};
    return sample_trajectory(state, stops, opts).front();
}

FieldState make_initial_data(const InitialDataSpec& spec, const Background& bg,
                             std::shared_ptr<const SpatialMetric> metric, double t0) {
    if (!metric) throw Error(ErrorCode::InvalidArgument, "initial data needs a metric");
    bg.require_covered(t0);
    const TorusGrid grid = metric->grid();
    Spectrum psi(grid), dpsi(grid);
    for (const auto& m : spec.fourier) {
        add_term(psi, m.k, m.psi_c, m.psi_s);
        add_term(dpsi, m.k, m.psi_dot_c, m.psi_dot_s);
    }
    if (spec.random) {
        const RandomBandlimited& r = *spec.random;
        if (r.kmax < 1 || 2 * r.kmax >= grid.n) {
            throw Error(ErrorCode::InvalidArgument, "random data kmax must satisfy 1 <= kmax < n/2");
        }
        std::mt19937_64 rng(r.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        // half lattice: first nonzero component positive
        std::vector<std::array<int, 3>> ks;
        for (int a = -r.kmax; a <= r.kmax; ++a)
            for (int b = -r.kmax; b <= r.kmax; ++b)
                for (int c = -r.kmax; c <= r.kmax; ++c) {
                    const bool positive = a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
                    if (positive) ks.push_back({a, b, c});
                }
        const double norm = r.amplitude / std::sqrt(static_cast<double>(ks.size()));
        for (const auto& k : ks) {
            const double pc = normal(rng), ps = normal(rng), vc = normal(rng), vs = normal(rng);
            add_term(psi, k, norm * pc, norm * ps);
            add_term(dpsi, k, norm * vc, norm * vs);
        }
    }
    FieldState s{t0, psi.inverse(), dpsi.inverse(), std::move(metric), bg};
    if (spec.homogeneous) {
        const HomogeneousWave w(bg, spec.homogeneous->first, spec.homogeneous->second);
        const HomogeneousValue v = w(t0);
        for (std::size_t p = 0; p < s.psi.size(); ++p) {
            s.psi[p] += v.value;
            s.psi_dot[p] += v.d_dt;
        }
    }
    return s;
}

}  // namespace cosmowave
