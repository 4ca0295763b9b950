#pragma once

// Adaptive Dormand-Prince 5(4) integrator.
//
// The stepper keeps its step-size controller state between `integrate`
// calls, so a trajectory sampled at many stops is one continuous solve: a
// step is only shortened when it would overshoot the next stop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cosmowave/error.hpp"

namespace cosmowave {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0.0;  // 0 = pick automatically
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 5'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

// Rhs: void(double x, std::span<const double> y, std::span<double> dydx)
template <class Rhs>
class Dopri5 {
public:
    Dopri5(Rhs rhs, std::size_t dim, OdeOptions opts)
        : rhs_(std::move(rhs)), dim_(dim), opts_(opts),
          k_(7, std::vector<double>(dim)), ytmp_(dim), ynew_(dim), atol_(dim, opts.atol) {}

    // Per-component absolute tolerances (overrides the scalar one).
    void set_atol(std::span<const double> atol) { atol_.assign(atol.begin(), atol.end()); }

    // Optional position-dependent step bound, e.g. a CFL limit. Returns the
    // largest admissible |h| at x.
    void set_step_limit(std::function<double(double)> limit) { step_limit_ = std::move(limit); }

    // Forget the cached derivative; required if y is modified between calls.
    void reset() noexcept { fsal_valid_ = false; }

    const OdeStats& stats() const noexcept { return stats_; }
    double last_step() const noexcept { return h_; }

    // Advance (x, y) to x_end. `observer(x, y, dydx)` is called after every
    // accepted step (not for the initial point).
    template <class Observer>
    void integrate(double& x, std::vector<double>& y, double x_end, Observer&& observer) {
        if (x == x_end) return;
        const double dir = x_end > x ? 1.0 : -1.0;
        if (!fsal_valid_ || fsal_x_ != x) {
            rhs_(x, std::span<const double>(y), std::span<double>(k_[0]));
            ++stats_.rhs_evals;
            fsal_valid_ = true;
        }
        if (h_ == 0.0) h_ = initial_step(x, y, dir);
        double h = dir * std::abs(h_);

        std::size_t steps = 0;
        while (dir * (x_end - x) > 0.0) {
            if (++steps > opts_.max_steps) {
                throw Error(ErrorCode::SolverDiverged, "step budget exhausted at x = " + std::to_string(x));
            }
            double hcap = std::min(opts_.h_max, step_limit_ ? step_limit_(x) : opts_.h_max);
            if (std::abs(h) > hcap) h = dir * hcap;
            bool clipped = false;
            if (dir * (x + h - x_end) > 0.0) {
                h = x_end - x;
                clipped = true;
            }
            if (std::abs(h) < 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
                throw Error(ErrorCode::SolverDiverged, "step size underflow at x = " + std::to_string(x));
            }

            const double err = attempt(x, y, h);
            if (!std::isfinite(err)) {
                h *= 0.25;
                ++stats_.rejected;
                continue;
            }
            if (err <= 1.0) {
                x = clipped ? x_end : x + h;
                std::swap(y, ynew_);
                std::swap(k_[0], k_[6]);  // FSAL
                fsal_x_ = x;
                ++stats_.accepted;
                observer(x, std::span<const double>(y), std::span<const double>(k_[0]));

                // PI controller (Hairer & Wanner, DOPRI5 defaults).
                double fac = err == 0.0 ? 5.0
                                        : 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev_, 0.4 / 5.0);
                fac = std::clamp(fac, 0.2, reject_last_ ? 1.0 : 5.0);
                err_prev_ = std::max(err, 1e-4);
                reject_last_ = false;
                // A step clipped to hit a stop must not shrink the controller's history.
                if (!clipped) h_ = std::abs(h) * fac;
                h = dir * h_;
            } else {
                const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
                h *= fac;
                h_ = std::abs(h);
                reject_last_ = true;
                ++stats_.rejected;
            }
        }
        fsal_x_ = x;
    }

    void integrate(double& x, std::vector<double>& y, double x_end) {
        integrate(x, y, x_end, [](double, std::span<const double>, std::span<const double>) {});
    }

private:
    // One trial step; leaves the 5th-order solution in ynew_ and the FSAL
    // stage in k_[6]. Returns the scaled error norm.
    double attempt(double x, const std::vector<double>& y, double h) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                                b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        auto stage = [&](int out, double cx, auto&& combine) {
            for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y[i] + h * combine(i);
            rhs_(x + cx * h, std::span<const double>(ytmp_), std::span<double>(k_[out]));
            ++stats_.rhs_evals;
        };
        auto& k = k_;
        stage(1, c2, [&](std::size_t i) { return a21 * k[0][i]; });
        stage(2, c3, [&](std::size_t i) { return a31 * k[0][i] + a32 * k[1][i]; });
        stage(3, c4, [&](std::size_t i) { return a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]; });
        stage(4, c5, [&](std::size_t i) {
            return a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i];
        });
        stage(5, 1.0, [&](std::size_t i) {
            return a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i];
        });
        for (std::size_t i = 0; i < dim_; ++i) {
            ynew_[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] + b6 * k[5][i]);
        }
        rhs_(x + h, std::span<const double>(ynew_), std::span<double>(k_[6]));
        ++stats_.rhs_evals;

        double sum = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                                  e7 * k[6][i]);
            const double sc = atol_[i] + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            const double r = e / sc;
            sum += r * r;
        }
        return std::sqrt(sum / static_cast<double>(dim_));
    }

    double initial_step(double x, const std::vector<double>& y, double dir) {
        if (opts_.h_init > 0.0) return opts_.h_init;
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double sc = atol_[i] + opts_.rtol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k_[0][i] / sc) * (k_[0][i] / sc);
        }
        d0 = std::sqrt(d0 / dim_);
        d1 = std::sqrt(d1 / dim_);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, opts_.h_max);
        if (step_limit_) h0 = std::min(h0, step_limit_(x));
        (void)dir;
        return h0;
    }

    Rhs rhs_;
    std::size_t dim_;
    OdeOptions opts_;
    std::vector<std::vector<double>> k_;
    std::vector<double> ytmp_, ynew_, atol_;
    std::function<double(double)> step_limit_;
    OdeStats stats_;
    double h_ = 0.0;
    double err_prev_ = 1e-4;
    bool reject_last_ = false;
    bool fsal_valid_ = false;
    double fsal_x_ = std::numeric_limits<double>::quiet_NaN();
};

template <class Rhs>
Dopri5(Rhs, std::size_t, OdeOptions) -> Dopri5<Rhs>;

}  // namespace cosmowave
