#pragma once

// Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4) pair).
// Step-size failures are reported as errors instead of silently degrading
// order; callers that need denser sampling cap the step with max_dt.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "pbm/core.hpp"

namespace pbm {

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_dt = std::numeric_limits<double>::infinity();
    double initial_dt = 0.0;  // 0 = choose automatically
    std::uint64_t max_steps = 20'000'000;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

namespace detail {

// Dormand-Prince coefficients (FSAL).
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double dp_b5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784., 11.0 / 84., 0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

// Integrates y' = f(t, y) from t0 to t1 (t1 > t0). The observer is called
// with (t, y) at t0 and after every accepted step; it may be a no-op.
// Throws Error(numeric_budget) on step-size collapse or step-count overflow.
template <std::size_t N, class F, class Observer>
OdeState<N> integrate_adaptive(F&& f, OdeState<N> y, double t0, double t1,
                               const OdeOptions& opt, Observer&& observe) {
    using detail::dp_a;
    using detail::dp_b4;
    using detail::dp_b5;
    using detail::dp_c;

    const double span = t1 - t0;
    if (!(span > 0.0)) {
        if (span == 0.0) {
            observe(t0, y);
            return y;
        }
        throw Error(ErrorClass::config, "integrate_adaptive: t1 < t0");
    }

    double t = t0;
    observe(t, y);

    std::array<OdeState<N>, 7> k;
    OdeState<N> dy{};
    f(t, y, dy);
    k[0] = dy;

    auto err_weight = [&](const OdeState<N>& a, const OdeState<N>& b, std::size_t i) {
        return opt.abs_tol + opt.rel_tol * std::max(std::fabs(a[i]), std::fabs(b[i]));
    };

    double h = opt.initial_dt;
    if (h <= 0.0) {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            ynorm = std::max(ynorm, std::fabs(y[i]));
            fnorm = std::max(fnorm, std::fabs(k[0][i]));
        }
        h = (fnorm > 0.0) ? 0.01 * (1.0 + ynorm) / fnorm : span / 100.0;
    }
    h = std::min({h, span, opt.max_dt});

    const double h_floor = 1e-14 * std::max(1.0, std::fabs(span));
    std::uint64_t steps = 0;

    while (t < t1) {
        double remaining = t1 - t;
        if (remaining <= h_floor) break;  // within roundoff of the endpoint
        if (++steps > opt.max_steps)
            throw Error(ErrorClass::numeric_budget, "integrate_adaptive: step budget exhausted");
        h = std::min({h, remaining, opt.max_dt});
        if (h < h_floor)
            throw Error(ErrorClass::numeric_budget, "integrate_adaptive: step size collapsed");

        for (int s = 1; s < 7; ++s) {
            OdeState<N> ys;
            for (std::size_t i = 0; i < N; ++i) {
                double acc = y[i];
                for (int j = 0; j < s; ++j) acc += h * dp_a[s][j] * k[j][i];
                ys[i] = acc;
            }
            f(t + dp_c[s] * h, ys, dy);
            k[s] = dy;
        }

        OdeState<N> y5, y4;
        for (std::size_t i = 0; i < N; ++i) {
            double acc5 = y[i], acc4 = y[i];
            for (int s = 0; s < 7; ++s) {
                acc5 += h * dp_b5[s] * k[s][i];
                acc4 += h * dp_b4[s] * k[s][i];
            }
            y5[i] = acc5;
            y4[i] = acc4;
        }

        double err2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double e = (y5[i] - y4[i]) / err_weight(y, y5, i);
            err2 += e * e;
        }
        double err = std::sqrt(err2 / N);

        if (err <= 1.0) {
            t += h;
            y = y5;
            k[0] = k[6];  // FSAL
            observe(t, y);
        }
        // on rejection k[0] still holds f(t, y) for the unchanged state

        double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, factor));
    }
    return y;
}

template <std::size_t N, class F>
OdeState<N> integrate_adaptive(F&& f, OdeState<N> y0, double t0, double t1,
                               const OdeOptions& opt = {}) {
    return integrate_adaptive<N>(static_cast<F&&>(f), y0, t0, t1, opt,
                                 [](double, const OdeState<N>&) {});
}

}  // namespace pbm
