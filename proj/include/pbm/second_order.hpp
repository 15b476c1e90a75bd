#pragma once

// Second order scalar equations x'' + q(t, x) x = 0: the planar Hamiltonian
// embedding, Hill-coefficient indices, linear-like sandwich verification at
// zero and infinity, the crossing-time estimate, and the truncation at
// infinity that reduces sandwiched equations to asymptotically linear ones.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pbm/certify.hpp"
#include "pbm/core.hpp"
#include "pbm/linear_flow.hpp"
#include "pbm/ode.hpp"

namespace pbm {

struct ScalarCoefficient {
    std::function<double(double t, double x)> q;
    double period = 1.0;
    bool punctured = false;  // (Q_reg*): q undefined at x = 0

    double operator()(double t, double x) const { return q(t, x); }
};

using PeriodicScalar = std::function<double(double)>;

inline LinearSystem hill_system(const PeriodicScalar& a, double T) {
    PeriodicMatrixFunction L{[a](double t) { return Mat2::diag(a(t), 1.0); }, T};
    return {L, T};
}

inline MaslovIndex index_of_hill(const PeriodicScalar& a, double T, const Tolerances& tol = {}) {
    return linear_poincare_data(hill_system(a, T), {}, tol).index;
}

inline MaslovIndex index_of_hill(double a_const, double T, const Tolerances& tol = {}) {
    return index_of_hill([a_const](double) { return a_const; }, T, tol);
}

// Planar embedding x' = y, y' = -q(t, x) x, i.e. H = y^2/2 + int_0^x q xi dxi.
// For punctured coefficients the field extends by zero at x = 0.
inline PlanarHamiltonianSystem to_planar(const ScalarCoefficient& q,
                                         std::optional<PeriodicScalar> a_zero = {},
                                         std::optional<PeriodicScalar> b_infty = {}) {
    ScalarCoefficient qc = q;
    PlanarHamiltonianSystem sys;
    sys.period = q.period;
    sys.grad_H = [qc](double t, Vec2 z) {
        double gx = (z.x == 0.0) ? 0.0 : qc(t, z.x) * z.x;
        return Vec2{gx, z.y};
    };
    if (a_zero) {
        PeriodicScalar a = *a_zero;
        sys.linearization_at_zero =
            PeriodicMatrixFunction{[a](double t) { return Mat2::diag(a(t), 1.0); }, q.period};
    }
    if (b_infty) {
        PeriodicScalar b = *b_infty;
        sys.linearization_at_infinity =
            PeriodicMatrixFunction{[b](double t) { return Mat2::diag(b(t), 1.0); }, q.period};
    }
    return sys;
}

// ---------------------------------------------------------------------------
// sandwich conditions

struct SandwichBounds {
    PeriodicScalar lower, upper;
    double threshold_radius = 1.0;  // r_bar0 (at zero) or r_bar (at infinity)
    MaslovIndex common_index;

    // Validates that both bound systems are nonresonant with equal index.
    static SandwichBounds make(PeriodicScalar lower, PeriodicScalar upper, double T,
                               double threshold, const Tolerances& tol = {}) {
        MaslovIndex il = index_of_hill(lower, T, tol);
        MaslovIndex iu = index_of_hill(upper, T, tol);
        if (il.nullity != 0 || iu.nullity != 0)
            throw Error(ErrorClass::config, "SandwichBounds: a bound system is resonant");
        if (il.index != iu.index)
            throw Error(ErrorClass::config, "SandwichBounds: bound indices differ");
        return {std::move(lower), std::move(upper), threshold, il};
    }
};

enum class SandwichRegion { at_zero, at_infinity };

struct SandwichReport {
    bool passed = false;
    double worst_margin = 0.0;               // min distance of q to either bound
    std::optional<std::pair<double, double>> witness;  // (t, x) of a violation
    MaslovIndex common_index;
};

// Verifies lower(t) < q(t, x) < upper(t) on a (t, x) grid of the region.
// At zero the grid covers 0 < |x| <= r_bar0; at infinity it covers
// r_bar <= |x| <= extent_factor * r_bar.
inline SandwichReport check_sandwich(const ScalarCoefficient& q, const SandwichBounds& bounds,
                                     SandwichRegion region, int grid_t = 128, int grid_x = 128,
                                     double extent_factor = 100.0) {
    SandwichReport rep;
    rep.common_index = bounds.common_index;
    rep.worst_margin = 1e300;
    for (int i = 0; i < grid_t; ++i) {
        double t = q.period * i / grid_t;
        double lo = bounds.lower(t), hi = bounds.upper(t);
        for (int j = 1; j <= grid_x; ++j) {
            double x;
            if (region == SandwichRegion::at_zero) {
                x = bounds.threshold_radius * j / grid_x;
            } else {
                // geometric spacing reaches far enough to expose drift
                double u = static_cast<double>(j - 1) / (grid_x - 1);
                x = bounds.threshold_radius * std::pow(extent_factor, u);
            }
            for (double xs : {x, -x}) {
                double v = q(t, xs);
                double m = std::min(v - lo, hi - v);
                if (m < rep.worst_margin) rep.worst_margin = m;
                if (m <= 0.0 && !rep.witness) rep.witness = {t, xs};
            }
        }
    }
    rep.passed = !rep.witness.has_value();
    return rep;
}

// ---------------------------------------------------------------------------
// crossing lemma

struct CrossingEstimate {
    double Lambda = 0.0;     // max |q| on [0, T] x [-r_bar, r_bar]
    double threshold = 0.0;  // Lambda r_bar T + 2 r_bar / T
    double bound = 0.0;      // 2 r_bar / (|y_bar| - Lambda r_bar T)
};

struct CrossingResult {
    CrossingEstimate estimate;
    double measured = 0.0;  // integrated time to reach |x| = r_bar
};

inline double coefficient_sup(const ScalarCoefficient& q, double r_bar, int grid_t = 128,
                              int grid_x = 256) {
    double m = 0.0;
    for (int i = 0; i < grid_t; ++i) {
        double t = q.period * i / grid_t;
        for (int j = 0; j <= grid_x; ++j) {
            double x = -r_bar + 2.0 * r_bar * j / grid_x;
            if (q.punctured && x == 0.0) continue;
            m = std::max(m, std::fabs(q(t, x)));
        }
    }
    return m;
}

// Analytic crossing-time bound of the lemma plus the measured crossing time.
// From (t1, x1, y1) with |x1| <= r_bar and |y1| above the threshold, the
// solution reaches x = sgn(y1) r_bar monotonically within the bound.
inline CrossingResult crossing_bound(const ScalarCoefficient& q, double r_bar, double t1,
                                     double x1, double y1, const OdeOptions& ode = {}) {
    CrossingResult out;
    out.estimate.Lambda = coefficient_sup(q, r_bar);
    out.estimate.threshold = out.estimate.Lambda * r_bar * q.period + 2.0 * r_bar / q.period;
    if (std::fabs(x1) > r_bar)
        throw Error(ErrorClass::config, "crossing_bound: |x1| must be <= r_bar");
    if (std::fabs(y1) <= out.estimate.threshold)
        throw Error(ErrorClass::config, "crossing_bound: |y1| below the crossing threshold");
    out.estimate.bound = 2.0 * r_bar / (std::fabs(y1) - out.estimate.Lambda * r_bar * q.period);

    double target = (y1 > 0.0) ? r_bar : -r_bar;
    auto rhs = [&q](double t, const OdeState<2>& s, OdeState<2>& ds) {
        ds[0] = s[1];
        ds[1] = (s[0] == 0.0) ? 0.0 : -q(t, s[0]) * s[0];
    };

    // march in small steps, then bisect the first crossing of x = target
    double t = t1;
    OdeState<2> s{x1, y1};
    double dt = out.estimate.bound / 256.0;
    auto crossed = [&](const OdeState<2>& st) {
        return (y1 > 0.0) ? st[0] >= target : st[0] <= target;
    };
    if (crossed(s)) {
        out.measured = 0.0;
        return out;
    }
    double t_lo = t;
    OdeState<2> s_lo = s;
    bool hit = false;
    for (int k = 0; k < 4096; ++k) {
        OdeState<2> nxt = integrate_adaptive<2>(rhs, s, t, t + dt, ode);
        if (crossed(nxt)) {
            t_lo = t;
            s_lo = s;
            hit = true;
            break;
        }
        t += dt;
        s = nxt;
        if (t - t1 > q.period)
            throw Error(ErrorClass::numeric_budget, "crossing_bound: no crossing within T");
    }
    if (!hit) throw Error(ErrorClass::numeric_budget, "crossing_bound: no crossing within T");
    double lo = 0.0, hi = dt;
    for (int k = 0; k < 64 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++k) {
        double mid = 0.5 * (lo + hi);
        OdeState<2> sm = integrate_adaptive<2>(rhs, s_lo, t_lo, t_lo + mid, ode);
        if (crossed(sm))
            hi = mid;
        else
            lo = mid;
    }
    out.measured = (t_lo + hi) - t1;
    return out;
}

// ---------------------------------------------------------------------------
// truncation at infinity

// Replaces q beyond |x| = r_hat by the midline b = (b1 + b2)/2 of the
// sandwich, blended by the cubic smoothstep over one unit of |x|. The result
// is asymptotically linear and agrees with q on |x| <= r_hat.
inline ScalarCoefficient truncate_at_infinity(const ScalarCoefficient& q, double r_hat,
                                              const SandwichBounds& bounds_at_infinity) {
    if (r_hat < bounds_at_infinity.threshold_radius)
        throw Error(ErrorClass::config, "truncate_at_infinity: r_hat < r_bar");
    PeriodicScalar b1 = bounds_at_infinity.lower, b2 = bounds_at_infinity.upper;
    ScalarCoefficient qc = q;
    ScalarCoefficient out;
    out.period = q.period;
    out.punctured = q.punctured;
    out.q = [qc, b1, b2, r_hat](double t, double x) {
        double s = std::fabs(x) - r_hat;
        double b = 0.5 * (b1(t) + b2(t));
        if (s <= 0.0) return qc(t, x);
        if (s >= 1.0) return b;
        double mu = detail::smoothstep(s, 0.0, 1.0);
        return (1.0 - mu) * qc(t, x) + mu * b;
    };
    return out;
}

inline PeriodicScalar sandwich_midline(const SandwichBounds& b) {
    PeriodicScalar lo = b.lower, hi = b.upper;
    return [lo, hi](double t) { return 0.5 * (lo(t) + hi(t)); };
}

struct LinearLikeOptions {
    CertifyOptions certify;
    double r_hat = 0.0;       // 0 = start at 4 * r_bar and escalate
    int max_escalations = 6;
    int sandwich_grid = 128;
};

// Sandwich verification, truncation, certification on the truncated system,
// and the orbit-containment check that transfers every solution back to the
// original equation. Orbits touching the blend shell escalate r_hat.
inline Certificate certify_linear_like(const ScalarCoefficient& q, const SandwichBounds& s0,
                                       const SandwichBounds& s_inf,
                                       const LinearLikeOptions& opt = {}) {
    SandwichReport rep0 =
        check_sandwich(q, s0, SandwichRegion::at_zero, opt.sandwich_grid, opt.sandwich_grid);
    SandwichReport repi = check_sandwich(q, s_inf, SandwichRegion::at_infinity,
                                         opt.sandwich_grid, opt.sandwich_grid);
    if (!rep0.passed || !repi.passed)
        throw Error(ErrorClass::config, "certify_linear_like: sandwich condition violated");

    double r_hat = opt.r_hat > 0.0 ? opt.r_hat : 4.0 * s_inf.threshold_radius;
    Certificate cert;
    for (int esc = 0; esc <= opt.max_escalations; ++esc) {
        ScalarCoefficient q_hat = truncate_at_infinity(q, r_hat, s_inf);
        PlanarHamiltonianSystem sys = to_planar(q_hat, {}, sandwich_midline(s_inf));

        CertifyOptions copt = opt.certify;
        copt.forced_indices = {s0.common_index.index, s_inf.common_index.index};
        cert = certify(sys, copt);
        cert.escalations = esc;
        cert.truncation_radius = r_hat;
        if (!cert.valid) return cert;

        bool in_shell = false;
        for (const auto& sol : cert.found) {
            double max_r = 0.0;
            for (const Vec2& z : sol.orbit.z) max_r = std::max(max_r, z.norm());
            if (max_r >= r_hat) {
                in_shell = true;
                break;
            }
        }
        if (!in_shell) return cert;  // solutions solve the original equation
        r_hat *= 2.0;
    }
    cert.valid = false;
    cert.diagnostic = "certify_linear_like: escalation budget exhausted (orbits kept "
                      "touching the truncation shell)";
    return cert;
}

}  // namespace pbm
