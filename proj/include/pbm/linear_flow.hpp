#pragma once

// Fundamental solutions of linear periodic planar Hamiltonian systems and
// the closed-form lifted Poincare time map built from the endpoint data
// (theta_bar, K, tau_bar, sigma_bar, theta0), together with its property
// checks (oddness and periodicity of g, range bounds, quadrant structure).

#include <cmath>
#include <string>
#include <vector>

#include "pbm/core.hpp"
#include "pbm/ode.hpp"
#include "pbm/symplectic.hpp"

namespace pbm {

struct LinearSystem {
    PeriodicMatrixFunction L;
    double T = 1.0;

    static LinearSystem constant(Mat2 m, double T) {
        return {PeriodicMatrixFunction::constant(m, T), T};
    }

    // The associated nonlinear handle (grad H = L(t) z), for the lifted flow.
    PlanarHamiltonianSystem as_hamiltonian() const {
        auto L_ = L;
        PlanarHamiltonianSystem sys;
        sys.grad_H = [L_](double t, Vec2 z) { return L_(t) * z; };
        sys.period = T;
        sys.linearization_at_zero = L;
        sys.linearization_at_infinity = L;
        return sys;
    }
};

struct FundamentalSolutionOptions {
    OdeOptions ode;                 // defaults: 1e-10 / 1e-10
    int min_samples = 64;           // initial max_dt = T / min_samples
    int max_refinements = 8;        // halve max_dt this many times on contract failure
};

// Integrates Psi' = J L(t) Psi, Psi(0) = I, sampling densely enough for the
// lift contract. Determinant drift is monitored, not corrected.
inline SymplecticPath fundamental_solution(const LinearSystem& sys,
                                           const FundamentalSolutionOptions& opt = {},
                                           const Tolerances& tol = {}) {
    for (double t : {0.0, 0.25 * sys.T, 0.5 * sys.T, 0.75 * sys.T}) {
        if (!sys.L(t).is_symmetric(1e-7))
            throw Error(ErrorClass::config, "fundamental_solution: L(t) is not symmetric");
    }

    auto rhs = [&sys](double t, const OdeState<4>& y, OdeState<4>& dy) {
        Mat2 l = sys.L(t);
        // columns (y0, y1) and (y2, y3); Psi' = J L Psi with J = (0 1; -1 0)
        dy[0] = l.a21 * y[0] + l.a22 * y[1];
        dy[1] = -(l.a11 * y[0] + l.a12 * y[1]);
        dy[2] = l.a21 * y[2] + l.a22 * y[3];
        dy[3] = -(l.a11 * y[2] + l.a12 * y[3]);
    };

    double max_dt = sys.T / opt.min_samples;
    for (int attempt = 0;; ++attempt) {
        std::vector<std::pair<double, Mat2>> samples;
        OdeOptions ode = opt.ode;
        ode.max_dt = max_dt;
        OdeState<4> y0{1.0, 0.0, 0.0, 1.0};
        integrate_adaptive<4>(rhs, y0, 0.0, sys.T, ode,
                              [&samples](double t, const OdeState<4>& y) {
                                  samples.emplace_back(t, Mat2{y[0], y[2], y[1], y[3]});
                              });
        for (const auto& [t, m] : samples) {
            if (std::fabs(m.det() - 1.0) > tol.det_drift)
                throw Error(ErrorClass::numeric_budget,
                            "fundamental_solution: determinant drift exceeds tolerance");
        }
        try {
            return lift_path(samples, tol);
        } catch (const Error& e) {
            if (e.cls() != ErrorClass::numeric_budget || attempt >= opt.max_refinements) throw;
            max_dt *= 0.5;  // theta moved too fast between samples
        }
    }
}

// Endpoint data plus index: everything the closed-form Poincare map needs.
struct LinearPoincareData {
    EndpointData endpoint;
    MaslovIndex index;
};

inline LinearPoincareData linear_poincare_data(const LinearSystem& sys,
                                               const FundamentalSolutionOptions& opt = {},
                                               const Tolerances& tol = {}) {
    SymplecticPath path = fundamental_solution(sys, opt, tol);
    auto [idx, end] = maslov_index(path, tol);
    return {end, idx};
}

// The bounded angular term g produced by the hyperbolic factor: odd about
// every point of theta0 + (pi/2) Z, hence pi-periodic; zero when tau_bar = 0.
// Evaluated on the canonical half-period and extended by reflection.
inline double g_function(const LinearPoincareData& d, double alpha) {
    double tau = d.endpoint.tau_bar;
    if (d.endpoint.rotation_only || tau <= 0.0) return 0.0;
    double s = std::fmod(alpha - d.endpoint.theta0, kPi);
    if (s < 0.0) s += kPi;
    double sin2 = std::sin(s);
    sin2 *= sin2;
    double num = 1.0 + std::expm1(2.0 * tau) * sin2;
    double den = std::sqrt(1.0 + std::expm1(4.0 * tau) * sin2);
    double ratio = std::min(1.0, num / den);
    double g = std::acos(ratio);
    return (s <= 0.5 * kPi) ? g : -g;
}

// Exact range bound of g: max g = -min g = arccos(1 / cosh tau).
inline double g_max(const LinearPoincareData& d) {
    if (d.endpoint.rotation_only) return 0.0;
    return std::acos(1.0 / std::cosh(d.endpoint.tau_bar));
}

struct PoincareValue {
    double Theta_T = 0.0;  // lifted clockwise angle displacement
    double R_T = 1.0;      // radial expansion factor
};

// Closed form of the lifted Poincare time map of a linear system.
inline PoincareValue closed_form_poincare(const LinearPoincareData& d, double phi) {
    const EndpointData& e = d.endpoint;
    PoincareValue v;
    v.Theta_T = e.theta_bar - static_cast<double>(e.K) * kPi + g_function(d, phi + e.theta_bar);
    if (e.rotation_only || e.tau_bar <= 0.0) {
        v.R_T = 1.0;
    } else {
        double c = std::cos(phi + e.theta_bar - e.theta0);
        double s = std::sin(phi + e.theta_bar - e.theta0);
        v.R_T = std::sqrt(std::exp(-2.0 * e.tau_bar) * c * c + std::exp(2.0 * e.tau_bar) * s * s);
    }
    return v;
}

// Displacement field F(phi, r) = P_T(phi, r) - (phi, r); zero exactly at
// initial points of non-rotating T-periodic solutions.
inline Vec2 F_field(const LinearPoincareData& d, double phi, double r) {
    if (!(r > 0.0)) throw Error(ErrorClass::config, "F_field: r must be positive");
    PoincareValue v = closed_form_poincare(d, phi);
    return {v.Theta_T, r * (v.R_T - 1.0)};
}

// ---------------------------------------------------------------------------
// property suite

struct PropertyCheck {
    std::string name;
    bool passed = false;
    double margin = 0.0;  // worst-case margin; sign convention per check
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    const PropertyCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline int quadrant(Vec2 v, double eps) {
    if (std::fabs(v.x) <= eps || std::fabs(v.y) <= eps) return 0;  // on an axis
    if (v.x > 0.0) return v.y > 0.0 ? 1 : 4;
    return v.y > 0.0 ? 2 : 3;
}

}  // namespace detail

// Grid checks of the structural properties of g and F for one system.
// Nonresonant: P3 (even index) or P4 (odd index). Resonant: the equality
// variants P3'/P4'. For index 0 the quadrant cycle of F is also checked.
inline PropertyReport verify_properties(const LinearPoincareData& d, int grid_n = 512) {
    PropertyReport rep;
    const EndpointData& e = d.endpoint;
    auto g = [&](double a) { return g_function(d, a); };

    double worst_odd = 0.0, worst_per = 0.0, grid_max_g = 0.0, grid_min_g = 0.0;
    for (int i = 0; i <= grid_n; ++i) {
        double u = kPi * i / grid_n;  // one full period of g
        worst_odd = std::max(worst_odd, std::fabs(g(e.theta0 + u) + g(e.theta0 - u)));
        worst_per = std::max(worst_per, std::fabs(g(e.theta0 + u + kPi) - g(e.theta0 + u)));
        double gi = g(e.theta0 + u);
        grid_max_g = std::max(grid_max_g, gi);
        grid_min_g = std::min(grid_min_g, gi);
    }
    // the exact range bound arccos(1/cosh tau) avoids grid-sampling slack
    double max_g = g_max(d);
    rep.checks.push_back({"P1 odd about theta0", worst_odd <= 1e-9, 1e-9 - worst_odd});
    rep.checks.push_back({"P1 pi-periodic", worst_per <= 1e-9, 1e-9 - worst_per});
    rep.checks.push_back({"|g| < pi/2", max_g < 0.5 * kPi, 0.5 * kPi - max_g});
    rep.checks.push_back({"g symmetric range", std::fabs(grid_max_g + grid_min_g) <= 1e-9,
                          1e-9 - std::fabs(grid_max_g + grid_min_g)});

    double abs_tb = std::fabs(e.theta_bar);
    if (d.index.nullity == 0) {
        if (d.index.index % 2 == 0) {
            // P3: range of g strictly dominates |theta_bar|, sum below pi
            rep.checks.push_back({"P3 max g > |theta_bar|", max_g > abs_tb, max_g - abs_tb});
            rep.checks.push_back(
                {"P3 max g + |theta_bar| < pi", max_g + abs_tb < kPi, kPi - (max_g + abs_tb)});
        } else {
            rep.checks.push_back({"P4 max g < |theta_bar|", max_g < abs_tb, abs_tb - max_g});
            rep.checks.push_back(
                {"P4 max g + |theta_bar| > 0", max_g + abs_tb > 0.0, max_g + abs_tb});
        }
    } else {
        // P3'/P4': on the resonant surface the range of g equals |theta_bar|.
        rep.checks.push_back({"P3'/P4' max g = |theta_bar|", std::fabs(max_g - abs_tb) <= 1e-6,
                              1e-6 - std::fabs(max_g - abs_tb)});
        double lo = 1e30, hi = -1e30;
        for (int i = 0; i <= grid_n; ++i) {
            double v = g(e.theta0 + kPi * i / grid_n) + e.theta_bar;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        bool ok = (e.theta_bar <= 0.0) ? (lo > -kPi && hi <= 1e-9) : (lo >= -1e-9 && hi < kPi);
        rep.checks.push_back({"P3'/P4' range of g + theta_bar", ok, 0.0});
    }

    // Radial extremes of the closed form map (attained on the eigen-axes).
    if (!e.rotation_only) {
        double want_max = std::exp(e.tau_bar), want_min = std::exp(-e.tau_bar);
        double rmax = closed_form_poincare(d, e.theta0 - e.theta_bar + 0.5 * kPi).R_T;
        double rmin = closed_form_poincare(d, e.theta0 - e.theta_bar).R_T;
        rep.checks.push_back({"R_T max at theta0 + pi/2 axis", std::fabs(rmax - want_max) <= 1e-9,
                              1e-9 - std::fabs(rmax - want_max)});
        rep.checks.push_back({"R_T min at theta0 axis", std::fabs(rmin - want_min) <= 1e-9,
                              1e-9 - std::fabs(rmin - want_min)});
    }

    // Quadrant cycle of F over a half period (the sign-table structure behind
    // the degree -2 computation); only meaningful for index 0, nullity 0.
    if (d.index.index == 0 && d.index.nullity == 0 && !e.rotation_only) {
        std::vector<int> seq;
        double w0 = e.theta0 - e.theta_bar;
        for (int i = 0; i < 4 * grid_n; ++i) {
            double phi = w0 + kPi * i / (4.0 * grid_n);
            int q = detail::quadrant(F_field(d, phi, 1.0), 1e-12);
            if (q == 0) continue;
            if (seq.empty() || seq.back() != q) seq.push_back(q);
        }
        // expected: one counter-clockwise quadrant cycle; the window may start
        // mid-quadrant (5 entries, wrapping) or on a boundary (4 entries)
        if (seq.size() == 5 && seq.front() == seq.back()) seq.pop_back();
        static const int ccw[4] = {4, 1, 2, 3};
        bool ok = seq.size() == 4;
        if (ok) {
            int off = -1;
            for (int k = 0; k < 4; ++k)
                if (ccw[k] == seq[0]) off = k;
            ok = off >= 0;
            for (int k = 0; ok && k < 4; ++k) ok = seq[static_cast<std::size_t>(k)] == ccw[(off + k) % 4];
        }
        rep.checks.push_back({"index-0 quadrant cycle IV,I,II,III", ok, 0.0});
    }

    return rep;
}

}  // namespace pbm
