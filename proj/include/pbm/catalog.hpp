#pragma once

// Built-in systems: linear references (rotation, saddle, shear) and the
// autonomous sharpness examples. Each nonlinear entry stores its intended
// (i0, i_infty, solution count) and the validation grid re-derives them; the
// counts are artifacts of the construction, never assumed.
//
// The small-period rule: for autonomous entries the period is kept below
// 2 pi / sup|Hess H|, so nonconstant orbits cannot close up in time T and the
// only T-periodic solutions are equilibria.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pbm/certify.hpp"
#include "pbm/core.hpp"
#include "pbm/degree.hpp"
#include "pbm/linear_flow.hpp"
#include "pbm/second_order.hpp"

namespace pbm {

struct LabeledPoint {
    std::string label;  // A, B, M, S per the portrait conventions
    Vec2 position;
};

struct CatalogMeta {
    long i0 = 0;
    long i_infty = 0;
    int solution_count = 0;  // nonzero T-periodic solutions
    std::vector<LabeledPoint> known_solutions;
    double hessian_bound = 0.0;  // grid estimate of sup|Hess H|
};

struct SecondOrderPayload {
    ScalarCoefficient q;
    double a_lo = 0.0, a_hi = 0.0, r0_bar = 0.0;   // sandwich at zero
    double b_lo = 0.0, b_hi = 0.0, rinf_bar = 0.0;  // sandwich at infinity
};

struct CatalogEntry {
    std::string name;
    std::string description;
    PlanarHamiltonianSystem system;
    std::optional<LinearSystem> linear;          // exactly linear entries
    std::optional<SecondOrderPayload> second_order;
    CatalogMeta meta;
    bool certifiable = false;
};

namespace catalog_detail {

inline PlanarHamiltonianSystem figure1_system() {
    // H = y^2/2 + x^2/2 - log(1 + x^2): double well, saddle at the origin,
    // centers A = (-1, 0) and B = (1, 0). q(x) = (x^2 - 1) / (x^2 + 1).
    PlanarHamiltonianSystem sys;
    sys.period = 1.0;
    sys.grad_H = [](double, Vec2 z) {
        double q = (z.x * z.x - 1.0) / (z.x * z.x + 1.0);
        return Vec2{q * z.x, z.y};
    };
    sys.linearization_at_zero = PeriodicMatrixFunction::constant(Mat2::diag(-1.0, 1.0), 1.0);
    sys.linearization_at_infinity = PeriodicMatrixFunction::constant(Mat2::identity(), 1.0);
    return sys;
}

inline PlanarHamiltonianSystem figure2_system() {
    // H = f(s) + eps x g(s) with s = |z|^2/2, f'(s) = (s-1)/(s+1) and
    // g(s) = s/(1+s)^2. The counter-clockwise center at the origin reverses
    // into clockwise rotation at infinity; the perturbation breaks the
    // critical circle into a center M and a saddle S on the x axis.
    constexpr double eps = 0.2;
    PlanarHamiltonianSystem sys;
    sys.period = 1.0;
    sys.grad_H = [](double, Vec2 z) {
        double s = 0.5 * (z.x * z.x + z.y * z.y);
        double fp = (s - 1.0) / (s + 1.0);
        double onep = 1.0 + s;
        double g = s / (onep * onep);
        double gp = (1.0 - s) / (onep * onep * onep);
        return Vec2{fp * z.x + eps * (g + z.x * z.x * gp), fp * z.y + eps * z.x * z.y * gp};
    };
    sys.linearization_at_zero = PeriodicMatrixFunction::constant(Mat2::diag(-1.0, -1.0), 1.0);
    sys.linearization_at_infinity = PeriodicMatrixFunction::constant(Mat2::identity(), 1.0);
    return sys;
}

// Outer Hamiltonian of figure 3: Re(-z^2/2 + 2 S z) - S^2 log|z|, whose
// gradient is conj(-(z - S)^2 / z). The double zero at z = S is an exact
// monkey saddle (vector-field index -2), the mechanism that makes the
// even-i_infty lower bound sharp with a single solution.
inline constexpr double kFig3S = 6.0;
inline constexpr double kFig3SLo = 2.0;  // chi ramps over s in [2, 8]
inline constexpr double kFig3SHi = 8.0;

inline double figure3_outer_value(Vec2 z) {
    double rho2 = z.x * z.x + z.y * z.y;
    return 0.5 * (z.y * z.y - z.x * z.x) + 2.0 * kFig3S * z.x -
           kFig3S * kFig3S * 0.5 * std::log(rho2);
}

inline Vec2 figure3_outer_gradient(Vec2 z) {
    double rho2 = z.x * z.x + z.y * z.y;
    double wx = z.x - kFig3S, wy = z.y;
    double ax = wx * wx - wy * wy, ay = 2.0 * wx * wy;  // (z - S)^2
    double gx = -(ax * z.x + ay * z.y) / rho2;          // -(z - S)^2 / z
    double gy = -(ay * z.x - ax * z.y) / rho2;
    return {gx, -gy};  // grad Re G = conj(G')
}

inline PlanarHamiltonianSystem figure3_system() {
    PlanarHamiltonianSystem sys;
    sys.period = 0.01;
    sys.grad_H = [](double, Vec2 z) {
        double s = 0.5 * (z.x * z.x + z.y * z.y);
        if (s <= kFig3SLo) return Vec2{-z.x, -z.y};
        double chi = detail::smoothstep(s, kFig3SLo, kFig3SHi);
        double chi_p = detail::smoothstep_derivative(s, kFig3SLo, kFig3SHi);
        Vec2 outer = figure3_outer_gradient(z);
        double mismatch = figure3_outer_value(z) + s;  // < 0 on the blend ring
        return Vec2{-z.x + chi * (outer.x + z.x) + chi_p * mismatch * z.x,
                    -z.y + chi * (outer.y + z.y) + chi_p * mismatch * z.y};
    };
    sys.linearization_at_zero =
        PeriodicMatrixFunction::constant(Mat2::diag(-1.0, -1.0), sys.period);
    sys.linearization_at_infinity =
        PeriodicMatrixFunction::constant(Mat2::diag(-1.0, 1.0), sys.period);
    return sys;
}

inline ScalarCoefficient linlike_bounded_q() {
    // q has no limit as |x| -> infinity (a log-slow oscillation) but stays
    // sandwiched; near zero it behaves like the figure-1 coefficient.
    ScalarCoefficient q;
    q.period = 1.0;
    q.q = [](double, double x) {
        double x2 = x * x;
        return (x2 - 1.0) / (x2 + 1.0) +
               0.3 * std::sin(std::log(1.0 + x2)) * x2 / (1.0 + x2);
    };
    return q;
}

inline PlanarHamiltonianSystem linlike_bounded_system() {
    // Planar embedding with nominal linearizations at the sandwich midlines;
    // used for portraits and area checks (certification goes through the
    // linear-like pipeline, which never needs these).
    ScalarCoefficient q = linlike_bounded_q();
    return to_planar(q, PeriodicScalar{[](double) { return -1.0; }}, std::nullopt);
}

}  // namespace catalog_detail

inline std::vector<CatalogEntry> catalog() {
    std::vector<CatalogEntry> out;

    auto linear_entry = [](std::string name, std::string desc, Mat2 L, double T,
                           long index) {
        CatalogEntry e;
        e.name = std::move(name);
        e.description = std::move(desc);
        e.linear = LinearSystem::constant(L, T);
        e.system = e.linear->as_hamiltonian();
        e.meta.i0 = e.meta.i_infty = index;
        e.meta.solution_count = 0;
        e.meta.hessian_bound = L.max_abs();
        return e;
    };

    out.push_back(linear_entry("rotation-pi", "L = I over T = pi: clockwise rotation, index -1",
                               Mat2::identity(), kPi, -1));
    out.push_back(linear_entry("ccw-rotation-pi",
                               "L = -I over T = pi: counter-clockwise rotation, index +1",
                               Mat2::diag(-1.0, -1.0), kPi, 1));
    out.push_back(linear_entry("saddle", "L = diag(-1, 1) over T = 1: hyperbolic, index 0",
                               Mat2::diag(-1.0, 1.0), 1.0, 0));
    out.push_back(linear_entry("shear", "L = diag(0, 1) over T = 1: resonant, (index, nu) = (-1, 1)",
                               Mat2::diag(0.0, 1.0), 1.0, -1));

    {
        CatalogEntry e;
        e.name = "figure1";
        e.description = "double well: saddle origin (i0 = 0), rotation at infinity "
                        "(i_infty = -1); exactly the two centers A and B";
        e.system = catalog_detail::figure1_system();
        e.meta = {0, -1, 2,
                  {{"A", {-1.0, 0.0}}, {"B", {1.0, 0.0}}},
                  1.26};
        e.certifiable = true;
        out.push_back(e);
    }
    {
        CatalogEntry e;
        e.name = "figure2";
        e.description = "twist reversal: ccw center at the origin (i0 = 1), clockwise at "
                        "infinity (i_infty = -1); center M and saddle S";
        e.system = catalog_detail::figure2_system();
        e.meta = {1, -1, 2,
                  {{"M", {-1.46024, 0.0}}, {"S", {1.35922, 0.0}}},
                  1.8};
        e.certifiable = true;
        out.push_back(e);
    }
    {
        CatalogEntry e;
        e.name = "figure3";
        e.description = "ccw center at the origin (i0 = 1), saddle behaviour at infinity "
                        "(i_infty = 0); a single degenerate fixed point S of index -2";
        e.system = catalog_detail::figure3_system();
        e.meta = {1, 0, 1, {{"S", {catalog_detail::kFig3S, 0.0}}}, 450.0};
        e.certifiable = true;
        out.push_back(e);
    }
    {
        CatalogEntry e;
        e.name = "linlike-bounded";
        e.description = "second-order coefficient with no limit at infinity, sandwiched "
                        "between nonresonant Hill bounds of equal index";
        SecondOrderPayload so;
        so.q = catalog_detail::linlike_bounded_q();
        so.a_lo = -1.25;
        so.a_hi = -0.75;
        so.r0_bar = 0.3;
        so.b_lo = 0.25;
        so.b_hi = 1.35;
        so.rinf_bar = 2.0;
        e.second_order = so;
        e.system = catalog_detail::linlike_bounded_system();
        e.meta = {0, -1, 2,
                  {{"A", {-0.9205, 0.0}}, {"B", {0.9205, 0.0}}},
                  3.5};
        e.certifiable = false;  // certified via the linear-like pipeline instead
        out.push_back(e);
    }
    return out;
}

inline const CatalogEntry& catalog_entry(const std::string& name) {
    static const std::vector<CatalogEntry> entries = catalog();
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw Error(ErrorClass::config, "catalog: no entry named '" + name + "'");
}

// ---------------------------------------------------------------------------
// validation

struct CatalogValidation {
    bool passed = false;
    long i0 = 0, i_infty = 0;
    int equilibria_found = 0;
    double hessian_estimate = 0.0;
    std::string detail;
};

// Re-derives the stored metadata: indices via the linear pipeline, the
// equilibrium count by an exhaustive annulus search on grad H, the
// small-period rule against a grid estimate of the Hessian norm.
inline CatalogValidation validate_entry(const CatalogEntry& e) {
    CatalogValidation v;
    if (e.linear) {
        LinearPoincareData d = linear_poincare_data(*e.linear);
        v.i0 = v.i_infty = d.index.index;
        v.passed = (v.i0 == e.meta.i0);
        if (!v.passed) v.detail = "index mismatch";
        return v;
    }

    if (e.second_order) {
        // indices come from the sandwich bounds, not from declared
        // linearizations (the coefficient need not have limits)
        const SecondOrderPayload& so = *e.second_order;
        SandwichBounds s0 = SandwichBounds::make([&so](double) { return so.a_lo; },
                                                 [&so](double) { return so.a_hi; },
                                                 so.q.period, so.r0_bar);
        SandwichBounds si = SandwichBounds::make([&so](double) { return so.b_lo; },
                                                 [&so](double) { return so.b_hi; },
                                                 so.q.period, so.rinf_bar);
        v.i0 = s0.common_index.index;
        v.i_infty = si.common_index.index;
        if (!check_sandwich(so.q, s0, SandwichRegion::at_zero).passed ||
            !check_sandwich(so.q, si, SandwichRegion::at_infinity).passed) {
            v.detail = "sandwich condition violated";
            return v;
        }
    } else {
        auto [d0, di] = indices(e.system);
        v.i0 = d0.index;
        v.i_infty = di.index;
    }
    if (v.i0 != e.meta.i0 || v.i_infty != e.meta.i_infty) {
        v.detail = "index mismatch";
        return v;
    }

    // equilibria of the autonomous field, over a generous annulus
    AnnulusField grad_chart = [&e](double phi, double r) {
        return e.system.grad_H(0.0, project(phi, r));
    };
    double r_hi = 4.0;
    for (const auto& p : e.meta.known_solutions)
        r_hi = std::max(r_hi, 2.5 * p.position.norm());
    LocateOptions lopt;
    lopt.tol_res = 1e-12;
    LocateResult zeros = locate_zeros_field(grad_chart, 1e-3, r_hi, 4'000'000, lopt);
    v.equilibria_found = static_cast<int>(zeros.zeros.size());
    if (v.equilibria_found != e.meta.solution_count || !zeros.unresolved.empty()) {
        v.detail = "equilibrium count mismatch";
        return v;
    }
    for (const auto& p : e.meta.known_solutions) {
        bool matched = false;
        for (const auto& z : zeros.zeros)
            if ((project(z.location.phi, z.location.r) - p.position).norm() < 0.05)
                matched = true;
        if (!matched) {
            v.detail = "known solution " + p.label + " not recovered";
            return v;
        }
    }

    // Hessian estimate by central differences over a polar grid
    double h = 1e-5, worst = 0.0;
    for (int i = 0; i < 48; ++i)
        for (int j = 1; j <= 60; ++j) {
            Vec2 z = project(kTwoPi * i / 48, r_hi * j / 60.0);
            Vec2 gx = (e.system.grad_H(0.0, {z.x + h, z.y}) -
                       e.system.grad_H(0.0, {z.x - h, z.y})) *
                      (0.5 / h);
            Vec2 gy = (e.system.grad_H(0.0, {z.x, z.y + h}) -
                       e.system.grad_H(0.0, {z.x, z.y - h})) *
                      (0.5 / h);
            worst = std::max({worst, std::fabs(gx.x), std::fabs(gx.y), std::fabs(gy.x),
                              std::fabs(gy.y)});
        }
    v.hessian_estimate = worst;
    if (worst > e.meta.hessian_bound) {
        v.detail = "hessian bound too small";
        return v;
    }
    if (e.system.period >= kTwoPi / worst) {
        v.detail = "period too large for the small-period rule";
        return v;
    }
    v.passed = true;
    return v;
}

}  // namespace pbm
