#pragma once

// Lifted integration of nonlinear planar Hamiltonian systems: the clockwise
// angle rides along as an augmented ODE state, which keeps the lift exact for
// fast-rotating systems. Exposes the T-Poincare displacement map F and the
// area-preservation check in the symplectic chart.

#include <cmath>
#include <vector>

#include "pbm/core.hpp"
#include "pbm/linear_flow.hpp"
#include "pbm/ode.hpp"

namespace pbm {

struct LiftedTrajectory {
    std::vector<double> t;
    std::vector<Vec2> z;
    std::vector<double> phi;

    double r(std::size_t i) const { return z[i].norm(); }
    std::size_t size() const { return t.size(); }
    double total_angle() const { return phi.back() - phi.front(); }
};

struct FlowOptions {
    OdeOptions ode;
    int min_samples = 32;     // initial max_dt = span / min_samples
    int max_refinements = 10; // halvings of max_dt on continuity failure
};

// Integrates z' = J grad H with phi' = -(x y' - y x') / (x^2 + y^2) as a
// third state. Reports (never clamps) trajectories entering r < r_min.
inline LiftedTrajectory flow_lifted(const PlanarHamiltonianSystem& sys, LiftedPoint p0,
                                    double t0, double t1, const FlowOptions& opt = {},
                                    const Tolerances& tol = {}) {
    if (!(p0.r > tol.r_min))
        throw Error(ErrorClass::config, "flow_lifted: initial radius below r_min");

    const double r_min = tol.r_min;
    auto rhs = [&sys, r_min](double t, const OdeState<3>& y, OdeState<3>& dy) {
        Vec2 z{y[0], y[1]};
        double r2 = z.x * z.x + z.y * z.y;
        if (!(r2 > r_min * r_min))
            throw Error(ErrorClass::numeric_budget,
                        "flow_lifted: trajectory entered r < r_min, lift undefined");
        Vec2 v = sys.field(t, z);
        dy[0] = v.x;
        dy[1] = v.y;
        dy[2] = -(z.x * v.y - z.y * v.x) / r2;
    };

    Vec2 z0 = project(p0);
    double max_dt = (t1 - t0) / opt.min_samples;
    for (int attempt = 0;; ++attempt) {
        LiftedTrajectory traj;
        OdeOptions ode = opt.ode;
        ode.max_dt = max_dt;
        OdeState<3> y0{z0.x, z0.y, p0.phi};
        bool too_fast = false;
        integrate_adaptive<3>(rhs, y0, t0, t1, ode,
                              [&](double t, const OdeState<3>& y) {
                                  if (!traj.phi.empty() &&
                                      std::fabs(y[2] - traj.phi.back()) >= 0.5 * kPi)
                                      too_fast = true;
                                  traj.t.push_back(t);
                                  traj.z.emplace_back(y[0], y[1]);
                                  traj.phi.push_back(y[2]);
                              });
        if (!too_fast) return traj;
        if (attempt >= opt.max_refinements)
            throw Error(ErrorClass::numeric_budget,
                        "flow_lifted: angle continuity contract not met at smallest step");
        max_dt *= 0.5;
    }
}

// One evaluation of F = P_T - id at (phi0, r0).
struct LiftedPoincareRecord {
    double phi0 = 0.0, r0 = 1.0;
    double phiT = 0.0, rT = 1.0;
    double F1 = 0.0;  // phiT - phi0
    double F2 = 0.0;  // rT - r0
};

inline LiftedPoincareRecord poincare_T(const PlanarHamiltonianSystem& sys, LiftedPoint p0,
                                       const FlowOptions& opt = {}, const Tolerances& tol = {}) {
    LiftedTrajectory traj = flow_lifted(sys, p0, 0.0, sys.period, opt, tol);
    LiftedPoincareRecord rec;
    rec.phi0 = p0.phi;
    rec.r0 = p0.r;
    rec.phiT = traj.phi.back();
    rec.rT = traj.z.back().norm();
    rec.F1 = rec.phiT - rec.phi0;
    rec.F2 = rec.rT - rec.r0;
    return rec;
}

// P_T in the symplectic chart (phi, r_hat), r_hat = r^2 / 2.
inline LiftedPoint poincare_T_symplectic(const PlanarHamiltonianSystem& sys, LiftedPoint p_hat,
                                         const FlowOptions& opt = {}, const Tolerances& tol = {}) {
    LiftedPoint p{p_hat.phi, std::sqrt(2.0 * p_hat.r)};
    LiftedPoincareRecord rec = poincare_T(sys, p, opt, tol);
    return {rec.phiT, 0.5 * rec.rT * rec.rT};
}

// |det D P_hat_T - 1| estimated by central finite differences with step h.
// In the symplectic chart the exact Jacobian determinant is 1.
inline double area_preservation_defect(const PlanarHamiltonianSystem& sys, LiftedPoint p_hat,
                                       double h = 0.0, const FlowOptions& opt = {},
                                       const Tolerances& tol = {}) {
    if (h <= 0.0) h = 1e-5 * std::max(1.0, p_hat.r);
    auto at = [&](double dphi, double dr) {
        return poincare_T_symplectic(sys, {p_hat.phi + dphi, p_hat.r + dr}, opt, tol);
    };
    LiftedPoint pp = at(h, 0.0), pm = at(-h, 0.0);
    LiftedPoint rp = at(0.0, h), rm = at(0.0, -h);
    double a = (pp.phi - pm.phi) / (2.0 * h), b = (rp.phi - rm.phi) / (2.0 * h);
    double c = (pp.r - pm.r) / (2.0 * h), d = (rp.r - rm.r) / (2.0 * h);
    return std::fabs(a * d - b * c - 1.0);
}

// ---------------------------------------------------------------------------
// agreement with the declared linearizations

enum class AsymptoticSide { at_zero, at_infinity };

struct LimitAgreementEntry {
    double r = 0.0;
    double d_angle = 0.0;   // max_phi |F1(phi, r) - F1_lin(phi)|
    double d_radial = 0.0;  // max_phi |F2(phi, r)/r - F2_lin(phi, 1)|
};

struct LimitAgreementReport {
    AsymptoticSide side;
    std::vector<LimitAgreementEntry> entries;
};

// Compares the nonlinear displacement against the closed-form displacement of
// the declared linearization, over a phi grid at each requested radius.
inline LimitAgreementReport limit_agreement(const PlanarHamiltonianSystem& sys,
                                            const std::vector<double>& radii,
                                            AsymptoticSide side, int phi_grid = 64,
                                            const FlowOptions& opt = {},
                                            const Tolerances& tol = {}) {
    const auto& lin = (side == AsymptoticSide::at_zero) ? sys.linearization_at_zero
                                                        : sys.linearization_at_infinity;
    if (!lin)
        throw Error(ErrorClass::config, "limit_agreement: linearization not declared");
    LinearPoincareData data = linear_poincare_data({*lin, sys.period}, {}, tol);

    LimitAgreementReport rep{side, {}};
    for (double r : radii) {
        LimitAgreementEntry e;
        e.r = r;
        for (int i = 0; i < phi_grid; ++i) {
            double phi = kTwoPi * i / phi_grid;
            LiftedPoincareRecord rec = poincare_T(sys, {phi, r}, opt, tol);
            Vec2 f_lin = F_field(data, phi, 1.0);
            e.d_angle = std::max(e.d_angle, std::fabs(rec.F1 - f_lin.x));
            e.d_radial = std::max(e.d_radial, std::fabs(rec.F2 / r - f_lin.y));
        }
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace pbm
