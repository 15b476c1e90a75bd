#pragma once

// Circle degree D(f, r) of angularly periodic plane fields, annulus degrees,
// and constructive zero location for shifted displacement maps F + (2 M pi, 0).
// The degree is the negated counter-clockwise boundary winding; that sign is
// pinned by the index-0 linear case, where D must equal -2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pbm/core.hpp"
#include "pbm/lifted_flow.hpp"
#include "pbm/linear_flow.hpp"

namespace pbm {

// A continuous field on the covering annulus, 2*pi-periodic in phi.
using AnnulusField = std::function<Vec2(double phi, double r)>;

struct WindingResult {
    long winding = 0;
    double min_norm = 0.0;
    std::size_t samples_used = 0;
};

struct WindingOptions {
    int initial_samples = 64;
    int max_depth = 28;
    double eps_min = 1e-9;       // winding undefined if |f| dips below this
    double integer_tol = 1e-6;   // accumulated total must be this close to 2 pi Z
    double max_increment = 1.2;  // accepted per-segment angle, < pi/2
};

namespace detail {

inline double angle_between(Vec2 a, Vec2 b) {
    return std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
}

// Accumulates the rotation of f along [ta, tb], bisecting until each accepted
// increment is below opts.max_increment.
template <class F>
double accumulate_rotation(F&& f, double ta, Vec2 fa, double tb, Vec2 fb,
                           const WindingOptions& opts, double& min_norm,
                           std::size_t& samples, int depth) {
    double d = angle_between(fa, fb);
    if (std::fabs(d) < opts.max_increment && depth > 0) return d;
    if (depth >= opts.max_depth)
        throw Error(ErrorClass::numeric_budget,
                    "winding: angular increment did not resolve under bisection");
    double tm = 0.5 * (ta + tb);
    Vec2 fm = f(tm);
    ++samples;
    double n = fm.norm();
    min_norm = std::min(min_norm, n);
    if (n < opts.eps_min)
        throw Error(ErrorClass::config, "winding: field vanishes on the curve (|f| < eps_min)");
    return accumulate_rotation(f, ta, fa, tm, fm, opts, min_norm, samples, depth + 1) +
           accumulate_rotation(f, tm, fm, tb, fb, opts, min_norm, samples, depth + 1);
}

// Winding of a closed curve t in [0, 1] -> f(t), f(1) = f(0).
template <class F>
WindingResult loop_winding(F&& f, const WindingOptions& opts = {}) {
    WindingResult out;
    out.min_norm = 1e300;
    int n = opts.initial_samples;
    std::vector<Vec2> vals(n + 1);
    for (int i = 0; i <= n; ++i) {
        vals[i] = f(static_cast<double>(i) / n);
        ++out.samples_used;
        double nn = vals[i].norm();
        out.min_norm = std::min(out.min_norm, nn);
        if (nn < opts.eps_min)
            throw Error(ErrorClass::config,
                        "winding: field vanishes on the curve (|f| < eps_min)");
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += accumulate_rotation(f, static_cast<double>(i) / n, vals[i],
                                     static_cast<double>(i + 1) / n, vals[i + 1], opts,
                                     out.min_norm, out.samples_used, 0);
    }
    double turns = total / kTwoPi;
    out.winding = std::lround(turns);
    if (std::fabs(total - kTwoPi * static_cast<double>(out.winding)) > opts.integer_tol)
        throw Error(ErrorClass::internal,
                    "winding: accumulated angle is not an integer multiple of 2 pi");
    return out;
}

}  // namespace detail

// Accumulated rotation of phi -> f(phi) over [0, 2 pi], as an integer.
inline WindingResult circle_winding(const std::function<Vec2(double)>& f,
                                    const WindingOptions& opts = {}) {
    return detail::loop_winding([&f](double t) { return f(kTwoPi * t); }, opts);
}

// Degree of the transported field on the disk of radius r: the negated
// counter-clockwise boundary winding.
inline long degree_D(const AnnulusField& f, double r, const WindingOptions& opts = {}) {
    return -circle_winding([&f, r](double phi) { return f(phi, r); }, opts).winding;
}

// F + (2 M pi, 0) for a nonlinear system; every evaluation integrates over [0, T].
inline AnnulusField shifted_displacement(const PlanarHamiltonianSystem& sys, long M,
                                         FlowOptions opt = {}, Tolerances tol = {}) {
    double shift = kTwoPi * static_cast<double>(M);
    return [sys, shift, opt, tol](double phi, double r) {
        LiftedPoincareRecord rec = poincare_T(sys, {phi, r}, opt, tol);
        return Vec2{rec.F1 + shift, rec.F2};
    };
}

// Closed-form variant for linear systems.
inline AnnulusField shifted_displacement(const LinearPoincareData& data, long M) {
    double shift = kTwoPi * static_cast<double>(M);
    return [data, shift](double phi, double r) {
        Vec2 v = F_field(data, phi, r);
        return Vec2{v.x + shift, v.y};
    };
}

inline long degree_shifted(const LinearPoincareData& data, long M, double r,
                           const WindingOptions& opts = {}) {
    return degree_D(shifted_displacement(data, M), r, opts);
}

inline long degree_shifted(const PlanarHamiltonianSystem& sys, long M, double r,
                           const WindingOptions& opts = {}) {
    return degree_D(shifted_displacement(sys, M), r, opts);
}

// Degree over the annulus r1 < r < r2 (difference of the two circle degrees).
inline long annulus_degree(const AnnulusField& f, double r1, double r2,
                           const WindingOptions& opts = {}) {
    return degree_D(f, r2, opts) - degree_D(f, r1, opts);
}

inline long annulus_degree(const PlanarHamiltonianSystem& sys, long M, double r1, double r2,
                           const WindingOptions& opts = {}) {
    AnnulusField f = shifted_displacement(sys, M);
    return annulus_degree(f, r1, r2, opts);
}

// ---------------------------------------------------------------------------
// zero location

struct ZeroRecord {
    LiftedPoint location;   // phi canonicalized into [0, 2 pi)
    long shift_M = 0;
    double residual = 0.0;  // |F(p) + (2 M pi, 0)|
    struct History {
        int subdivisions = 0;
        int newton_iterations = 0;
        std::string method;  // "newton", "subdivision"
    } history;
    long winding_verified = 0;  // clockwise turns of the re-integrated orbit
};

struct CandidateRegion {
    double phi_lo = 0.0, phi_hi = 0.0, r_lo = 0.0, r_hi = 0.0;
    long winding = 0;
    double min_norm = 0.0;
};

struct LocateOptions {
    double tol_res = 1e-10;
    double dedup_dist = 1e-6;
    int coarse_phi = 72;
    int coarse_r = 36;
    int max_newton = 80;
    double newton_h = 1e-6;      // central-difference Jacobian step
    double polish_cell = 5e-3;   // winding cells below this size get polished
    double exclude_floor = 1e-3; // smallest cell still subject to exclusion splitting
    double min_cell = 1e-9;
    WindingOptions winding;
};

struct LocateResult {
    std::vector<ZeroRecord> zeros;
    std::vector<CandidateRegion> unresolved;
    std::size_t field_evals = 0;
    bool budget_exhausted = false;
};

namespace detail {

struct Cell {
    double p0, p1, r0, r1;
    int depth = 0;
    double width() const { return std::max(p1 - p0, r1 - r0); }
};

class ZeroSearch {
public:
    ZeroSearch(const AnnulusField& f, double r1, double r2, std::size_t budget,
               const LocateOptions& opt)
        : f_(f), r1_(r1), r2_(r2), budget_(budget), opt_(opt) {}

    LocateResult run() {
        coarse_sweep();
        // the window start is arbitrary (f is 2 pi periodic); an offset keeps
        // axis-aligned zeros, which land at phi = 0 in every catalog system,
        // away from the seam where they would straddle cell boundaries forever
        const double seam = 0.20249;
        std::vector<Cell> stack{Cell{seam, seam + kTwoPi, r1_, r2_, 0}};
        while (!stack.empty()) {
            Cell c = stack.back();
            stack.pop_back();
            if (out_of_budget()) {
                result_.unresolved.push_back({c.p0, c.p1, c.r0, c.r1, 0, 0.0});
                continue;
            }
            process(c, stack);
        }
        result_.field_evals = evals_;
        return result_;
    }

private:
    Vec2 eval(double phi, double r) {
        ++evals_;
        return f_(phi, r);
    }
    bool try_eval(double phi, double r, Vec2& out) {
        try {
            out = eval(phi, r);
            return true;
        } catch (const Error&) {
            return false;
        }
    }
    bool out_of_budget() {
        if (evals_ >= budget_) result_.budget_exhausted = true;
        return result_.budget_exhausted;
    }

    // Boundary winding of a cell, counter-clockwise in the (phi, r) chart.
    // Returns false when the field dips below eps_min on the boundary.
    bool cell_winding(const Cell& c, long& w) {
        auto loop = [&](double t) {
            // four edges, each on a quarter of [0, 1]
            double s = 4.0 * t;
            if (s <= 1.0) return eval(c.p0 + (c.p1 - c.p0) * s, c.r0);
            if (s <= 2.0) return eval(c.p1, c.r0 + (c.r1 - c.r0) * (s - 1.0));
            if (s <= 3.0) return eval(c.p1 - (c.p1 - c.p0) * (s - 2.0), c.r1);
            return eval(c.p0, c.r1 - (c.r1 - c.r0) * (s - 3.0));
        };
        WindingOptions wo = opt_.winding;
        wo.initial_samples = 32;
        try {
            WindingResult res = detail::loop_winding(loop, wo);
            w = res.winding;
            return true;
        } catch (const Error&) {
            return false;  // boundary too close to a zero (or unresolved)
        }
    }

    void subdivide(const Cell& c, std::vector<Cell>& stack) {
        // split off-center so zeros do not persist on cell edges
        double pm = c.p0 + 0.515 * (c.p1 - c.p0);
        double rm = c.r0 + 0.515 * (c.r1 - c.r0);
        stack.push_back({c.p0, pm, c.r0, rm, c.depth + 1});
        stack.push_back({pm, c.p1, c.r0, rm, c.depth + 1});
        stack.push_back({c.p0, pm, rm, c.r1, c.depth + 1});
        stack.push_back({pm, c.p1, rm, c.r1, c.depth + 1});
    }

    void process(const Cell& c, std::vector<Cell>& stack) {
        if (c.width() < opt_.min_cell) {
            double phi = 0.5 * (c.p0 + c.p1), r = 0.5 * (c.r0 + c.r1);
            Vec2 v;
            if (try_eval(phi, r, v) && v.norm() <= opt_.tol_res)
                record_zero(phi, r, v.norm(), c.depth, 0, "subdivision");
            else
                result_.unresolved.push_back({c.p0, c.p1, c.r0, c.r1, 0, 0.0});
            return;
        }

        // cheap exclusion before any boundary work: drop cells whose interior
        // scan certifies a margin against the observed slope
        auto [mu, slope, pmin, rmin] = interior_scan(c);
        double spacing = 0.5 * std::hypot((c.p1 - c.p0) / 5.0, (c.r1 - c.r0) / 5.0);
        if (mu > 3.0 * slope * spacing + opt_.tol_res) return;

        long w = 0;
        if (!cell_winding(c, w)) {
            // the boundary runs too close to a zero; if that zero is already
            // recorded and the cell is tiny, there is nothing left to resolve
            if (c.width() <= 10.0 * opt_.dedup_dist && near_recorded_zero(c)) return;
            subdivide(c, stack);
            return;
        }

        if (w == 0) {
            if (c.width() > opt_.exclude_floor) {
                subdivide(c, stack);
                return;
            }
            // too small to keep splitting: a canceling pair may hide here
            int iters = 0;
            if (newton(pmin, rmin, c, iters)) return;
            result_.unresolved.push_back({c.p0, c.p1, c.r0, c.r1, 0, mu});
            return;
        }

        if (c.width() > opt_.polish_cell) {
            subdivide(c, stack);
            return;
        }

        int iters = 0;
        double zp = 0.0, zr = 0.0;
        if (newton(pmin, rmin, c, iters, &zp, &zr)) {
            // stop refining once the zero sits inside this cell and its local
            // winding explains the cell boundary (also covers degenerate -2/+2)
            bool inside = zp >= c.p0 - 1e-12 && zp <= c.p1 + 1e-12 && zr >= c.r0 - 1e-12 &&
                          zr <= c.r1 + 1e-12;
            long local = 0;
            if (inside && local_winding({zp, zr}, c, local) && local == w) return;
        }
        if (c.width() > opt_.min_cell * 4.0) {
            subdivide(c, stack);
        } else {
            Vec2 v;
            if (try_eval(pmin, rmin, v) && v.norm() <= opt_.tol_res)
                record_zero(pmin, rmin, v.norm(), c.depth, iters, "subdivision");
            else
                result_.unresolved.push_back({c.p0, c.p1, c.r0, c.r1, w, mu});
        }
    }

    struct ScanOut {
        double mu, slope, pmin, rmin;
    };
    ScanOut interior_scan(const Cell& c) {
        constexpr int m = 6;
        double vals[m][m];
        double best = 1e300, bp = c.p0, br = c.r0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double p = c.p0 + (c.p1 - c.p0) * i / (m - 1);
                double r = c.r0 + (c.r1 - c.r0) * j / (m - 1);
                double n;
                try {
                    n = eval(p, r).norm();
                } catch (const Error&) {
                    n = 1e300;  // evaluation failed (e.g. lift undefined); not a minimum
                }
                vals[i][j] = n;
                if (n < best) {
                    best = n;
                    bp = p;
                    br = r;
                }
            }
        double hp = (c.p1 - c.p0) / (m - 1), hr = (c.r1 - c.r0) / (m - 1);
        double slope = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                if (i + 1 < m)
                    slope = std::max(slope, std::fabs(vals[i + 1][j] - vals[i][j]) / hp);
                if (j + 1 < m)
                    slope = std::max(slope, std::fabs(vals[i][j + 1] - vals[i][j]) / hr);
            }
        return {best, slope, bp, br};
    }

    // Damped Newton with central-difference Jacobian. Near-singular Jacobians
    // or stalls report failure; the caller falls back to cell refinement.
    // Iterates well past tol_res, so that runs approaching a degenerate zero
    // from different sides land inside the dedup distance of one another.
    bool newton(double phi, double r, const Cell& c, int& iters, double* out_phi = nullptr,
                double* out_r = nullptr) {
        const double h = opt_.newton_h;
        const double target = opt_.tol_res * 1e-5;
        Vec2 fv;
        if (!try_eval(phi, r, fv)) return false;
        double n = fv.norm();
        bool stalled = false;
        for (iters = 0; iters < opt_.max_newton && n > target && !stalled; ++iters) {
            Vec2 fp, fm, gp, gm;
            if (!try_eval(phi + h, r, fp) || !try_eval(phi - h, r, fm) ||
                !try_eval(phi, r + h, gp) || !try_eval(phi, r - h, gm))
                break;
            double j11 = (fp.x - fm.x) / (2.0 * h), j12 = (gp.x - gm.x) / (2.0 * h);
            double j21 = (fp.y - fm.y) / (2.0 * h), j22 = (gp.y - gm.y) / (2.0 * h);
            double det = j11 * j22 - j12 * j21;
            double scale = std::max({std::fabs(j11), std::fabs(j12), std::fabs(j21),
                                     std::fabs(j22), 1e-300});
            if (std::fabs(det) < 1e-12 * scale * scale) break;
            double dp = (-fv.x * j22 + fv.y * j12) / det;
            double dr = (-fv.y * j11 + fv.x * j21) / det;
            double lambda = 1.0;
            stalled = true;
            double r_lo = std::max(0.5 * r1_, r1_ - 0.05 * (r2_ - r1_));
            while (lambda >= 1.0 / 1024.0) {
                double p_try = phi + lambda * dp;
                double r_try = std::clamp(r + lambda * dr, r_lo, r2_ + 0.05 * (r2_ - r1_));
                try {
                    Vec2 ft = eval(p_try, r_try);
                    if (ft.norm() < n) {
                        phi = p_try;
                        r = r_try;
                        fv = ft;
                        n = ft.norm();
                        stalled = false;
                        break;
                    }
                } catch (const Error&) {
                    // evaluation failed along the trial; shorten the step
                }
                lambda *= 0.5;
            }
        }
        if (n > opt_.tol_res) return false;
        if (r < r1_ - 1e-9 || r > r2_ + 1e-9) return false;
        record_zero(phi, r, n, c.depth, iters, "newton");
        if (out_phi) *out_phi = phi;
        if (out_r) *out_r = r;
        return true;
    }

    bool near_recorded_zero(const Cell& c) const {
        double cp = 0.5 * (c.p0 + c.p1), cr = 0.5 * (c.r0 + c.r1);
        for (const auto& z : result_.zeros) {
            double dp = std::fabs(std::remainder(z.location.phi - cp, kTwoPi));
            if (std::hypot(dp, z.location.r - cr) <= std::max(2.0 * c.width(), opt_.dedup_dist))
                return true;
        }
        return false;
    }

    bool local_winding(LiftedPoint z, const Cell& c, long& w) {
        double rho = std::max(10.0 * opt_.dedup_dist, 0.05 * c.width());
        if (z.r - rho <= 0.0) return false;
        auto loop = [&](double t) {
            return eval(z.phi + rho * std::cos(kTwoPi * t), z.r + rho * std::sin(kTwoPi * t));
        };
        WindingOptions wo = opt_.winding;
        wo.initial_samples = 24;
        try {
            w = detail::loop_winding(loop, wo).winding;
            return true;
        } catch (const Error&) {
            return false;
        }
    }

    void record_zero(double phi, double r, double residual, int depth, int iters,
                     const char* method) {
        double p = std::fmod(phi, kTwoPi);
        if (p < 0.0) p += kTwoPi;
        for (auto& z : result_.zeros) {
            double dp = std::fabs(z.location.phi - p);
            dp = std::min(dp, kTwoPi - dp);
            double dist = std::hypot(dp, z.location.r - r);
            bool same = dist <= opt_.dedup_dist;
            if (!same && dist <= 1e3 * opt_.dedup_dist) {
                // residual-level merge: if the midpoint also satisfies the
                // residual tolerance the two points cannot be resolved as
                // distinct zeros (degenerate or near-degenerate cluster)
                double mp = z.location.phi + std::remainder(p - z.location.phi, kTwoPi) * 0.5;
                double mr = 0.5 * (z.location.r + r);
                Vec2 mid;
                same = try_eval(mp, mr, mid) && mid.norm() <= opt_.tol_res;
            }
            if (same) {
                if (residual < z.residual) {
                    z.location = {p, r};
                    z.residual = residual;
                }
                return;
            }
        }
        ZeroRecord rec;
        rec.location = {p, r};
        rec.residual = residual;
        rec.history = {depth, iters, method};
        result_.zeros.push_back(rec);
    }

    void coarse_sweep() {
        const int np = opt_.coarse_phi, nr = opt_.coarse_r;
        std::vector<double> norms(static_cast<std::size_t>(np) * (nr + 1));
        for (int i = 0; i < np; ++i)
            for (int j = 0; j <= nr; ++j) {
                double p = kTwoPi * i / np;
                double r = r1_ + (r2_ - r1_) * j / nr;
                Vec2 v;
                norms[static_cast<std::size_t>(i) * (nr + 1) + j] =
                    try_eval(p, r, v) ? v.norm() : 1e300;
            }
        auto at = [&](int i, int j) {
            i = (i % np + np) % np;
            return norms[static_cast<std::size_t>(i) * (nr + 1) + j];
        };
        std::vector<std::pair<double, std::pair<int, int>>> seeds;
        for (int i = 0; i < np; ++i)
            for (int j = 0; j <= nr; ++j) {
                double v = at(i, j);
                bool is_min = true;
                for (int di = -1; di <= 1 && is_min; ++di)
                    for (int dj = -1; dj <= 1 && is_min; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        int jj = j + dj;
                        if (jj < 0 || jj > nr) continue;
                        if (at(i + di, jj) < v) is_min = false;
                    }
                if (is_min) seeds.push_back({v, {i, j}});
            }
        std::sort(seeds.begin(), seeds.end());
        Cell whole{0.0, kTwoPi, r1_, r2_, 0};
        int budget_seeds = 48;
        for (const auto& s : seeds) {
            if (--budget_seeds < 0 || out_of_budget()) break;
            double p = kTwoPi * s.second.first / np;
            double r = r1_ + (r2_ - r1_) * s.second.second / nr;
            int iters = 0;
            newton(p, r, whole, iters);
        }
    }

    const AnnulusField& f_;
    double r1_, r2_;
    std::size_t budget_;
    LocateOptions opt_;
    std::size_t evals_ = 0;
    LocateResult result_;
};

}  // namespace detail

// Zero search on [0, 2 pi) x [r1, r2]: coarse Newton sweep, then recursive
// cell subdivision. Cells with nonzero boundary winding are refined onto
// their zeros; zero-winding cells are discarded only when an interior scan
// certifies a margin (a Poincare-Birkhoff pair cancels in the winding, so
// winding alone must not prune). Unresolved cells are reported as candidate
// regions, never as zeros.
inline LocateResult locate_zeros_field(const AnnulusField& f, double r1, double r2,
                                       std::size_t budget = 1'000'000,
                                       const LocateOptions& opt = {}) {
    if (!(0.0 < r1 && r1 < r2))
        throw Error(ErrorClass::config, "locate_zeros: need 0 < r1 < r2");
    return detail::ZeroSearch(f, r1, r2, budget, opt).run();
}

// System version: searches zeros of F + (2 M pi, 0) and re-verifies each hit
// by an independent re-integration. Hits whose re-verified residual exceeds
// tol_res are demoted to candidate regions (the search can sit on integrator
// noise in strongly expanding zones; only re-validated zeros are reported).
inline LocateResult locate_zeros(const PlanarHamiltonianSystem& sys, long M, double r1,
                                 double r2, std::size_t budget = 1'000'000,
                                 const LocateOptions& opt = {}, const FlowOptions& fopt = {},
                                 const Tolerances& tol = {}) {
    AnnulusField f = shifted_displacement(sys, M, fopt, tol);
    LocateResult res = locate_zeros_field(f, r1, r2, budget, opt);
    std::vector<ZeroRecord> confirmed;
    for (auto& z : res.zeros) {
        z.shift_M = M;
        LiftedPoincareRecord rec = poincare_T(sys, {z.location.phi, z.location.r}, fopt, tol);
        double shift = kTwoPi * static_cast<double>(M);
        z.residual = std::hypot(rec.F1 + shift, rec.F2);
        if (z.residual > opt.tol_res) {
            double d = 2.0 * opt.dedup_dist;
            res.unresolved.push_back({z.location.phi - d, z.location.phi + d,
                                      z.location.r - d, z.location.r + d, 0, z.residual});
            continue;
        }
        double turns = rec.F1 / kTwoPi;
        z.winding_verified = std::lround(turns);
        if (std::fabs(turns - static_cast<double>(z.winding_verified)) > 1e-6 / kTwoPi ||
            z.winding_verified != -M)
            throw Error(ErrorClass::invalid_result,
                        "locate_zeros: re-integrated winding does not match the shift");
        confirmed.push_back(z);
    }
    res.zeros = std::move(confirmed);
    return res;
}

}  // namespace pbm
