#pragma once

// Decomposition of Sp(1) matrices into hyperbolic-rotation x rotation form,
// continuous lifting of matrix paths, endpoint classification and the Maslov
// index (with nullity in the resonant case).

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "pbm/core.hpp"

namespace pbm {

// Clockwise rotation R(theta) = (cos, sin; -sin, cos).
inline Mat2 clockwise_rotation(double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {c, s, -s, c};
}

// Hyperbolic rotation P(tau, sigma): symmetric positive definite, det 1,
// eigenvalues e^{+-tau}, expansion axis at angle sigma/2.
inline Mat2 hyperbolic_rotation(double tau, double sigma) {
    double ch = std::cosh(tau), sh = std::sinh(tau);
    double c = std::cos(sigma), s = std::sin(sigma);
    return {ch + sh * c, sh * s, sh * s, ch - sh * c};
}

// Coordinates of M = P(tau, sigma) R(theta). sigma is undefined when the
// hyperbolic factor is (numerically) the identity; sigma_defined records it.
struct DecompCoords {
    double tau = 0.0;
    double sigma = 0.0;
    bool sigma_defined = false;
    double theta = 0.0;
};

inline Mat2 reconstruct(const DecompCoords& c) {
    return hyperbolic_rotation(c.tau, c.sigma) * clockwise_rotation(c.theta);
}

// Polar split of a symplectic matrix. The SPD square root of M M^T is
// computed in closed form: sqrt(S) = (S + sqrt(det S) I) / sqrt(tr S + 2 sqrt(det S)).
inline DecompCoords decompose(const Mat2& m, const Tolerances& tol = {}) {
    if (!m.finite() || !m.is_symplectic(tol.symplectic))
        throw Error(ErrorClass::config, "decompose: matrix is not symplectic within tolerance");

    Mat2 s = m * m.transposed();
    double dets = std::sqrt(std::max(s.det(), 0.0));
    double denom2 = s.trace() + 2.0 * dets;
    if (!(denom2 > 0.0))
        throw Error(ErrorClass::internal, "decompose: M M^T has nonpositive trace");
    double denom = std::sqrt(denom2);
    Mat2 p{(s.a11 + dets) / denom, s.a12 / denom, s.a21 / denom, (s.a22 + dets) / denom};

    double half_trace = 0.5 * p.trace();
    if (!(half_trace > 0.0))
        throw Error(ErrorClass::internal, "decompose: SPD factor has nonpositive trace");

    DecompCoords out;
    // trace within roundoff of 2 means the SPD factor is the identity up to
    // noise; acosh would amplify that noise to ~1e-8
    constexpr double flat = 16.0 * 2.220446049250313e-16;
    out.tau = (half_trace <= 1.0 + flat) ? 0.0 : std::acosh(half_trace);
    if (out.tau > tol.tau_min) {
        out.sigma = std::atan2(p.a12, 0.5 * (p.a11 - p.a22));
        out.sigma_defined = true;
    }

    // R = P^{-1} M; P is SPD with det 1, so P^{-1} = (p22, -p12; -p21, p11).
    Mat2 pinv{p.a22, -p.a12, -p.a21, p.a11};
    Mat2 r = pinv * m;
    out.theta = std::atan2(r.a12, r.a11);
    return out;
}

enum class GammaClass { Plus, Minus, Zero };

// Sign of det(I - M), with the band |det(I - M)| <= eps_res reported as the
// resonant surface Gamma^0.
inline GammaClass classify(const Mat2& m, const Tolerances& tol = {}) {
    double d = det_i_minus(m);
    if (std::fabs(d) <= tol.eps_res) return GammaClass::Zero;
    return d > 0.0 ? GammaClass::Plus : GammaClass::Minus;
}

// Sampled path t -> Psi(t) in Sp(1) with continuously lifted coordinates.
struct SymplecticPath {
    std::vector<double> t;
    std::vector<Mat2> psi;
    std::vector<DecompCoords> coords;  // theta lifted from 0; sigma lifted per run
    bool rotation_only = false;        // tau never exceeded tau_min along the path

    double duration() const { return t.back() - t.front(); }
    const Mat2& endpoint() const { return psi.back(); }
};

// Lifts a sampled matrix path. Requires Psi(t_0) = I and raw theta increments
// below pi/2 per step once unwrapped; callers violating the step contract
// must resample more finely.
inline SymplecticPath lift_path(const std::vector<std::pair<double, Mat2>>& samples,
                                const Tolerances& tol = {}) {
    if (samples.size() < 2) throw Error(ErrorClass::config, "lift_path: need at least 2 samples");
    if ((samples.front().second - Mat2::identity()).max_abs() > 1e-9)
        throw Error(ErrorClass::config, "lift_path: path must start at the identity");

    SymplecticPath path;
    path.t.reserve(samples.size());
    path.psi.reserve(samples.size());
    path.coords.reserve(samples.size());

    double theta_prev = 0.0;
    double sigma_prev = 0.0;
    bool sigma_ever = false;
    bool in_run = false;

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Mat2& m = samples[i].second;
        if (std::fabs(m.det() - 1.0) > tol.symplectic)
            throw Error(ErrorClass::config, "lift_path: sample determinant drifted from 1");
        DecompCoords c = decompose(m, tol);

        double dtheta = std::remainder(c.theta - theta_prev, kTwoPi);
        if (i > 0 && std::fabs(dtheta) >= 0.5 * kPi)
            throw Error(ErrorClass::numeric_budget,
                        "lift_path: theta step >= pi/2, resample more finely");
        double theta_lifted = (i == 0) ? 0.0 : theta_prev + dtheta;
        theta_prev = theta_lifted;

        if (c.sigma_defined) {
            if (in_run) {
                // continuity within a tau > tau_min run
                c.sigma = sigma_prev + std::remainder(c.sigma - sigma_prev, kTwoPi);
            }
            sigma_prev = c.sigma;
            sigma_ever = true;
            in_run = true;
        } else {
            // hold the last defined value across tau ~ 0 gaps
            c.sigma = sigma_prev;
            c.sigma_defined = sigma_ever;
            in_run = false;
        }
        c.theta = theta_lifted;

        path.t.push_back(samples[i].first);
        path.psi.push_back(m);
        path.coords.push_back(c);
    }
    path.rotation_only = !sigma_ever;
    return path;
}

struct MaslovIndex {
    long index = 0;
    int nullity = 0;  // dim ker(I - Psi(T)); 0 iff nonresonant
};

// Endpoint data of the lifted path, the inputs of the closed-form Poincare map.
struct EndpointData {
    double tau_bar = 0.0;
    double sigma_bar = 0.0;
    double theta_bar = 0.0;  // in [-pi, pi), congruent to theta(T)
    long K = 0;              // even; theta(T) = theta_bar - K*pi
    double theta0 = 0.0;     // axis angle of the e^{-tau} eigenvector, in [0, pi)
    bool rotation_only = false;
};

// Clockwise argument, reduced to [0, pi), of the e^{-tau} eigenvector of
// P(tau, sigma). The eigenvector sits at standard angle sigma/2 + pi/2, which
// is clockwise angle -(sigma/2 + pi/2); all angular formulas downstream live
// in the clockwise chart, so the axis must be expressed there too.
inline double eigen_direction(double tau_bar, double sigma_bar, const Tolerances& tol = {}) {
    if (tau_bar <= tol.tau_min)
        throw Error(ErrorClass::config, "eigen_direction: undefined for tau <= tau_min");
    double theta0 = std::fmod(0.5 * kPi - 0.5 * sigma_bar, kPi);
    if (theta0 < 0.0) theta0 += kPi;
    return theta0;
}

namespace detail {

// Index from classified endpoint data; exposed for tests of the error paths.
inline MaslovIndex index_from_endpoint(GammaClass cls, long K, double theta_bar, int nullity) {
    switch (cls) {
        case GammaClass::Minus:
            return {K, 0};
        case GammaClass::Plus:
            if (theta_bar == 0.0)
                throw Error(ErrorClass::internal,
                            "maslov_index: Gamma+ endpoint with theta_bar = 0 "
                            "(tolerance misconfiguration)");
            return {theta_bar < 0.0 ? K + 1 : K - 1, 0};
        case GammaClass::Zero:
            if (theta_bar >= 0.5 * kPi || theta_bar < -0.5 * kPi)
                throw Error(ErrorClass::internal,
                            "maslov_index: resonant endpoint with |theta_bar| >= pi/2");
            return {theta_bar < 0.0 ? K : K - 1, nullity};
    }
    throw Error(ErrorClass::internal, "maslov_index: unreachable");
}

}  // namespace detail

// Maslov index and endpoint data of a lifted path.
inline std::pair<MaslovIndex, EndpointData> maslov_index(const SymplecticPath& path,
                                                         const Tolerances& tol = {}) {
    if (path.t.empty()) throw Error(ErrorClass::config, "maslov_index: empty path");

    const Mat2& end = path.endpoint();
    const DecompCoords& c = path.coords.back();

    EndpointData d;
    d.tau_bar = c.tau;
    d.sigma_bar = c.sigma;
    d.rotation_only = path.rotation_only || c.tau <= tol.tau_min;

    double theta_T = c.theta;
    double k_real = std::floor((theta_T + kPi) / kTwoPi);
    d.theta_bar = theta_T - kTwoPi * k_real;
    if (d.theta_bar >= kPi) {  // guard the [-pi, pi) half-open edge
        d.theta_bar -= kTwoPi;
        k_real += 1.0;
    }
    double k_exact = (d.theta_bar - theta_T) / kPi;
    d.K = 2 * static_cast<long>(std::llround(-k_real));
    if (std::fabs(k_exact - static_cast<double>(d.K)) > 1e-6)
        throw Error(ErrorClass::internal, "maslov_index: K is not an even integer (lift corrupted)");

    d.theta0 = d.rotation_only ? 0.0 : eigen_direction(d.tau_bar, d.sigma_bar, tol);

    GammaClass cls = classify(end, tol);
    int nullity = 0;
    if (cls == GammaClass::Zero)
        nullity = ((Mat2::identity() - end).max_abs() <= tol.eps_res) ? 2 : 1;

    MaslovIndex idx = detail::index_from_endpoint(cls, d.K, d.theta_bar, nullity);
    return {idx, d};
}

}  // namespace pbm
