#pragma once

// Planar phase-space primitives shared by the whole library: 2x2 matrices,
// the clockwise polar lift and its symplectic variant, and the handles that
// describe periodic linear and nonlinear planar Hamiltonian systems.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace pbm {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ErrorClass : int {
    config = 2,          // bad input / configuration
    numeric_budget = 3,  // step-size collapse, search budget exhausted, ...
    invalid_result = 4,  // a produced certificate failed validation
    internal = 5,        // data corrupted in a way that indicates a bug
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass cls() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

struct Tolerances {
    double symmetry = 1e-9;     // relative test |a12 - a21| <= symmetry * scale
    double symplectic = 1e-6;   // |det - 1| allowed when decomposing a matrix
    double eps_res = 1e-7;      // resonance band on det(I - Psi(T))
    double tau_min = 1e-8;      // below this tau the hyperbolic factor is identity
    double det_drift = 1e-8;    // determinant budget for integrated fundamental matrices
    double r_min = 1e-10;       // the polar lift is undefined closer to the origin
};

// ---------------------------------------------------------------------------
// vectors and matrices

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    Mat2() = default;
    Mat2(double m11, double m12, double m21, double m22)
        : a11(m11), a12(m12), a21(m21), a22(m22) {}

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
    // J = (0 1; -1 0), the standard planar symplectic structure.
    static Mat2 J() { return {0.0, 1.0, -1.0, 0.0}; }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    Mat2 transposed() const { return {a11, a21, a12, a22}; }

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    Vec2 operator*(Vec2 v) const { return apply(v); }

    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

    double max_abs() const {
        return std::max(std::max(std::fabs(a11), std::fabs(a12)),
                        std::max(std::fabs(a21), std::fabs(a22)));
    }

    bool is_symmetric(double tol = 1e-9) const {
        double scale = 1.0 + max_abs();
        return std::fabs(a12 - a21) <= tol * scale;
    }
    bool is_symplectic(double tol = 1e-9) const { return std::fabs(det() - 1.0) <= tol; }

    bool finite() const {
        return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) &&
               std::isfinite(a22);
    }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// det(I - M); the sign of this quantity classifies M in Sp(1).
inline double det_i_minus(const Mat2& m) {
    return (1.0 - m.a11) * (1.0 - m.a22) - m.a12 * m.a21;
}

// ---------------------------------------------------------------------------
// clockwise polar lift

// A point of the universal covering R x R+ of the punctured plane.
// phi is the lifted clockwise angle and is never reduced mod 2*pi.
struct LiftedPoint {
    double phi = 0.0;
    double r = 1.0;
};

// Covering projection: increasing phi moves clockwise in the plane.
inline Vec2 project(LiftedPoint p) { return {p.r * std::cos(p.phi), -p.r * std::sin(p.phi)}; }
inline Vec2 project(double phi, double r) { return project(LiftedPoint{phi, r}); }

// Symplectic chart: the radial coordinate here is r_hat = r^2 / 2, so that
// project_symplectic(phi, r^2/2) == project(phi, r).
inline Vec2 project_symplectic(LiftedPoint p) {
    double r = std::sqrt(2.0 * p.r);
    return {r * std::cos(p.phi), -r * std::sin(p.phi)};
}
inline Vec2 project_symplectic(double phi, double r_hat) {
    return project_symplectic(LiftedPoint{phi, r_hat});
}

// Clockwise angle of z in [0, 2*pi): project(angle, |z|) == z.
inline double clockwise_angle(Vec2 z) {
    if (z.norm() == 0.0) throw Error(ErrorClass::config, "clockwise_angle: zero vector");
    double a = std::atan2(-z.y, z.x);
    if (a < 0.0) a += kTwoPi;
    return a;
}

// Continuation of the lift: returns phi with project(phi, |z|) == z and
// |phi - prev_phi| <= pi. A tie at exactly pi resolves to prev_phi + pi.
inline double lift_angle(double prev_phi, Vec2 z) {
    if (!(z.norm() > 0.0)) throw Error(ErrorClass::config, "lift_angle: zero vector");
    double base = std::atan2(-z.y, z.x);
    double d = std::remainder(base - prev_phi, kTwoPi);  // in [-pi, pi]
    if (d <= -kPi) d += kTwoPi;
    return prev_phi + d;
}

// ---------------------------------------------------------------------------
// system descriptions

// t -> L(t), T-periodic and symmetric at every sample.
struct PeriodicMatrixFunction {
    std::function<Mat2(double)> eval;
    double period = 1.0;

    Mat2 operator()(double t) const { return eval(t); }

    static PeriodicMatrixFunction constant(Mat2 m, double period) {
        return {[m](double) { return m; }, period};
    }
};

// Planar Hamiltonian system z' = J * grad_z H(t, z). Only the gradient is
// exposed; H values, where needed, are recovered by line-integral quadrature.
struct PlanarHamiltonianSystem {
    std::function<Vec2(double, Vec2)> grad_H;
    double period = 1.0;
    std::optional<PeriodicMatrixFunction> linearization_at_zero;
    std::optional<PeriodicMatrixFunction> linearization_at_infinity;

    Vec2 field(double t, Vec2 z) const {
        Vec2 g = grad_H(t, z);
        return {g.y, -g.x};  // J * g
    }
};

// Line integral of grad H along the straight segment [za, zb] at frozen time,
// by 16-point composite Gauss-Legendre(4). Exact path-independence of the
// gradient makes this the H difference H(t, zb) - H(t, za).
inline double hamiltonian_difference(const PlanarHamiltonianSystem& sys, double t, Vec2 za,
                                     Vec2 zb, int panels = 8) {
    static const double gl_x[4] = {-0.8611363115940526, -0.3399810435848563,
                                   0.3399810435848563, 0.8611363115940526};
    static const double gl_w[4] = {0.3478548451374538, 0.6521451548625461,
                                   0.6521451548625461, 0.3478548451374538};
    Vec2 d = zb - za;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double s0 = static_cast<double>(p) / panels;
        double s1 = static_cast<double>(p + 1) / panels;
        double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        for (int k = 0; k < 4; ++k) {
            double s = mid + half * gl_x[k];
            Vec2 z = za + d * s;
            total += gl_w[k] * half * sys.grad_H(t, z).dot(d);
        }
    }
    return total;
}

namespace detail {

// floor/ceil division for int arguments (C++ '/' truncates toward zero).
inline long floor_div(long a, long b) {
    long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}
inline long ceil_div(long a, long b) { return -floor_div(-a, b); }

// Cubic smoothstep on [lo, hi] with flat endpoints; exactly 0/1 outside.
inline double smoothstep(double s, double lo, double hi) {
    if (s <= lo) return 0.0;
    if (s >= hi) return 1.0;
    double u = (s - lo) / (hi - lo);
    return u * u * (3.0 - 2.0 * u);
}
inline double smoothstep_derivative(double s, double lo, double hi) {
    if (s <= lo || s >= hi) return 0.0;
    double u = (s - lo) / (hi - lo);
    return 6.0 * u * (1.0 - u) / (hi - lo);
}

}  // namespace detail

}  // namespace pbm
