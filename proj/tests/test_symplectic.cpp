#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "pbm/symplectic.hpp"

using namespace pbm;

namespace {

// Closed-form sampled paths used as oracles.
std::vector<std::pair<double, Mat2>> rotation_path(double omega, double T, int n = 400) {
    std::vector<std::pair<double, Mat2>> s;
    for (int i = 0; i <= n; ++i) {
        double t = T * i / n;
        s.emplace_back(t, clockwise_rotation(omega * t));
    }
    return s;
}

std::vector<std::pair<double, Mat2>> hyperbolic_path(double sigma, double T, int n = 400) {
    std::vector<std::pair<double, Mat2>> s;
    for (int i = 0; i <= n; ++i) {
        double t = T * i / n;
        s.emplace_back(t, hyperbolic_rotation(t, sigma));
    }
    return s;
}

std::vector<std::pair<double, Mat2>> shear_path(double T, int n = 400) {
    std::vector<std::pair<double, Mat2>> s;
    for (int i = 0; i <= n; ++i) {
        double t = T * i / n;
        s.emplace_back(t, Mat2{1.0, t, 0.0, 1.0});
    }
    return s;
}

}  // namespace

TEST_CASE("decompose identity and pure factors") {
    DecompCoords c = decompose(Mat2::identity());
    CHECK(c.tau == 0.0);
    CHECK_FALSE(c.sigma_defined);
    CHECK(c.theta == Catch::Approx(0.0).margin(1e-15));

    c = decompose(clockwise_rotation(kPi / 3));
    CHECK(c.tau <= 1e-8);
    CHECK(c.theta == Catch::Approx(kPi / 3));

    c = decompose(Mat2::diag(std::exp(1.0), std::exp(-1.0)));
    CHECK(c.tau == Catch::Approx(1.0));
    CHECK(c.sigma == Catch::Approx(0.0).margin(1e-12));
    CHECK(c.theta == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("decompose-reconstruct roundtrip on random symplectic matrices") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> utau(0.0, 3.0), uang(-kPi, kPi);
    for (int k = 0; k < 1000; ++k) {
        double tau = utau(rng), sigma = uang(rng), theta = uang(rng);
        Mat2 m = hyperbolic_rotation(tau, sigma) * clockwise_rotation(theta);
        DecompCoords c = decompose(m);
        Mat2 back = reconstruct(c);
        CHECK((back - m).max_abs() <= 1e-9 * (1.0 + m.max_abs()));
    }
}

TEST_CASE("decompose rejects non-symplectic input") {
    CHECK_THROWS_AS(decompose(Mat2::diag(2.0, 1.0)), Error);
}

TEST_CASE("classify endpoints") {
    CHECK(classify(Mat2::diag(-1.0, -1.0)) == GammaClass::Plus);
    CHECK(classify(Mat2::diag(2.0, 0.5)) == GammaClass::Minus);
    CHECK(classify(Mat2::identity()) == GammaClass::Zero);
}

TEST_CASE("classify matches the rho > sin^2 theta criterion") {
    // det(I - P(tau, sigma) R(theta)) = 2 - 2 cosh(tau) cos(theta);
    // Gamma^- iff tanh^2 tau > sin^2 theta when |theta| < pi/2.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> utau(0.2, 2.0), usig(-kPi, kPi),
        uth(-0.05, 0.05);
    for (int k = 0; k < 200; ++k) {
        double tau = utau(rng), sigma = usig(rng), theta = uth(rng);
        Mat2 m = hyperbolic_rotation(tau, sigma) * clockwise_rotation(theta);
        double rho = std::tanh(tau) * std::tanh(tau);
        bool gamma_minus = rho > std::sin(theta) * std::sin(theta);
        CHECK((classify(m) == GammaClass::Minus) == gamma_minus);
    }
}

TEST_CASE("lift_path keeps theta continuous across turns") {
    SymplecticPath p = lift_path(rotation_path(1.0, 3.0 * kPi));
    CHECK(p.coords.back().theta == Catch::Approx(3.0 * kPi).margin(1e-9));
    CHECK(p.rotation_only);

    SymplecticPath h = lift_path(hyperbolic_path(0.0, 2.0));
    CHECK(h.coords.back().theta == Catch::Approx(0.0).margin(1e-9));
    CHECK(h.coords.back().tau == Catch::Approx(2.0));

    std::vector<std::pair<double, Mat2>> constant;
    for (int i = 0; i <= 10; ++i) constant.emplace_back(0.1 * i, Mat2::identity());
    SymplecticPath c = lift_path(constant);
    for (const auto& cc : c.coords) CHECK(cc.theta == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("lift_path rejects coarse sampling") {
    CHECK_THROWS_AS(lift_path(rotation_path(1.0, 3.0 * kPi, 5)), Error);
}

TEST_CASE("K parity holds on lifted paths") {
    for (double omega : {1.0, -1.0, 2.3, -3.7}) {
        for (double T : {1.0, kPi, 2.0}) {
            SymplecticPath p = lift_path(rotation_path(omega, T, 2000));
            auto [idx, end] = maslov_index(p);
            double k = (end.theta_bar - p.coords.back().theta) / kPi;
            CHECK(std::fabs(k - std::round(k)) < 1e-6);
            CHECK(std::llabs(static_cast<long long>(std::llround(k))) % 2 == 0);
        }
    }
}

TEST_CASE("maslov index oracle table") {
    // L = I, T = pi: Psi = R(t), endpoint -I
    auto [i1, e1] = maslov_index(lift_path(rotation_path(1.0, kPi)));
    CHECK(i1.index == -1);
    CHECK(i1.nullity == 0);
    CHECK(e1.K == -2);

    // L = -I, T = pi: Psi = R(-t)
    auto [i2, e2] = maslov_index(lift_path(rotation_path(-1.0, kPi)));
    CHECK(i2.index == 1);
    CHECK(i2.nullity == 0);
    CHECK(e2.K == 0);

    // L = diag(-1, 1), T = 1: Psi = P(t, pi/2)
    auto [i3, e3] = maslov_index(lift_path(hyperbolic_path(kPi / 2, 1.0)));
    CHECK(i3.index == 0);
    CHECK(i3.nullity == 0);
    CHECK(e3.tau_bar == Catch::Approx(1.0));

    // L = -I, T = 2 pi: double resonance, Psi(T) = I
    auto [i4, e4] = maslov_index(lift_path(rotation_path(-1.0, 2.0 * kPi, 2000)));
    CHECK(i4.index == 1);
    CHECK(i4.nullity == 2);
    CHECK(e4.K == 2);

    // shear: L = diag(0, 1), T = 1
    auto [i5, e5] = maslov_index(lift_path(shear_path(1.0)));
    CHECK(i5.index == -1);
    CHECK(i5.nullity == 1);
    CHECK(e5.K == 0);
    CHECK(e5.theta_bar == Catch::Approx(std::atan(0.5)));
}

TEST_CASE("eigen_direction of the contraction axis") {
    CHECK(eigen_direction(1.0, 0.0) == Catch::Approx(kPi / 2));
    CHECK(eigen_direction(0.5, kPi) == Catch::Approx(0.0).margin(1e-12));
    CHECK(eigen_direction(1.0, kPi / 2) == Catch::Approx(kPi / 4));
    CHECK_THROWS_AS(eigen_direction(0.0, 0.0), Error);

    // cross-check numerically: P(1, pi/2) contracts along (1, -1), whose
    // clockwise angle is pi/4
    Mat2 p = hyperbolic_rotation(1.0, kPi / 2);
    Vec2 v = project(eigen_direction(1.0, kPi / 2), 1.0);
    Vec2 pv = p * v;
    CHECK((pv - v * std::exp(-1.0)).norm() < 1e-12);
}

TEST_CASE("inconsistent endpoint data is rejected") {
    using detail::index_from_endpoint;
    CHECK_THROWS_AS(index_from_endpoint(GammaClass::Plus, 0, 0.0, 0), Error);
    CHECK_THROWS_AS(index_from_endpoint(GammaClass::Zero, 0, 2.0, 1), Error);
    CHECK(index_from_endpoint(GammaClass::Minus, 4, 0.3, 0).index == 4);
    CHECK(index_from_endpoint(GammaClass::Plus, 2, -0.5, 0).index == 3);
    CHECK(index_from_endpoint(GammaClass::Plus, 2, 0.5, 0).index == 1);
    CHECK(index_from_endpoint(GammaClass::Zero, 2, -0.3, 1).index == 2);
    CHECK(index_from_endpoint(GammaClass::Zero, 2, 0.3, 1).index == 1);
}

TEST_CASE("monotonicity on the constant family c I, T = pi") {
    // In this paper's clockwise-negative convention the index decreases as
    // the matrix grows: A <= B implies index(B) + nu(B) <= index(A).
    // c = +-2 is resonant at T = pi and is skipped (nonresonant pairs only).
    std::vector<double> cs{-1.0, -0.5, 0.5, 1.0};
    std::vector<long> idx;
    for (double c : cs) {
        auto [i, e] = maslov_index(lift_path(rotation_path(c, kPi, 2000)));
        REQUIRE(i.nullity == 0);
        idx.push_back(i.index);
    }
    for (std::size_t a = 0; a < cs.size(); ++a)
        for (std::size_t b = 0; b < cs.size(); ++b)
            if (cs[a] <= cs[b]) CHECK(idx[b] <= idx[a]);
}
