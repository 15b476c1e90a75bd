#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "battery.hpp"
#include "pbm/lifted_flow.hpp"
#include "pbm/linear_flow.hpp"

using namespace pbm;

TEST_CASE("fundamental solution of trivial and rotational systems") {
    SymplecticPath z = fundamental_solution(LinearSystem::constant(Mat2{}, 1.0));
    CHECK((z.endpoint() - Mat2::identity()).max_abs() < 1e-12);

    SymplecticPath r = fundamental_solution(LinearSystem::constant(Mat2::identity(), kPi));
    CHECK((r.endpoint() - Mat2::diag(-1.0, -1.0)).max_abs() < 1e-8);
    for (std::size_t i = 0; i < r.t.size(); ++i)
        CHECK(std::fabs(r.psi[i].det() - 1.0) < 1e-8);
}

TEST_CASE("fundamental solution agrees with a strict-tolerance reference") {
    PeriodicMatrixFunction L{
        [](double t) { return Mat2::diag(1.0 + 0.3 * std::cos(kTwoPi * t), 1.0); }, 1.0};
    LinearSystem sys{L, 1.0};
    SymplecticPath a = fundamental_solution(sys);
    FundamentalSolutionOptions strict;
    strict.ode.abs_tol = strict.ode.rel_tol = 1e-13;
    SymplecticPath b = fundamental_solution(sys, strict);
    CHECK((a.endpoint() - b.endpoint()).max_abs() < 1e-8);
}

TEST_CASE("g function values and symmetry") {
    LinearPoincareData d;
    d.endpoint.tau_bar = 1.0;
    d.endpoint.sigma_bar = 0.0;
    d.endpoint.theta0 = eigen_direction(1.0, 0.0);
    d.index = {0, 0};

    CHECK(g_function(d, d.endpoint.theta0) == Catch::Approx(0.0).margin(1e-15));

    double e2 = std::exp(2.0), e4 = std::exp(4.0);
    double expected = std::acos((1.0 + (e2 - 1.0) * 0.5) / std::sqrt(1.0 + (e4 - 1.0) * 0.5));
    CHECK(g_function(d, d.endpoint.theta0 + kPi / 4) == Catch::Approx(expected));
    CHECK(g_max(d) == Catch::Approx(std::atan(std::sinh(1.0))));

    LinearPoincareData rot;
    rot.endpoint.rotation_only = true;
    for (double a : {0.0, 0.3, 2.0}) CHECK(g_function(rot, a) == 0.0);

    // the inner-product formula: cos g equals the normalized pairing
    for (double a : {0.1, 0.9, 2.2}) {
        double s = std::sin(a - d.endpoint.theta0), c = std::cos(a - d.endpoint.theta0);
        double num = c * c * std::exp(-1.0) + s * s * std::exp(1.0);
        double den = std::sqrt(std::exp(-2.0) * c * c + std::exp(2.0) * s * s);
        CHECK(std::cos(g_function(d, a)) == Catch::Approx(num / den));
    }
}

TEST_CASE("closed form poincare map on reference systems") {
    // L = 0: identity map
    LinearPoincareData zero = linear_poincare_data(LinearSystem::constant(Mat2{}, 1.0));
    PoincareValue v = closed_form_poincare(zero, 0.7);
    CHECK(v.Theta_T == Catch::Approx(0.0).margin(1e-9));
    CHECK(v.R_T == Catch::Approx(1.0).margin(1e-9));

    // saddle with Psi(t) = diag(e^t, e^-t): L = (0 1; 1 0), T = 1
    LinearPoincareData sad =
        linear_poincare_data(LinearSystem::constant(Mat2{0.0, 1.0, 1.0, 0.0}, 1.0));
    CHECK(sad.endpoint.theta_bar == Catch::Approx(0.0).margin(1e-9));
    CHECK(sad.endpoint.K == 0);
    CHECK(sad.endpoint.theta0 == Catch::Approx(kPi / 2).margin(1e-9));
    PoincareValue sv = closed_form_poincare(sad, 0.0);
    CHECK(sv.Theta_T == Catch::Approx(0.0).margin(1e-9));
    CHECK(sv.R_T == Catch::Approx(std::exp(1.0)).epsilon(1e-9));

    Vec2 f = F_field(sad, 0.0, 1.0);
    CHECK(f.x == Catch::Approx(0.0).margin(1e-9));
    CHECK(f.y == Catch::Approx(std::exp(1.0) - 1.0).epsilon(1e-9));

    // rotation L = I, T = pi/2
    LinearPoincareData rot =
        linear_poincare_data(LinearSystem::constant(Mat2::identity(), kPi / 2));
    for (double phi : {0.0, 1.0, 4.0}) {
        PoincareValue rv = closed_form_poincare(rot, phi);
        CHECK(rv.Theta_T == Catch::Approx(kPi / 2).margin(1e-9));
        CHECK(rv.R_T == Catch::Approx(1.0).margin(1e-9));
        Vec2 rf = F_field(rot, phi, 2.0);
        CHECK(rf.x == Catch::Approx(kPi / 2).margin(1e-9));
        CHECK(rf.y == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("closed form matches the integrated lift across a battery") {
    auto battery = pbm_test::nonresonant_battery(10, 20240612);
    for (const auto& item : battery) {
        PlanarHamiltonianSystem ham = item.sys.as_hamiltonian();
        for (int k = 0; k < 24; ++k) {
            double phi = kTwoPi * k / 24;
            LiftedPoincareRecord rec = poincare_T(ham, {phi, 1.0});
            PoincareValue cf = closed_form_poincare(item.data, phi);
            CHECK(std::fabs(rec.F1 - cf.Theta_T) < 1e-6);
            CHECK(std::fabs(rec.rT - cf.R_T) / cf.R_T < 1e-6);
        }
    }
}

TEST_CASE("property suite on deterministic endpoints") {
    // even index (saddle): P3
    LinearPoincareData sad =
        linear_poincare_data(LinearSystem::constant(Mat2::diag(-1.0, 1.0), 1.0));
    REQUIRE(sad.index.index == 0);
    PropertyReport rep = verify_properties(sad);
    for (const auto& c : rep.checks) {
        INFO(c.name << " margin " << c.margin);
        CHECK(c.passed);
    }
    CHECK(rep.find("P3 max g > |theta_bar|") != nullptr);
    CHECK(rep.find("index-0 quadrant cycle IV,I,II,III") != nullptr);

    // odd index (rotation): P4
    LinearPoincareData rot = linear_poincare_data(LinearSystem::constant(Mat2::identity(), kPi));
    REQUIRE(rot.index.index == -1);
    PropertyReport rrep = verify_properties(rot);
    for (const auto& c : rrep.checks) {
        INFO(c.name);
        CHECK(c.passed);
    }

    // resonant shear: P3'/P4' equality case
    LinearPoincareData shear =
        linear_poincare_data(LinearSystem::constant(Mat2::diag(0.0, 1.0), 1.0));
    REQUIRE(shear.index.nullity == 1);
    PropertyReport srep = verify_properties(shear);
    for (const auto& c : srep.checks) {
        INFO(c.name << " margin " << c.margin);
        CHECK(c.passed);
    }
    CHECK(srep.find("P3'/P4' max g = |theta_bar|") != nullptr);

    // double resonance: g vanishes identically
    LinearPoincareData dres =
        linear_poincare_data(LinearSystem::constant(Mat2::diag(-1.0, -1.0), kTwoPi));
    REQUIRE(dres.index.nullity == 2);
    CHECK(g_max(dres) == 0.0);
    PropertyReport drep = verify_properties(dres);
    for (const auto& c : drep.checks) CHECK(c.passed);
}

TEST_CASE("index-0 quadrant cycle with positive theta_bar") {
    // Hill coefficient -1/4 tilts the lift so that theta_bar > 0
    LinearPoincareData d =
        linear_poincare_data(LinearSystem::constant(Mat2::diag(-0.25, 1.0), 1.0));
    REQUIRE(d.index.index == 0);
    REQUIRE(d.endpoint.theta_bar > 0.0);
    PropertyReport rep = verify_properties(d);
    const PropertyCheck* qc = rep.find("index-0 quadrant cycle IV,I,II,III");
    REQUIRE(qc != nullptr);
    CHECK(qc->passed);

    // with theta_bar > 0 the cycle starts in quadrant IV at theta0 - theta_bar
    Vec2 first = F_field(d, d.endpoint.theta0 - d.endpoint.theta_bar + 1e-4, 1.0);
    CHECK(first.x > 0.0);
    CHECK(first.y < 0.0);
}

TEST_CASE("property suite across the battery") {
    auto battery = pbm_test::nonresonant_battery(12, 424242);
    for (const auto& item : battery) {
        PropertyReport rep = verify_properties(item.data);
        for (const auto& c : rep.checks) {
            INFO("index " << item.data.index.index << ": " << c.name << " margin " << c.margin);
            CHECK(c.passed);
        }
    }
}

TEST_CASE("R_T attains exp(tau_bar)") {
    LinearPoincareData sad =
        linear_poincare_data(LinearSystem::constant(Mat2{0.0, 1.0, 1.0, 0.0}, 0.8));
    double tau = sad.endpoint.tau_bar;
    double worst_max = 0.0;
    for (int i = 0; i < 512; ++i) {
        double phi = kTwoPi * i / 512;
        worst_max = std::max(worst_max, closed_form_poincare(sad, phi).R_T);
    }
    CHECK(worst_max == Catch::Approx(std::exp(tau)).epsilon(1e-6));
}
