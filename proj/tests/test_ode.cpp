#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "pbm/ode.hpp"

using namespace pbm;

TEST_CASE("dopri5 integrates the harmonic oscillator to tolerance") {
    auto rhs = [](double, const OdeState<2>& y, OdeState<2>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    OdeState<2> y0{1.0, 0.0};
    OdeState<2> y = integrate_adaptive<2>(rhs, y0, 0.0, 10.0);
    CHECK(y[0] == Catch::Approx(std::cos(10.0)).margin(1e-8));
    CHECK(y[1] == Catch::Approx(-std::sin(10.0)).margin(1e-8));
}

TEST_CASE("dopri5 respects max_dt sampling") {
    auto rhs = [](double, const OdeState<1>& y, OdeState<1>& dy) { dy[0] = y[0]; };
    OdeOptions opt;
    opt.max_dt = 0.01;
    int count = 0;
    double last = -1.0;
    bool monotone = true;
    integrate_adaptive<1>(rhs, OdeState<1>{1.0}, 0.0, 1.0, opt,
                          [&](double t, const OdeState<1>&) {
                              if (t < last) monotone = false;
                              if (count > 0) CHECK(t - last <= 0.01 + 1e-12);
                              last = t;
                              ++count;
                          });
    CHECK(monotone);
    CHECK(count >= 100);
}

TEST_CASE("dopri5 matches half-step self consistency on a driven system") {
    auto rhs = [](double t, const OdeState<2>& y, OdeState<2>& dy) {
        dy[0] = y[1];
        dy[1] = -(1.0 + 0.3 * std::cos(kTwoPi * t)) * y[0];
    };
    OdeOptions strict;
    strict.abs_tol = strict.rel_tol = 1e-12;
    OdeState<2> a = integrate_adaptive<2>(rhs, OdeState<2>{1.0, 0.0}, 0.0, 1.0);
    OdeState<2> b = integrate_adaptive<2>(rhs, OdeState<2>{1.0, 0.0}, 0.0, 1.0, strict);
    CHECK(a[0] == Catch::Approx(b[0]).margin(1e-8));
    CHECK(a[1] == Catch::Approx(b[1]).margin(1e-8));
}

TEST_CASE("step budget overflow reports numeric_budget") {
    auto rhs = [](double, const OdeState<1>& y, OdeState<1>& dy) { dy[0] = y[0]; };
    OdeOptions opt;
    opt.max_steps = 10;
    opt.max_dt = 1e-6;
    try {
        integrate_adaptive<1>(rhs, OdeState<1>{1.0}, 0.0, 1.0, opt);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.cls() == ErrorClass::numeric_budget);
    }
}
