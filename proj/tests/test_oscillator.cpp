#include <doctest.h>

#include <cmath>

#include "pllt/oscillator.hpp"
#include "support/analytic.hpp"

using namespace pllt;

namespace {
const OscillatorParams kDuffing{1.0, 0.001, 1.0, 1.0};
}

TEST_CASE("duffing acceleration by direct substitution") {
    CHECK(duffing_accel({0.0, 0.0, 0.0}, 0.0, kDuffing) == 0.0);
    CHECK(duffing_accel({1.0, 0.0, 0.0}, 0.0, kDuffing) == doctest::Approx(-2.0));
    CHECK(duffing_accel({0.5, 1.0, 0.0}, 0.2, kDuffing) == doctest::Approx(-0.426));
}

TEST_CASE("rest state under zero force is a fixed point") {
    MechState s{0.0, 0.0, 0.0};
    auto zero = [](double) { return 0.0; };
    for (int i = 0; i < 100; ++i) s = rk4_step(s, zero, 0.005, kDuffing);
    CHECK(s.x == 0.0);
    CHECK(s.v == 0.0);
    CHECK(s.t == doctest::Approx(0.5));
}

TEST_CASE("undamped linear oscillation returns after one period") {
    OscillatorParams p{1.0, 0.0, 1.0, 0.0};
    const double dt = 1.0 / 200;
    auto zero = [](double) { return 0.0; };

    MechState s{1.0, 0.0, 0.0};
    const long n = static_cast<long>(std::llround(2.0 * oracle::pi / dt));
    for (long i = 0; i < n; ++i) s = rk4_step(s, zero, dt, p);
    // land exactly on the period with a (tiny) closing step
    s = rk4_step(s, zero, 2.0 * oracle::pi - n * dt, p);
    CHECK(s.x == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(s.v) < 1e-8);
}

TEST_CASE("halving the step improves the error by ~16 (4th order)") {
    OscillatorParams p{1.0, 0.0, 1.0, 0.0};
    auto zero = [](double) { return 0.0; };
    auto error_at_dt = [&](double dt) {
        MechState s{1.0, 0.0, 0.0};
        const long n = static_cast<long>(std::llround(20.0 / dt));
        for (long i = 0; i < n; ++i) s = rk4_step(s, zero, dt, p);
        return std::abs(s.x - std::cos(static_cast<double>(n) * dt));
    };
    const double e1 = error_at_dt(0.02);
    const double e2 = error_at_dt(0.01);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
}

TEST_CASE("damped linear free decay matches the analytic solution over 50 periods") {
    OscillatorParams p{1.0, 0.001, 1.0, 0.0};
    SimConfig cfg{200.0, 50.0 * 2.0 * oracle::pi, 1};
    auto zero = [](double) { return 0.0; };
    const TimeSeries ts = simulate({1.0, 0.0, 0.0}, zero, cfg, p);
    double max_err = 0.0;
    for (const auto& s : ts)
        max_err = std::max(max_err,
                           std::abs(s.x - oracle::linear_free_response(1.0, 0.001, 1.0, 1.0,
                                                                       0.0, s.t)));
    CHECK(max_err < 1e-3);  // 0.1% of the unit initial amplitude
}

TEST_CASE("zero force from rest gives the identically-zero trajectory") {
    SimConfig cfg{200.0, 5.0, 1};
    auto zero = [](double) { return 0.0; };
    const TimeSeries ts = simulate({0.0, 0.0, 0.0}, zero, cfg, kDuffing);
    for (const auto& s : ts) {
        CHECK(s.x == 0.0);
        CHECK(s.v == 0.0);
    }
}

TEST_CASE("repeated runs are bit-identical") {
    SimConfig cfg{200.0, 30.0, 1};
    auto force = [](double t) { return 0.3 * std::sin(1.1 * t); };
    const TimeSeries a = simulate({0.1, -0.2, 0.0}, force, cfg, kDuffing);
    const TimeSeries b = simulate({0.1, -0.2, 0.0}, force, cfg, kDuffing);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].v == b[i].v);
        CHECK(a[i].t == b[i].t);
    }
}

TEST_CASE("linear plant reaches the closed-form FRF amplitude and phase") {
    OscillatorParams p{1.0, 0.001, 1.0, 0.0};
    const double w = 1.2, F = 0.01;
    auto force = [=](double t) { return F * std::sin(w * t); };

    // settle window honoring 100 / (c / 2m), then measure 10 periods
    const double settle = 100.0 / (p.c / (2.0 * p.m));
    SimConfig cfg{100.0, settle + 10.0 * 2.0 * oracle::pi / w, 1};
    const TimeSeries ts = simulate({0.0, 0.0, 0.0}, force, cfg, p);

    const double amp = oracle::peak_amplitude(ts, settle);
    const double expected = oracle::linear_frf_amplitude(1.0, 0.001, 1.0, F, w);
    CHECK(amp == doctest::Approx(expected).epsilon(1e-3));

    const auto [amp2, phase] = oracle::project_tone(ts, w, settle);
    CHECK(amp2 == doctest::Approx(expected).epsilon(1e-3));
    CHECK(phase == doctest::Approx(oracle::linear_frf_phase(1.0, 0.001, 1.0, w)).epsilon(1e-3));
}

TEST_CASE("open-loop Duffing run converges to a bounded periodic steady state") {
    auto force = [](double t) { return 0.5 * std::sin(3.0 * t); };
    SimConfig cfg{200.0, 4000.0, 1};
    const TimeSeries ts = simulate({0.0, 0.0, 0.0}, force, cfg, kDuffing);

    double max_x = 0.0;
    for (const auto& s : ts) max_x = std::max(max_x, std::abs(s.x));
    CHECK(max_x < 5.0);

    const double period = 2.0 * oracle::pi / 3.0;
    const double a1 = oracle::peak_amplitude(ts, ts.back().t - 2.0 * period);
    const double a2 = oracle::peak_amplitude(ts, ts.back().t - 4.0 * period);
    CHECK(a1 == doctest::Approx(a2).epsilon(0.02));
}

TEST_CASE("energy never increases in free damped motion") {
    SimConfig cfg{200.0, 200.0, 1};
    auto zero = [](double) { return 0.0; };
    const TimeSeries ts = simulate({1.0, 0.0, 0.0}, zero, cfg, kDuffing);
    double prev = total_energy({ts.front().x, ts.front().v, 0.0}, kDuffing);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double e = total_energy({ts[i].x, ts[i].v, 0.0}, kDuffing);
        CHECK(e <= prev * (1.0 + 1e-9));
        prev = e;
    }
}

TEST_CASE("integration divergence is reported with the failure time") {
    auto blowup = [](double) { return 1e9; };
    SimConfig cfg{200.0, 100.0, 1};
    CHECK_THROWS_AS(simulate({0.0, 0.0, 0.0}, blowup, cfg, kDuffing),
                    IntegrationDivergence);
}

TEST_CASE("invalid parameters are rejected") {
    OscillatorParams bad = kDuffing;
    bad.m = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = kDuffing;
    bad.c = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(kDuffing.omega_l() == doctest::Approx(1.0));
}
