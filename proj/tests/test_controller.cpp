#include <doctest.h>

#include <cmath>

#include "pllt/closed_loop.hpp"
#include "pllt/controller.hpp"
#include "support/analytic.hpp"

using namespace pllt;

TEST_CASE("VCO phase accumulation and force emission") {
    ControllerState s;
    s.omega_o = 1.0;
    s.omega = 1.0;
    s.force_amp = 1.0;

    // accumulate to theta = pi/2 in dyadic steps: f = sin(pi/2) = 1
    double f = 0.0;
    for (int i = 0; i < 8; ++i) f = vco_step(s, kPi / 16.0);
    CHECK(s.theta == doctest::Approx(kPi / 2.0));
    CHECK(f == doctest::Approx(1.0));

    // F = 0 emits zero force regardless of phase
    s.force_amp = 0.0;
    for (int i = 0; i < 5; ++i) CHECK(vco_step(s, 0.1) == 0.0);

    // constant omega = 2: theta = 2 t exactly (dyadic dt)
    ControllerState s2;
    s2.omega_o = 2.0;
    s2.omega = 2.0;
    const double dt = 0.25;
    for (int i = 0; i < 1000; ++i) (void)vco_step(s2, dt);
    CHECK(s2.theta == 2.0 * 1000 * dt);

    // collapsed frequency is a loop failure
    s2.omega = 0.0;
    CHECK_THROWS_AS(vco_step(s2, dt), LoopFailure);
}

TEST_CASE("PI law: zero error keeps the open-loop frequency") {
    ControllerState s;
    s.omega_o = 1.3;
    s.omega = 1.3;
    s.phase_ref = -kPi / 2.0;
    pi_update(s, {1.0, 5e-3}, s.phase_ref, 0.005);
    CHECK(s.omega == doctest::Approx(1.3));
    CHECK(s.e_int == doctest::Approx(0.0));
}

TEST_CASE("PI law: constant error gives the closed-form ramp") {
    // e = 0.1, K_P = 1.0, K_I = 5e-3: omega(t) = omega_o + 0.1 + 5e-4 t
    ControllerState s;
    s.omega_o = 1.0;
    s.omega = 1.0;
    s.phase_ref = -kPi / 2.0;
    const PIGains g{1.0, 5e-3};
    const double dt = 0.005;
    for (int i = 1; i <= 200000; ++i) {
        pi_update(s, g, s.phase_ref + 0.1, dt);
        const double t = i * dt;
        CHECK(s.omega == doctest::Approx(1.0 + 0.1 + 5e-4 * t).epsilon(1e-9));
    }
}

TEST_CASE("anti-windup clamps the integrator and saturates the frequency") {
    ControllerState s;
    s.omega_o = 1.0;
    s.omega = 1.0;
    s.phase_ref = 0.0;
    const PIGains g{1.0, 5e-3};
    // sustained huge error: integrator must stop at (10 w_o - w_o)/ki
    for (int i = 0; i < 2000000; ++i) pi_update(s, g, 50.0, 0.005);
    CHECK(s.e_int == doctest::Approx((10.0 - 1.0) / 5e-3));
    CHECK(s.integrator_clamped);
    CHECK(s.omega <= 10.0 * s.omega_o);
    CHECK(s.omega_saturated);

    // and symmetrically below
    ControllerState s2 = s;
    s2.e_int = 0.0;
    pi_update(s2, g, -50.0, 0.005);
    CHECK(s2.omega >= 0.1 * s2.omega_o);
    CHECK(s2.omega_saturated);
}

TEST_CASE("zero-error stationarity: omega constant when locked exactly") {
    ControllerState s;
    s.omega_o = 1.0;
    s.omega = 1.0;
    s.phase_ref = -kPi / 2.0;
    s.e_int = 3.0;  // arbitrary settled integrator
    const PIGains g{1.0, 5e-3};
    pi_update(s, g, s.phase_ref, 0.005);
    const double w0 = s.omega;
    for (int i = 0; i < 1000; ++i) {
        pi_update(s, g, s.phase_ref, 0.005);
        CHECK(s.omega == w0);
    }
}

TEST_CASE("amplitude controller holds when the measurement equals the target") {
    AmplitudeLoopState amp;
    amp.f_target = 0.5;
    amp.a_cmd = 0.37;
    const double before = amp.a_cmd;
    for (int i = 0; i < 100; ++i) amplitude_control_step(amp, 0.5, 0.005);
    CHECK(amp.a_cmd == doctest::Approx(before));
}

TEST_CASE("actuator surrogate applies static gain and harmonic distortion") {
    const ActuatorSurrogate act{0.8, 0.1, 0.0};
    const double th = 0.7;
    CHECK(act.apply(2.0, th) ==
          doctest::Approx(0.8 * 2.0 * (std::sin(th) + 0.1 * std::sin(2.0 * th))));
}

TEST_CASE("closed loop locks the linear plant at its natural frequency") {
    RigConfig cfg;
    cfg.plant = {1.0, 0.001, 1.0, 0.0};  // linear
    cfg.f_s = 200.0;
    cfg.filter = {5, 1, 1e-4};
    cfg.gains = {1.0, 5e-3};
    cfg.omega_o = 0.9;  // 0.9 of the natural frequency
    cfg.phase_ref = -kPi / 2.0;
    cfg.force_amp = 1e-4;
    cfg.kappa = 1;

    ClosedLoopRig rig(cfg);
    rig.run(4000.0);
    // the phase crosses -pi/2 exactly at omega_l = 1 on a linear plant
    CHECK(std::abs(rig.omega() - 1.0) < 1e-3);
    CHECK(std::abs(wrap_to_pi(rig.phase_lag_unwrapped() - cfg.phase_ref)) < 1e-3);
    CHECK(rig.locked());
}

TEST_CASE("closed loop locks the Duffing primary resonance from rest") {
    RigConfig cfg;
    cfg.plant = {1.0, 0.001, 1.0, 1.0};
    cfg.f_s = 200.0;
    cfg.filter = {5, 1, 1e-4};
    cfg.gains = {1.0, 5e-3};
    cfg.omega_o = 1.0;
    cfg.phase_ref = -kPi / 2.0;
    cfg.force_amp = 1e-4;

    RunLog log = run_closed_loop(cfg, 5000.0, 100);
    CHECK(log.locked);
    CHECK(std::abs(wrap_to_pi(log.final_phase_lag - cfg.phase_ref)) < 1e-3);
    CHECK(!log.rows.empty());
}

TEST_CASE("zero excitation reports an undefined phase instead of crashing") {
    RigConfig cfg;
    cfg.plant = {1.0, 0.001, 1.0, 1.0};
    cfg.f_s = 200.0;
    cfg.filter = {5, 1, 1e-4};
    cfg.gains = {1.0, 5e-3};
    cfg.omega_o = 1.0;
    cfg.phase_ref = -kPi / 2.0;
    cfg.force_amp = 0.0;  // the plant stays at rest

    ClosedLoopRig rig(cfg);
    CHECK_THROWS_AS(rig.run(2000.0), UndefinedPhase);
}

TEST_CASE("step ordering is deterministic: identical rigs produce identical streams") {
    RigConfig cfg;
    cfg.plant = {1.0, 0.001, 1.0, 1.0};
    cfg.f_s = 200.0;
    cfg.filter = {5, 1, 1e-4};
    cfg.gains = {1.0, 5e-3};
    cfg.omega_o = 1.0;
    cfg.phase_ref = -kPi / 2.0;
    cfg.force_amp = 1e-4;

    ClosedLoopRig a(cfg), b(cfg);
    for (int i = 0; i < 200000; ++i) {
        a.step();
        b.step();
        REQUIRE(a.omega() == b.omega());
        REQUIRE(a.state().x == b.state().x);
        REQUIRE(a.theta() == b.theta());
    }
}

TEST_CASE("fundamental force controller settles on the target magnitude") {
    // identity actuator: measured fundamental reaches F_o within 0.1%;
    // static gain 0.8: the command compensates to F_o / 0.8 within 0.5%
    for (const double gain : {1.0, 0.8}) {
        RigConfig cfg;
        cfg.plant = {1.0, 0.001, 1.0, 1.0};
        cfg.f_s = 200.0;
        cfg.filter = {5, 1, 1e-3};  // the force-controller filter runs mu = 1e-3
        cfg.gains = {1.0, 5e-3};
        cfg.omega_o = 1.0;
        cfg.phase_ref = -kPi / 2.0;
        cfg.force_amp = 1e-4;
        AmplitudeLoopConfig amp;
        amp.f_target = 1e-4;
        amp.gains = {0.01, 0.01};
        amp.actuator.gain = gain;
        cfg.amplitude_loop = amp;

        ClosedLoopRig rig(cfg);
        rig.run(4000.0);
        const double measured = rig.force_filter().amplitude(1);
        CHECK(std::abs(measured - amp.f_target) / amp.f_target < 1e-3);
        CHECK(std::abs(rig.amplitude_loop()->a_cmd - amp.f_target / gain) /
                  (amp.f_target / gain) <
              5e-3);
    }
}
