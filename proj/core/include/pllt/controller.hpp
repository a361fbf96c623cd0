#pragma once

#include <cmath>

#include "pllt/errors.hpp"
#include "pllt/harmonics.hpp"

namespace pllt {

/// Hard floor on the instantaneous frequency; below it the loop has collapsed.
inline constexpr double kOmegaFloor = 1e-3;

struct PIGains {
    double kp = 1.0;   ///< proportional gain [1/s]
    double ki = 5e-3;  ///< integral gain [1/s^2]

    void validate() const {
        if (!(kp >= 0.0) || !std::isfinite(kp)) throw ConfigError("gain kp must be >= 0");
        if (!(ki >= 0.0) || !std::isfinite(ki)) throw ConfigError("gain ki must be >= 0");
    }
};

/// State of the phase-locked loop: VCO phase, instantaneous frequency and
/// the PI integrator. theta is never wrapped; it is published to the
/// adaptive filters as the carrier phase.
struct ControllerState {
    double omega_o = 1.0;    ///< open-loop frequency [rad/s]
    double omega = 1.0;      ///< instantaneous frequency [rad/s]
    double theta = 0.0;      ///< accumulated VCO phase [rad]
    double e_int = 0.0;      ///< integrated phase error [rad s]
    double phase_ref = -kPi / 2.0;  ///< reference phase lag [rad]
    double force_amp = 1e-4; ///< excitation amplitude F [N]
    int kappa = 1;           ///< target response harmonic
    int upsilon = 1;         ///< subharmonic divisor
    bool integrator_clamped = false;
    bool omega_saturated = false;
};

/// Frequency saturation band relative to omega_o. The integrator clamp of
/// the anti-windup uses the same omega_max = 10 * omega_o.
[[nodiscard]] inline double omega_max(const ControllerState& s) { return 10.0 * s.omega_o; }
[[nodiscard]] inline double omega_min(const ControllerState& s) { return 0.1 * s.omega_o; }

/// Advances the VCO by one step and returns the emitted force sample
/// F sin(theta'). The same theta' must be fed to both adaptive filters.
/// t_now is only used to report the failure time on frequency collapse.
inline double vco_step(ControllerState& s, double dt, double t_now = 0.0) {
    if (!(s.omega > 0.0)) throw LoopFailure("VCO frequency collapsed", t_now);
    s.theta += s.omega * dt;
    return s.force_amp * std::sin(s.theta);
}

/// PI frequency law on the unwrapped phase-lag estimate:
///   e      = Phi_meas - Phi_ref
///   e_int' = clamp(e_int + e dt)        (anti-windup)
///   omega' = omega_o + kp e + ki e_int'
/// The integrator is clamped to +-(omega_max - omega_o)/ki and the output
/// frequency is saturated into [omega_o/10, 10 omega_o] so that failed
/// captures oscillate instead of running away.
inline void pi_update(ControllerState& s, const PIGains& g, double phase_meas_unwrapped,
                      double dt) {
    const double e = phase_meas_unwrapped - s.phase_ref;
    double e_int = s.e_int + e * dt;
    s.integrator_clamped = false;
    if (g.ki > 0.0) {
        const double bound = (omega_max(s) - s.omega_o) / g.ki;
        if (e_int > bound) {
            e_int = bound;
            s.integrator_clamped = true;
        } else if (e_int < -bound) {
            e_int = -bound;
            s.integrator_clamped = true;
        }
    }
    s.e_int = e_int;
    double omega = s.omega_o + g.kp * e + g.ki * e_int;
    s.omega_saturated = false;
    if (omega > omega_max(s)) {
        omega = omega_max(s);
        s.omega_saturated = true;
    } else if (omega < omega_min(s)) {
        omega = omega_min(s);
        s.omega_saturated = true;
    }
    s.omega = omega;
}

/// Static actuator surrogate between commanded amplitude and applied force:
/// f(theta) = gain * A * (sin th + d2 sin 2 th + d3 sin 3 th).
struct ActuatorSurrogate {
    double gain = 1.0;
    double d2 = 0.0;  ///< second-harmonic distortion fraction
    double d3 = 0.0;  ///< third-harmonic distortion fraction

    [[nodiscard]] double apply(double amplitude, double theta) const {
        double f = std::sin(theta);
        if (d2 != 0.0) f += d2 * std::sin(2.0 * theta);
        if (d3 != 0.0) f += d3 * std::sin(3.0 * theta);
        return gain * amplitude * f;
    }
};

/// Fundamental force controller: drives the measured fundamental force
/// magnitude toward the target F_o with an incremental PI update.
struct AmplitudeLoopState {
    double f_target = 1e-4;  ///< F_o [N]
    double a_cmd = 1e-4;     ///< commanded amplitude [N]
    PIGains gains{0.01, 0.01};
    double prev_error = 0.0;
    bool primed = false;

    void validate() const {
        if (!(f_target > 0.0)) throw ConfigError("amplitude_loop.f_target must be > 0");
        if (!(a_cmd > 0.0)) throw ConfigError("amplitude_loop.a_cmd must be > 0");
        gains.validate();
    }
};

/// One incremental PI step: A_cmd' = A_cmd + kp (e - e_prev) + ki e dt,
/// floored at a small positive amplitude.
inline double amplitude_control_step(AmplitudeLoopState& s, double measured_fundamental,
                                     double dt) {
    const double e = s.f_target - measured_fundamental;
    const double de = s.primed ? e - s.prev_error : 0.0;
    s.prev_error = e;
    s.primed = true;
    s.a_cmd += s.gains.kp * de + s.gains.ki * e * dt;
    const double floor = 1e-12;
    if (s.a_cmd < floor) s.a_cmd = floor;
    return s.a_cmd;
}

}  // namespace pllt
