#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pllt/errors.hpp"

namespace pllt {

/// Physical coefficients of the single-degree-of-freedom Duffing plant.
struct OscillatorParams {
    double m = 1.0;     ///< mass [kg]
    double c = 0.001;   ///< viscous damping [kg/s]
    double k = 1.0;     ///< linear stiffness [N/m]
    double k_nl = 1.0;  ///< cubic stiffness [N/m^3]

    /// Natural frequency of the underlying linear system [rad/s].
    [[nodiscard]] double omega_l() const { return std::sqrt(k / m); }

    void validate() const {
        if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("oscillator.m must be > 0");
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("oscillator.c must be >= 0");
        if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("oscillator.k must be > 0");
        if (!std::isfinite(k_nl)) throw ConfigError("oscillator.k_nl must be finite");
    }
};

/// Mechanical state of the plant.
struct MechState {
    double x = 0.0;  ///< displacement [m]
    double v = 0.0;  ///< velocity [m/s]
    double t = 0.0;  ///< time [s]
};

/// Fixed-step integration settings.
struct SimConfig {
    double f_s = 200.0;    ///< sampling/integration frequency [1/s]
    double duration = 1.0; ///< simulated time span [s]
    int decimation = 1;    ///< record every n-th sample

    [[nodiscard]] double dt() const { return 1.0 / f_s; }

    void validate() const {
        if (!(f_s > 0.0) || !std::isfinite(f_s)) throw ConfigError("sim.f_s must be > 0");
        if (!(duration > 0.0) || !std::isfinite(duration))
            throw ConfigError("sim.duration must be > 0");
        if (decimation < 1) throw ConfigError("sim.decimation must be >= 1");
    }
};

/// One recorded integration sample.
struct Sample {
    double t;
    double x;
    double v;
    double f;
};

using TimeSeries = std::vector<Sample>;

/// External force as a function of time [N].
using ForceFn = std::function<double(double)>;

/// Per-step observer; sees every accepted step in declared order.
using Observer = std::function<void(const Sample&)>;

/// Displacement guard: Duffing responses of interest are O(1), anything
/// beyond this is a blown-up run.
inline constexpr double kDivergenceGuard = 1e6;

/// Acceleration of the Duffing plant under external force f.
[[nodiscard]] inline double duffing_accel(const MechState& s, double f,
                                          const OscillatorParams& p) {
    return (f - p.c * s.v - p.k * s.x - p.k_nl * s.x * s.x * s.x) / p.m;
}

/// Classical 4th-order Runge-Kutta update of (x, v); t advances by dt exactly.
/// Throws IntegrationDivergence if the new state is non-finite.
template <typename Force>
[[nodiscard]] MechState rk4_step(const MechState& s, Force&& force, double dt,
                                 const OscillatorParams& p) {
    const double f0 = force(s.t);
    const double fh = force(s.t + 0.5 * dt);
    const double f1 = force(s.t + dt);

    const double k1x = s.v;
    const double k1v = duffing_accel(s, f0, p);

    MechState m2{s.x + 0.5 * dt * k1x, s.v + 0.5 * dt * k1v, s.t};
    const double k2x = m2.v;
    const double k2v = duffing_accel(m2, fh, p);

    MechState m3{s.x + 0.5 * dt * k2x, s.v + 0.5 * dt * k2v, s.t};
    const double k3x = m3.v;
    const double k3v = duffing_accel(m3, fh, p);

    MechState m4{s.x + dt * k3x, s.v + dt * k3v, s.t};
    const double k4x = m4.v;
    const double k4v = duffing_accel(m4, f1, p);

    MechState out;
    out.x = s.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    out.v = s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    out.t = s.t + dt;
    if (!std::isfinite(out.x) || !std::isfinite(out.v))
        throw IntegrationDivergence("integration diverged", s.t);
    return out;
}

/// Integrates the plant under an autonomous force function. Observers are
/// invoked once per accepted step in the order given. Returns the trajectory
/// decimated per cfg.decimation (always includes the initial sample).
TimeSeries simulate(const MechState& initial, const ForceFn& force, const SimConfig& cfg,
                    const OscillatorParams& p, const std::vector<Observer>& observers = {});

/// Total mechanical energy, used by dissipation checks.
[[nodiscard]] inline double total_energy(const MechState& s, const OscillatorParams& p) {
    return 0.5 * p.m * s.v * s.v + 0.5 * p.k * s.x * s.x +
           0.25 * p.k_nl * s.x * s.x * s.x * s.x;
}

}  // namespace pllt
