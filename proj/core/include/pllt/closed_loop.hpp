#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pllt/controller.hpp"
#include "pllt/harmonics.hpp"
#include "pllt/oscillator.hpp"

namespace pllt {

/// Lock certificate: the wrapped distance |Phi_hat - Phi_ref| must stay below
/// tol_lock continuously for hold_periods excitation periods.
struct LockPolicy {
    double tol_lock = 0.5 * kPi / 180.0;  ///< 0.5 degrees
    double hold_periods = 50.0;           ///< excitation periods 2 pi / omega

    void validate() const {
        if (!(tol_lock > 0.0)) throw ConfigError("lock.tol_lock must be > 0");
        if (!(hold_periods > 0.0)) throw ConfigError("lock.hold_periods must be > 0");
    }
};

/// Optional fundamental-force control loop with its actuator surrogate.
struct AmplitudeLoopConfig {
    double f_target = 1e-4;  ///< settled fundamental force magnitude F_o [N]
    PIGains gains{0.01, 0.01};
    ActuatorSurrogate actuator;
};

struct RigConfig {
    OscillatorParams plant;
    double f_s = 200.0;
    FilterConfig filter;  ///< filter.upsilon is the resonance divisor
    PIGains gains;
    double omega_o = 1.0;
    double phase_ref = -kPi / 2.0;
    double force_amp = 1e-4;
    int kappa = 1;
    LockPolicy lock;
    std::optional<AmplitudeLoopConfig> amplitude_loop;
    /// Excitation periods a degenerate phase estimate is tolerated before the
    /// run fails with an undefined-phase error (covers F = 0).
    double grace_periods = 100.0;

    void validate() const {
        plant.validate();
        if (!(f_s > 0.0)) throw ConfigError("sim.f_s must be > 0");
        filter.validate();
        gains.validate();
        lock.validate();
        if (!(omega_o > 0.0)) throw ConfigError("controller.omega0 must be > 0");
        if (!(force_amp >= 0.0)) throw ConfigError("controller.force_amp must be >= 0");
        if (kappa < 1 || kappa > filter.n_harmonics)
            throw ConfigError("controller.kappa must lie in [1, filter.n]");
        if (filter.upsilon > filter.n_harmonics)
            throw ConfigError("controller.upsilon must be <= filter.n");
    }
};

/// One decimated row of the closed-loop run log.
struct LoopLogRow {
    double t;
    double omega;
    double phase_lag;  ///< unwrapped estimate fed to the controller
    std::vector<double> amps;  ///< A_1..A_N of the response filter
    double x;
    double f;
    bool locked;
};

using LogSink = std::function<void(const LoopLogRow&)>;

/// Filter diagnostic row: synthesis error plus per-harmonic estimates of the
/// response filter. Phases of degenerate harmonics are NaN.
struct FilterDiagRow {
    double t;
    double epsilon;
    std::vector<double> amps;
    std::vector<double> phases;
};

using FilterDiagSink = std::function<void(const FilterDiagRow&)>;

/// The virtual test rig: Duffing plant in closed loop with the adaptive-filter
/// phase detector, PI frequency law and VCO. One step() advances a single
/// sample with the fixed order: (1) VCO emits the force over the step window,
/// (2) the plant integrates one RK4 step, (3) both filters update from the new
/// x and f samples, (4) the phase lag is computed and unwrapped, (5) the PI
/// law updates the frequency (and the amplitude loop, when configured).
class ClosedLoopRig {
public:
    explicit ClosedLoopRig(RigConfig cfg);

    /// Advances one sample. Throws IntegrationDivergence, FilterDivergence,
    /// LoopFailure or UndefinedPhase, each carrying the failure time.
    void step();

    /// Runs for a time span (seconds of simulated time).
    void run(double duration);

    void set_phase_ref(double phase_ref);
    /// Changes the force amplitude target, ramping linearly over ramp_seconds.
    void set_force_target(double force, double ramp_seconds);

    [[nodiscard]] const MechState& state() const { return state_; }
    [[nodiscard]] double t() const { return state_.t; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] double omega() const { return ctrl_.omega; }
    [[nodiscard]] double theta() const { return ctrl_.theta; }
    [[nodiscard]] double phase_ref() const { return ctrl_.phase_ref; }
    [[nodiscard]] double force_amp() const { return force_now_; }
    [[nodiscard]] double applied_force() const { return f_last_; }

    [[nodiscard]] bool phase_defined() const { return have_phase_; }
    /// Unwrapped phase-lag stream value (controller input).
    [[nodiscard]] double phase_lag_unwrapped() const { return unwrapper_.value(); }
    /// Wrapped phase lag in (-pi, pi].
    [[nodiscard]] double phase_lag_wrapped() const { return wrap_to_pi(unwrapper_.value()); }

    [[nodiscard]] double harmonic_amplitude(int k) const { return resp_.amplitude(k); }
    /// Peak amplitude of the reconstructed response over one response period.
    [[nodiscard]] double response_total_amplitude() const;

    [[nodiscard]] bool locked() const;
    /// Seconds the lock condition has held continuously (0 when not holding).
    [[nodiscard]] double lock_age() const { return holding_ ? state_.t - hold_start_ : 0.0; }

    [[nodiscard]] const AdaptiveFilter& response_filter() const { return resp_; }
    [[nodiscard]] const AdaptiveFilter& force_filter() const { return force_; }
    [[nodiscard]] const ControllerState& controller() const { return ctrl_; }
    [[nodiscard]] const AmplitudeLoopState* amplitude_loop() const {
        return amp_loop_ ? &*amp_loop_ : nullptr;
    }
    [[nodiscard]] const RigConfig& config() const { return cfg_; }
    [[nodiscard]] long step_count() const { return steps_; }

    void set_log_sink(LogSink sink, int decimation = 1);
    void set_filter_diag_sink(FilterDiagSink sink, int decimation = 1);

private:
    void emit_logs();

    RigConfig cfg_;
    double dt_;
    MechState state_;
    ControllerState ctrl_;
    AdaptiveFilter resp_;
    AdaptiveFilter force_;
    PhaseUnwrapper unwrapper_;
    std::optional<AmplitudeLoopState> amp_loop_;

    double force_now_;        ///< current force amplitude (after ramping)
    double ramp_target_;
    double ramp_rate_ = 0.0;  ///< N/s while ramping
    double f_last_ = 0.0;

    double eps_resp_ = 0.0;
    bool have_phase_ = false;
    double degenerate_since_ = 0.0;
    bool holding_ = false;
    double hold_start_ = 0.0;

    long steps_ = 0;
    LogSink log_sink_;
    int log_decimation_ = 1;
    FilterDiagSink diag_sink_;
    int diag_decimation_ = 1;
};

/// Full run log of a closed-loop experiment.
struct RunLog {
    std::vector<LoopLogRow> rows;
    double final_omega = 0.0;
    double final_phase_lag = 0.0;
    bool locked = false;
};

/// Convenience driver: builds a rig from rest, runs for `duration` seconds and
/// returns the decimated run log.
RunLog run_closed_loop(const RigConfig& cfg, double duration, int log_decimation = 10);

}  // namespace pllt
