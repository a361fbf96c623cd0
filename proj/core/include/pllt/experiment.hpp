#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pllt/closed_loop.hpp"
#include "pllt/oscillator.hpp"

namespace pllt {

/// Target resonance: kappa-th response harmonic on the 1/upsilon carrier.
/// kappa = upsilon = 1 is the primary resonance.
struct ResonanceSpec {
    int kappa = 1;
    int upsilon = 1;
    enum class Signal { displacement, acceleration };
    Signal signal = Signal::displacement;

    void validate() const {
        if (kappa < 1 || upsilon < 1) throw ConfigError("resonance indices must be >= 1");
        if (std::gcd(kappa, upsilon) != 1)
            throw ConfigError("resonance (kappa, upsilon) must be gcd-reduced");
    }
};

/// Phase lag identifying phase resonance of the kappa:upsilon resonance:
/// -pi/2 when kappa and upsilon are both odd, -3 pi/(4 upsilon) otherwise,
/// in the displacement convention; the acceleration convention adds pi.
[[nodiscard]] double resonant_phase_lag(const ResonanceSpec& spec);

/// Per-set-point hold rules of a sweep.
struct HoldPolicy {
    double discard_periods = 30.0;    ///< response periods discarded after a change
    double timeout_periods = 600.0;   ///< response periods before lock-timeout
    double measure_periods = 10.0;    ///< response periods averaged into a record
    double stationarity_tol = 5e-4;   ///< relative amplitude drift over one hold window
    double ramp_periods = 10.0;       ///< force changes ramp over this many response periods
    bool abort_on_timeout = false;

    void validate() const {
        if (discard_periods < 0.0 || timeout_periods <= 0.0 || measure_periods <= 0.0 ||
            ramp_periods < 0.0)
            throw ConfigError("hold policy periods must be positive");
    }
};

/// One identified point of an NFRC or backbone.
struct ExperimentRecord {
    double omega = 0.0;      ///< locked frequency (mean over the measure window)
    double force = 0.0;
    double phase_ref = 0.0;
    double phase_meas = 0.0; ///< mean measured phase lag
    std::vector<double> harmonic_amps;  ///< A_1..A_N
    double total_amp = 0.0;  ///< peak of the reconstructed response
    bool locked = false;
    double settle_time = 0.0;  ///< seconds from set-point change to measurement
};

struct SweepPointFailure {
    int index = 0;
    double set_point = 0.0;
    std::string reason;
    double phase_min = 0.0, phase_max = 0.0;  ///< over the last window before timeout
    double omega_min = 0.0, omega_max = 0.0;
};

struct SweepResult {
    std::vector<ExperimentRecord> records;
    std::vector<SweepPointFailure> failures;
    bool aborted = false;
    bool isola_extinct = false;  ///< subharmonic backbone ended below the isola threshold
};

enum class TransferOutcome { captured, not_captured };

struct TransferResult {
    TransferOutcome outcome = TransferOutcome::not_captured;
    double capture_time = 0.0;  ///< time of the lock certificate [s]
    RunLog log;
    ExperimentRecord record;    ///< settled point when captured
    // oscillation diagnostics over the final observation window
    double phase_min = 0.0, phase_max = 0.0;
    double omega_min = 0.0, omega_max = 0.0;
};

/// Drives one closed-loop rig through set-point schedules. The rig state is
/// carried across calls so sweeps warm-start from the last locked point.
class Experiment {
public:
    Experiment(RigConfig rig_cfg, HoldPolicy hold);

    /// Phase-lag sweep at constant force; one record per locked set-point.
    SweepResult nfrc_sweep(const std::vector<double>& phase_refs);

    /// Force sweep at the configured reference phase (backbone tracing).
    SweepResult backbone_sweep(const std::vector<double>& forces);

    /// Runs from the current state (rest on a fresh rig) toward a lock at the
    /// configured reference. Captured means lock certificate plus, for
    /// subharmonics, dominant 1/upsilon content.
    TransferResult state_transfer(double timeout_periods, int log_decimation = 50);

    [[nodiscard]] ClosedLoopRig& rig() { return rig_; }
    [[nodiscard]] const HoldPolicy& hold() const { return hold_; }

    /// Ratio A_1 / A_upsilon of the response filter, the subharmonic content
    /// measure used by capture tests (upsilon > 1).
    [[nodiscard]] double subharmonic_content() const;

private:
    struct WaitResult {
        bool achieved = false;
        double phase_min = 0.0, phase_max = 0.0;
        double omega_min = 0.0, omega_max = 0.0;
    };

    /// Runs until lock certificate + amplitude stationarity, or timeout.
    WaitResult wait_for_lock(double timeout_periods);
    ExperimentRecord measure_record();
    [[nodiscard]] double response_period() const {
        return rig_.config().filter.upsilon * 2.0 * kPi / rig_.omega();
    }

    ClosedLoopRig rig_;
    HoldPolicy hold_;
};

/// Steady-state class of a trajectory tail relative to the 1/upsilon line.
enum class SteadyStateLabel : std::int8_t { main = 0, isola = 1, unresolved = 2 };

[[nodiscard]] std::string to_string(SteadyStateLabel label);

/// Classifies a trajectory tail: `isola` when the 1/upsilon spectral line
/// exceeds 10% of the total RMS, `main` below 1%, otherwise unresolved.
/// The tail must cover at least 20 response periods.
[[nodiscard]] SteadyStateLabel classify_steady_state(const TimeSeries& tail, double omega,
                                                     int upsilon);

struct BasinGrid {
    double x_min = -2.0, x_max = 2.0;
    double v_min = -2.0, v_max = 2.0;
    int nx = 201, nv = 201;

    void validate() const {
        if (nx < 2 || nv < 2) throw ConfigError("basin grid must be at least 2x2");
        if (!(x_max > x_min) || !(v_max > v_min))
            throw ConfigError("basin grid ranges must be non-empty");
    }
    [[nodiscard]] double x_at(int i) const { return x_min + (x_max - x_min) * i / (nx - 1); }
    [[nodiscard]] double v_at(int j) const { return v_min + (v_max - v_min) * j / (nv - 1); }
};

struct BasinOptions {
    double horizon_periods = 600.0;  ///< forcing periods 2 pi / omega
    double f_s = 100.0;
    double tail_periods = 20.0;      ///< response periods classified
    int jobs = 1;
};

enum class BasinLabel : std::int8_t { main = 0, isola = 1, unresolved = 2, diverged = 3 };

struct BasinResult {
    BasinGrid grid;
    double force = 0.0;
    double omega = 0.0;
    int upsilon = 1;
    std::vector<std::int8_t> labels;  ///< row-major [j * nx + i]
    long n_main = 0, n_isola = 0, n_unresolved = 0, n_diverged = 0;

    [[nodiscard]] double isola_fraction() const {
        const long total = static_cast<long>(labels.size());
        return total > 0 ? static_cast<double>(n_isola) / total : 0.0;
    }
};

/// Open-loop basin-of-attraction scan under f = F sin(omega t) from a grid of
/// initial conditions. Cells are independent and run concurrently on `jobs`
/// threads; the assembled result does not depend on scheduling.
[[nodiscard]] BasinResult basin_scan(const OscillatorParams& plant, double force,
                                     double omega, int upsilon, const BasinGrid& grid,
                                     const BasinOptions& opts);

}  // namespace pllt
