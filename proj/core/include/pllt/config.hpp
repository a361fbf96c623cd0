#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pllt/closed_loop.hpp"
#include "pllt/experiment.hpp"
#include "pllt/oscillator.hpp"

namespace pllt {

enum class ExperimentKind { nfrc, backbone, transfer, basin, hbm };

[[nodiscard]] std::string to_string(ExperimentKind kind);
[[nodiscard]] ExperimentKind experiment_kind_from_string(const std::string& s);

/// Controller/filter presets keyed by target resonance "kappa:upsilon".
struct Preset {
    double kp = 0.0;
    double ki = 0.0;
    double f_s = 0.0;
    double mu = 0.0;
    double omega0 = 0.0;          ///< 0 means derive from the resonance
    double ki_nfrc = 0.0;         ///< integral-gain override for NFRC sweeps (0 = none)
    int filter_n = 0;             ///< 0 means keep the default
};

using PresetTable = std::map<std::string, Preset>;

/// Parses a preset file of `kappa:upsilon.param = value` lines.
[[nodiscard]] PresetTable load_presets(const std::string& path);

/// Fully resolved run configuration. Field defaults are the documented
/// experiment defaults; presets and file keys override them in that order.
struct RunConfig {
    std::string preset;  ///< "" or "kappa:upsilon"

    OscillatorParams plant;
    double f_s = 200.0;
    int log_decimation = 100;

    int filter_n = 9;
    double mu = 1e-4;

    PIGains gains{1.0, 5e-3};
    double omega0 = 0.0;     ///< 0: derive omega_l * upsilon / kappa
    double phase_ref = std::numeric_limits<double>::quiet_NaN();  ///< NaN: resonant lag
    int kappa = 1;
    int upsilon = 1;
    double force_amp = 1e-4;
    ResonanceSpec::Signal signal = ResonanceSpec::Signal::displacement;

    LockPolicy lock;
    HoldPolicy hold;

    ExperimentKind kind = ExperimentKind::nfrc;

    // nfrc
    double nfrc_phase_start = -0.1;
    double nfrc_phase_end = -kPi + 0.1;
    int nfrc_steps = 48;
    bool nfrc_from_transfer = false;
    bool nfrc_direction_up = false;  ///< leg direction when starting from a capture

    // backbone
    double backbone_force_start = 5e-5;
    double backbone_force_end = 1.5e-4;
    int backbone_steps = 11;
    bool backbone_from_transfer = false;

    // transfer
    double transfer_timeout_periods = 1500.0;

    // basin
    BasinGrid basin_grid;
    double basin_horizon_periods = 600.0;
    double basin_f_s = 100.0;
    double basin_tail_periods = 20.0;

    // hbm
    int hbm_n = 14;
    double hbm_omega_min = 0.9;
    double hbm_omega_max = 1.1;
    std::vector<double> hbm_forces{1e-4};
    double hbm_h0 = 5e-3;
    double hbm_h_min = 1e-4;
    double hbm_h_max = 0.05;
    int hbm_max_points = 4000;
    bool hbm_stability = true;
    bool hbm_seed_transfer = false;  ///< seed from a captured state (isolas)

    // amplitude loop + actuator surrogate
    bool amplitude_loop_enabled = false;
    double amp_f_target = 1e-4;
    PIGains amp_gains{0.01, 0.01};
    ActuatorSurrogate actuator;

    std::string out_dir = "out";
    int jobs = 1;

    /// Reference phase actually used (resolves the NaN default).
    [[nodiscard]] double resolved_phase_ref() const;
    /// Open-loop frequency actually used (resolves the 0 default).
    [[nodiscard]] double resolved_omega0() const;

    [[nodiscard]] RigConfig make_rig_config() const;

    void validate() const;
};

/// Parses a `key = value` config file, applies the named preset (when any)
/// and explicit keys on top, validates, and returns the resolved config.
/// Unknown keys are rejected with their line and column.
[[nodiscard]] RunConfig load_config(const std::string& path, const PresetTable& presets);

/// Same, from an in-memory string (used by tests and the manifest replay).
[[nodiscard]] RunConfig load_config_text(const std::string& text, const PresetTable& presets);

/// Serializes every key; load_config_text(serialize(c)) == c.
[[nodiscard]] std::string serialize(const RunConfig& config);

[[nodiscard]] bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace pllt
