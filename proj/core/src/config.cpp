#include "pllt/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "pllt/csv.hpp"

namespace pllt {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::nfrc: return "nfrc";
        case ExperimentKind::backbone: return "backbone";
        case ExperimentKind::transfer: return "transfer";
        case ExperimentKind::basin: return "basin";
        case ExperimentKind::hbm: return "hbm";
    }
    return "nfrc";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "nfrc") return ExperimentKind::nfrc;
    if (s == "backbone") return ExperimentKind::backbone;
    if (s == "transfer") return ExperimentKind::transfer;
    if (s == "basin") return ExperimentKind::basin;
    if (s == "hbm") return ExperimentKind::hbm;
    throw ConfigError("unknown experiment kind: " + s);
}

namespace {

struct KeyVal {
    std::string key;
    std::string value;
    int line;
    int col;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<KeyVal> tokenize(const std::string& text) {
    std::vector<KeyVal> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected `key = value`", lineno, 1);
        KeyVal kv;
        kv.key = trim(line.substr(0, eq));
        kv.value = trim(line.substr(eq + 1));
        kv.line = lineno;
        kv.col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
        if (kv.key.empty()) throw ConfigError("empty key", lineno, 1);
        if (kv.value.empty())
            throw ConfigError("empty value for key " + kv.key, lineno,
                              static_cast<int>(eq) + 2);
        out.push_back(std::move(kv));
    }
    return out;
}

double parse_double(const KeyVal& kv) {
    char* end = nullptr;
    const double v = std::strtod(kv.value.c_str(), &end);
    if (end == kv.value.c_str() || *end != '\0')
        throw ConfigError("invalid number for " + kv.key + ": " + kv.value, kv.line, kv.col);
    return v;
}

int parse_int(const KeyVal& kv) {
    char* end = nullptr;
    const long v = std::strtol(kv.value.c_str(), &end, 10);
    if (end == kv.value.c_str() || *end != '\0')
        throw ConfigError("invalid integer for " + kv.key + ": " + kv.value, kv.line, kv.col);
    return static_cast<int>(v);
}

bool parse_bool(const KeyVal& kv) {
    if (kv.value == "true") return true;
    if (kv.value == "false") return false;
    throw ConfigError("invalid boolean for " + kv.key + " (use true/false)", kv.line, kv.col);
}

std::vector<double> parse_double_list(const KeyVal& kv) {
    std::vector<double> out;
    std::stringstream ss(kv.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError("invalid number in list for " + kv.key + ": " + item, kv.line,
                              kv.col);
        out.push_back(v);
    }
    if (out.empty())
        throw ConfigError("empty list for " + kv.key, kv.line, kv.col);
    return out;
}

using Setter = std::function<void(RunConfig&, const KeyVal&)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> s = {
        {"preset", [](RunConfig& c, const KeyVal& kv) { c.preset = kv.value; }},
        {"oscillator.m", [](RunConfig& c, const KeyVal& kv) { c.plant.m = parse_double(kv); }},
        {"oscillator.c", [](RunConfig& c, const KeyVal& kv) { c.plant.c = parse_double(kv); }},
        {"oscillator.k", [](RunConfig& c, const KeyVal& kv) { c.plant.k = parse_double(kv); }},
        {"oscillator.k_nl",
         [](RunConfig& c, const KeyVal& kv) { c.plant.k_nl = parse_double(kv); }},
        {"sim.f_s", [](RunConfig& c, const KeyVal& kv) { c.f_s = parse_double(kv); }},
        {"sim.log_decimation",
         [](RunConfig& c, const KeyVal& kv) { c.log_decimation = parse_int(kv); }},
        {"filter.n", [](RunConfig& c, const KeyVal& kv) { c.filter_n = parse_int(kv); }},
        {"filter.mu", [](RunConfig& c, const KeyVal& kv) { c.mu = parse_double(kv); }},
        {"controller.kp", [](RunConfig& c, const KeyVal& kv) { c.gains.kp = parse_double(kv); }},
        {"controller.ki", [](RunConfig& c, const KeyVal& kv) { c.gains.ki = parse_double(kv); }},
        {"controller.omega0",
         [](RunConfig& c, const KeyVal& kv) { c.omega0 = parse_double(kv); }},
        {"controller.phase_ref",
         [](RunConfig& c, const KeyVal& kv) {
             c.phase_ref = kv.value == "auto" ? std::numeric_limits<double>::quiet_NaN()
                                              : parse_double(kv);
         }},
        {"controller.kappa", [](RunConfig& c, const KeyVal& kv) { c.kappa = parse_int(kv); }},
        {"controller.upsilon",
         [](RunConfig& c, const KeyVal& kv) { c.upsilon = parse_int(kv); }},
        {"controller.force_amp",
         [](RunConfig& c, const KeyVal& kv) { c.force_amp = parse_double(kv); }},
        {"experiment.kind",
         [](RunConfig& c, const KeyVal& kv) {
             try {
                 c.kind = experiment_kind_from_string(kv.value);
             } catch (const ConfigError&) {
                 throw ConfigError("unknown experiment kind: " + kv.value, kv.line, kv.col);
             }
         }},
        {"experiment.signal",
         [](RunConfig& c, const KeyVal& kv) {
             if (kv.value == "displacement")
                 c.signal = ResonanceSpec::Signal::displacement;
             else if (kv.value == "acceleration")
                 c.signal = ResonanceSpec::Signal::acceleration;
             else
                 throw ConfigError("experiment.signal must be displacement or acceleration",
                                   kv.line, kv.col);
         }},
        {"lock.tol_deg",
         [](RunConfig& c, const KeyVal& kv) {
             c.lock.tol_lock = parse_double(kv) * kPi / 180.0;
         }},
        {"lock.hold_periods",
         [](RunConfig& c, const KeyVal& kv) { c.lock.hold_periods = parse_double(kv); }},
        {"hold.discard_periods",
         [](RunConfig& c, const KeyVal& kv) { c.hold.discard_periods = parse_double(kv); }},
        {"hold.timeout_periods",
         [](RunConfig& c, const KeyVal& kv) { c.hold.timeout_periods = parse_double(kv); }},
        {"hold.measure_periods",
         [](RunConfig& c, const KeyVal& kv) { c.hold.measure_periods = parse_double(kv); }},
        {"hold.stationarity_tol",
         [](RunConfig& c, const KeyVal& kv) { c.hold.stationarity_tol = parse_double(kv); }},
        {"hold.ramp_periods",
         [](RunConfig& c, const KeyVal& kv) { c.hold.ramp_periods = parse_double(kv); }},
        {"hold.abort_on_timeout",
         [](RunConfig& c, const KeyVal& kv) { c.hold.abort_on_timeout = parse_bool(kv); }},
        {"nfrc.phase_start",
         [](RunConfig& c, const KeyVal& kv) { c.nfrc_phase_start = parse_double(kv); }},
        {"nfrc.phase_end",
         [](RunConfig& c, const KeyVal& kv) { c.nfrc_phase_end = parse_double(kv); }},
        {"nfrc.steps", [](RunConfig& c, const KeyVal& kv) { c.nfrc_steps = parse_int(kv); }},
        {"nfrc.from_transfer",
         [](RunConfig& c, const KeyVal& kv) { c.nfrc_from_transfer = parse_bool(kv); }},
        {"nfrc.direction",
         [](RunConfig& c, const KeyVal& kv) {
             if (kv.value == "up")
                 c.nfrc_direction_up = true;
             else if (kv.value == "down")
                 c.nfrc_direction_up = false;
             else
                 throw ConfigError("nfrc.direction must be up or down", kv.line, kv.col);
         }},
        {"backbone.force_start",
         [](RunConfig& c, const KeyVal& kv) { c.backbone_force_start = parse_double(kv); }},
        {"backbone.force_end",
         [](RunConfig& c, const KeyVal& kv) { c.backbone_force_end = parse_double(kv); }},
        {"backbone.steps",
         [](RunConfig& c, const KeyVal& kv) { c.backbone_steps = parse_int(kv); }},
        {"backbone.from_transfer",
         [](RunConfig& c, const KeyVal& kv) { c.backbone_from_transfer = parse_bool(kv); }},
        {"transfer.timeout_periods",
         [](RunConfig& c, const KeyVal& kv) { c.transfer_timeout_periods = parse_double(kv); }},
        {"basin.x_min",
         [](RunConfig& c, const KeyVal& kv) { c.basin_grid.x_min = parse_double(kv); }},
        {"basin.x_max",
         [](RunConfig& c, const KeyVal& kv) { c.basin_grid.x_max = parse_double(kv); }},
        {"basin.v_min",
         [](RunConfig& c, const KeyVal& kv) { c.basin_grid.v_min = parse_double(kv); }},
        {"basin.v_max",
         [](RunConfig& c, const KeyVal& kv) { c.basin_grid.v_max = parse_double(kv); }},
        {"basin.nx", [](RunConfig& c, const KeyVal& kv) { c.basin_grid.nx = parse_int(kv); }},
        {"basin.nv", [](RunConfig& c, const KeyVal& kv) { c.basin_grid.nv = parse_int(kv); }},
        {"basin.horizon_periods",
         [](RunConfig& c, const KeyVal& kv) { c.basin_horizon_periods = parse_double(kv); }},
        {"basin.f_s", [](RunConfig& c, const KeyVal& kv) { c.basin_f_s = parse_double(kv); }},
        {"basin.tail_periods",
         [](RunConfig& c, const KeyVal& kv) { c.basin_tail_periods = parse_double(kv); }},
        {"hbm.n", [](RunConfig& c, const KeyVal& kv) { c.hbm_n = parse_int(kv); }},
        {"hbm.omega_min",
         [](RunConfig& c, const KeyVal& kv) { c.hbm_omega_min = parse_double(kv); }},
        {"hbm.omega_max",
         [](RunConfig& c, const KeyVal& kv) { c.hbm_omega_max = parse_double(kv); }},
        {"hbm.forces",
         [](RunConfig& c, const KeyVal& kv) { c.hbm_forces = parse_double_list(kv); }},
        {"hbm.h0", [](RunConfig& c, const KeyVal& kv) { c.hbm_h0 = parse_double(kv); }},
        {"hbm.h_min", [](RunConfig& c, const KeyVal& kv) { c.hbm_h_min = parse_double(kv); }},
        {"hbm.h_max", [](RunConfig& c, const KeyVal& kv) { c.hbm_h_max = parse_double(kv); }},
        {"hbm.max_points",
         [](RunConfig& c, const KeyVal& kv) { c.hbm_max_points = parse_int(kv); }},
        {"hbm.stability",
         [](RunConfig& c, const KeyVal& kv) { c.hbm_stability = parse_bool(kv); }},
        {"hbm.seed",
         [](RunConfig& c, const KeyVal& kv) {
             if (kv.value == "linear")
                 c.hbm_seed_transfer = false;
             else if (kv.value == "transfer")
                 c.hbm_seed_transfer = true;
             else
                 throw ConfigError("hbm.seed must be linear or transfer", kv.line, kv.col);
         }},
        {"amplitude_loop.enabled",
         [](RunConfig& c, const KeyVal& kv) { c.amplitude_loop_enabled = parse_bool(kv); }},
        {"amplitude_loop.f_target",
         [](RunConfig& c, const KeyVal& kv) { c.amp_f_target = parse_double(kv); }},
        {"amplitude_loop.kp",
         [](RunConfig& c, const KeyVal& kv) { c.amp_gains.kp = parse_double(kv); }},
        {"amplitude_loop.ki",
         [](RunConfig& c, const KeyVal& kv) { c.amp_gains.ki = parse_double(kv); }},
        {"actuator.gain",
         [](RunConfig& c, const KeyVal& kv) { c.actuator.gain = parse_double(kv); }},
        {"actuator.d2", [](RunConfig& c, const KeyVal& kv) { c.actuator.d2 = parse_double(kv); }},
        {"actuator.d3", [](RunConfig& c, const KeyVal& kv) { c.actuator.d3 = parse_double(kv); }},
    };
    return s;
}

void apply_preset_name(RunConfig& cfg, const Preset& preset, const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos)
        throw ConfigError("preset name must be kappa:upsilon, got " + name);
    cfg.kappa = std::atoi(name.substr(0, colon).c_str());
    cfg.upsilon = std::atoi(name.substr(colon + 1).c_str());
    if (cfg.kappa < 1 || cfg.upsilon < 1)
        throw ConfigError("invalid preset resonance: " + name);
    cfg.gains.kp = preset.kp;
    cfg.gains.ki = preset.ki;
    cfg.f_s = preset.f_s;
    cfg.mu = preset.mu;
    if (preset.omega0 > 0.0) cfg.omega0 = preset.omega0;
    if (preset.filter_n > 0) cfg.filter_n = preset.filter_n;
}

}  // namespace

PresetTable load_presets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open preset file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();

    PresetTable table;
    for (const KeyVal& kv : tokenize(ss.str())) {
        const auto dot = kv.key.rfind('.');
        if (dot == std::string::npos)
            throw ConfigError("preset key must be name.param", kv.line, kv.col);
        const std::string name = kv.key.substr(0, dot);
        const std::string param = kv.key.substr(dot + 1);
        Preset& p = table[name];
        if (param == "kp")
            p.kp = parse_double(kv);
        else if (param == "ki")
            p.ki = parse_double(kv);
        else if (param == "f_s")
            p.f_s = parse_double(kv);
        else if (param == "mu")
            p.mu = parse_double(kv);
        else if (param == "omega0")
            p.omega0 = parse_double(kv);
        else if (param == "ki_nfrc")
            p.ki_nfrc = parse_double(kv);
        else if (param == "filter_n")
            p.filter_n = parse_int(kv);
        else
            throw ConfigError("unknown preset parameter: " + param, kv.line, kv.col);
    }
    return table;
}

double RunConfig::resolved_phase_ref() const {
    if (!std::isnan(phase_ref)) return phase_ref;
    return resonant_phase_lag({kappa, upsilon, signal});
}

double RunConfig::resolved_omega0() const {
    if (omega0 > 0.0) return omega0;
    return plant.omega_l() * upsilon / kappa;
}

RigConfig RunConfig::make_rig_config() const {
    RigConfig rig;
    rig.plant = plant;
    rig.f_s = f_s;
    rig.filter = FilterConfig{filter_n, upsilon, mu};
    rig.gains = gains;
    rig.omega_o = resolved_omega0();
    rig.phase_ref = resolved_phase_ref();
    rig.force_amp = force_amp;
    rig.kappa = kappa;
    rig.lock = lock;
    if (amplitude_loop_enabled) {
        AmplitudeLoopConfig amp;
        amp.f_target = amp_f_target;
        amp.gains = amp_gains;
        amp.actuator = actuator;
        rig.amplitude_loop = amp;
    }
    return rig;
}

void RunConfig::validate() const {
    plant.validate();
    if (!(f_s > 0.0)) throw ConfigError("sim.f_s must be > 0");
    if (log_decimation < 1) throw ConfigError("sim.log_decimation must be >= 1");
    FilterConfig{filter_n, upsilon, mu}.validate();
    gains.validate();
    ResonanceSpec{kappa, upsilon, signal}.validate();
    if (kappa > filter_n) throw ConfigError("controller.kappa must be <= filter.n");
    if (upsilon > filter_n) throw ConfigError("controller.upsilon must be <= filter.n");
    if (!(force_amp >= 0.0)) throw ConfigError("controller.force_amp must be >= 0");
    if (omega0 < 0.0) throw ConfigError("controller.omega0 must be >= 0");
    if (!std::isnan(phase_ref) && std::abs(phase_ref) > 2.0 * kPi)
        throw ConfigError("controller.phase_ref outside the declared window (-2pi, 2pi)");
    lock.validate();
    hold.validate();

    switch (kind) {
        case ExperimentKind::nfrc:
            if (nfrc_steps < 1) throw ConfigError("nfrc.steps must be >= 1");
            if (std::abs(nfrc_phase_start) > 2.0 * kPi || std::abs(nfrc_phase_end) > 2.0 * kPi)
                throw ConfigError("nfrc phase window outside (-2pi, 2pi)");
            break;
        case ExperimentKind::backbone:
            if (backbone_steps < 1) throw ConfigError("backbone.steps must be >= 1");
            if (!(backbone_force_start > 0.0) || !(backbone_force_end > 0.0))
                throw ConfigError("backbone force schedule must be positive");
            break;
        case ExperimentKind::transfer:
            if (!(transfer_timeout_periods > 0.0))
                throw ConfigError("transfer.timeout_periods must be > 0");
            break;
        case ExperimentKind::basin:
            basin_grid.validate();
            if (!(basin_horizon_periods > 0.0))
                throw ConfigError("basin.horizon_periods must be > 0");
            if (!(basin_f_s > 0.0)) throw ConfigError("basin.f_s must be > 0");
            if (basin_tail_periods < 20.0)
                throw ConfigError("basin.tail_periods must be >= 20");
            if (basin_horizon_periods * 1.0 < basin_tail_periods * upsilon)
                throw ConfigError("basin horizon shorter than the classified tail");
            break;
        case ExperimentKind::hbm:
            if (hbm_n < 1) throw ConfigError("hbm.n must be >= 1");
            if (!(hbm_omega_max > hbm_omega_min) || !(hbm_omega_min > 0.0))
                throw ConfigError("hbm omega range invalid");
            if (hbm_forces.empty()) throw ConfigError("hbm.forces must be non-empty");
            for (const double f : hbm_forces)
                if (!(f >= 0.0)) throw ConfigError("hbm.forces must be >= 0");
            if (!(hbm_h_min > 0.0) || !(hbm_h0 >= hbm_h_min) || !(hbm_h_max >= hbm_h0))
                throw ConfigError("hbm step bounds must satisfy 0 < h_min <= h0 <= h_max");
            if (hbm_max_points < 2) throw ConfigError("hbm.max_points must be >= 2");
            break;
    }
    if (amplitude_loop_enabled) {
        if (!(amp_f_target > 0.0)) throw ConfigError("amplitude_loop.f_target must be > 0");
        amp_gains.validate();
        if (!(actuator.gain > 0.0)) throw ConfigError("actuator.gain must be > 0");
    }
}

RunConfig load_config_text(const std::string& text, const PresetTable& presets) {
    const std::vector<KeyVal> kvs = tokenize(text);
    const auto& sch = schema();

    for (const KeyVal& kv : kvs)
        if (sch.find(kv.key) == sch.end())
            throw ConfigError("unknown key: " + kv.key, kv.line, kv.col);

    RunConfig cfg;
    std::set<std::string> explicit_keys;

    // preset first, explicit keys on top
    for (const KeyVal& kv : kvs) {
        if (kv.key != "preset") continue;
        cfg.preset = kv.value;
        const auto it = presets.find(kv.value);
        if (it == presets.end())
            throw ConfigError("unknown preset: " + kv.value, kv.line, kv.col);
        apply_preset_name(cfg, it->second, kv.value);
    }
    for (const KeyVal& kv : kvs) {
        if (kv.key == "preset") continue;
        sch.at(kv.key)(cfg, kv);
        explicit_keys.insert(kv.key);
    }

    // documented 1:3 behavior: the NFRC sweep raises the integral gain unless
    // the file pins controller.ki itself
    if (!cfg.preset.empty() && cfg.kind == ExperimentKind::nfrc &&
        explicit_keys.find("controller.ki") == explicit_keys.end()) {
        const auto it = presets.find(cfg.preset);
        if (it != presets.end() && it->second.ki_nfrc > 0.0) cfg.gains.ki = it->second.ki_nfrc;
    }

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path, const PresetTable& presets) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str(), presets);
}

namespace {

void emit(std::ostream& os, const std::string& key, double v) {
    os << key << " = " << format_full(v) << "\n";
}
void emit(std::ostream& os, const std::string& key, int v) { os << key << " = " << v << "\n"; }
void emit(std::ostream& os, const std::string& key, bool v) {
    os << key << " = " << (v ? "true" : "false") << "\n";
}
void emit(std::ostream& os, const std::string& key, const std::string& v) {
    os << key << " = " << v << "\n";
}

}  // namespace

std::string serialize(const RunConfig& c) {
    std::ostringstream os;
    if (!c.preset.empty()) emit(os, "preset", c.preset);
    emit(os, "oscillator.m", c.plant.m);
    emit(os, "oscillator.c", c.plant.c);
    emit(os, "oscillator.k", c.plant.k);
    emit(os, "oscillator.k_nl", c.plant.k_nl);
    emit(os, "sim.f_s", c.f_s);
    emit(os, "sim.log_decimation", c.log_decimation);
    emit(os, "filter.n", c.filter_n);
    emit(os, "filter.mu", c.mu);
    emit(os, "controller.kp", c.gains.kp);
    emit(os, "controller.ki", c.gains.ki);
    emit(os, "controller.omega0", c.omega0);
    if (std::isnan(c.phase_ref))
        emit(os, "controller.phase_ref", std::string("auto"));
    else
        emit(os, "controller.phase_ref", c.phase_ref);
    emit(os, "controller.kappa", c.kappa);
    emit(os, "controller.upsilon", c.upsilon);
    emit(os, "controller.force_amp", c.force_amp);
    emit(os, "experiment.kind", to_string(c.kind));
    emit(os, "experiment.signal",
         std::string(c.signal == ResonanceSpec::Signal::displacement ? "displacement"
                                                                     : "acceleration"));
    emit(os, "lock.tol_deg", c.lock.tol_lock * 180.0 / kPi);
    emit(os, "lock.hold_periods", c.lock.hold_periods);
    emit(os, "hold.discard_periods", c.hold.discard_periods);
    emit(os, "hold.timeout_periods", c.hold.timeout_periods);
    emit(os, "hold.measure_periods", c.hold.measure_periods);
    emit(os, "hold.stationarity_tol", c.hold.stationarity_tol);
    emit(os, "hold.ramp_periods", c.hold.ramp_periods);
    emit(os, "hold.abort_on_timeout", c.hold.abort_on_timeout);
    emit(os, "nfrc.phase_start", c.nfrc_phase_start);
    emit(os, "nfrc.phase_end", c.nfrc_phase_end);
    emit(os, "nfrc.steps", c.nfrc_steps);
    emit(os, "nfrc.from_transfer", c.nfrc_from_transfer);
    emit(os, "nfrc.direction", std::string(c.nfrc_direction_up ? "up" : "down"));
    emit(os, "backbone.force_start", c.backbone_force_start);
    emit(os, "backbone.force_end", c.backbone_force_end);
    emit(os, "backbone.steps", c.backbone_steps);
    emit(os, "backbone.from_transfer", c.backbone_from_transfer);
    emit(os, "transfer.timeout_periods", c.transfer_timeout_periods);
    emit(os, "basin.x_min", c.basin_grid.x_min);
    emit(os, "basin.x_max", c.basin_grid.x_max);
    emit(os, "basin.v_min", c.basin_grid.v_min);
    emit(os, "basin.v_max", c.basin_grid.v_max);
    emit(os, "basin.nx", c.basin_grid.nx);
    emit(os, "basin.nv", c.basin_grid.nv);
    emit(os, "basin.horizon_periods", c.basin_horizon_periods);
    emit(os, "basin.f_s", c.basin_f_s);
    emit(os, "basin.tail_periods", c.basin_tail_periods);
    emit(os, "hbm.n", c.hbm_n);
    emit(os, "hbm.omega_min", c.hbm_omega_min);
    emit(os, "hbm.omega_max", c.hbm_omega_max);
    {
        std::string list;
        for (std::size_t i = 0; i < c.hbm_forces.size(); ++i) {
            if (i) list += ",";
            list += format_full(c.hbm_forces[i]);
        }
        emit(os, "hbm.forces", list);
    }
    emit(os, "hbm.h0", c.hbm_h0);
    emit(os, "hbm.h_min", c.hbm_h_min);
    emit(os, "hbm.h_max", c.hbm_h_max);
    emit(os, "hbm.max_points", c.hbm_max_points);
    emit(os, "hbm.stability", c.hbm_stability);
    emit(os, "hbm.seed", std::string(c.hbm_seed_transfer ? "transfer" : "linear"));
    emit(os, "amplitude_loop.enabled", c.amplitude_loop_enabled);
    emit(os, "amplitude_loop.f_target", c.amp_f_target);
    emit(os, "amplitude_loop.kp", c.amp_gains.kp);
    emit(os, "amplitude_loop.ki", c.amp_gains.ki);
    emit(os, "actuator.gain", c.actuator.gain);
    emit(os, "actuator.d2", c.actuator.d2);
    emit(os, "actuator.d3", c.actuator.d3);
    return os.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return serialize(a) == serialize(b);
}

}  // namespace pllt
