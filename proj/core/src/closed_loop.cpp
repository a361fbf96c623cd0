#include "pllt/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pllt {

ClosedLoopRig::ClosedLoopRig(RigConfig cfg)
    : cfg_(std::move(cfg)),
      dt_(1.0 / cfg_.f_s),
      resp_(cfg_.filter),
      force_(cfg_.filter),
      force_now_(cfg_.force_amp),
      ramp_target_(cfg_.force_amp) {
    cfg_.validate();
    ctrl_.omega_o = cfg_.omega_o;
    ctrl_.omega = cfg_.omega_o;
    ctrl_.phase_ref = cfg_.phase_ref;
    ctrl_.force_amp = cfg_.force_amp;
    ctrl_.kappa = cfg_.kappa;
    ctrl_.upsilon = cfg_.filter.upsilon;
    if (cfg_.amplitude_loop) {
        amp_loop_.emplace();
        amp_loop_->f_target = cfg_.amplitude_loop->f_target;
        amp_loop_->gains = cfg_.amplitude_loop->gains;
        amp_loop_->a_cmd = cfg_.amplitude_loop->f_target;  // start at the target
        amp_loop_->validate();
        force_now_ = amp_loop_->a_cmd;
        ramp_target_ = force_now_;
    }
}

void ClosedLoopRig::set_phase_ref(double phase_ref) {
    ctrl_.phase_ref = phase_ref;
    holding_ = false;
}

void ClosedLoopRig::set_force_target(double force, double ramp_seconds) {
    if (!(force >= 0.0)) throw ConfigError("force target must be >= 0");
    ramp_target_ = force;
    ramp_rate_ = ramp_seconds > 0.0 ? (force - force_now_) / ramp_seconds : 0.0;
    if (ramp_seconds <= 0.0) force_now_ = force;
    holding_ = false;
}

void ClosedLoopRig::set_log_sink(LogSink sink, int decimation) {
    log_sink_ = std::move(sink);
    log_decimation_ = std::max(1, decimation);
}

void ClosedLoopRig::set_filter_diag_sink(FilterDiagSink sink, int decimation) {
    diag_sink_ = std::move(sink);
    diag_decimation_ = std::max(1, decimation);
}

double ClosedLoopRig::response_total_amplitude() const {
    constexpr int kSamples = 256;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < kSamples; ++i) {
        const double val = resp_.synthesize(2.0 * kPi * i / kSamples);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
    }
    return 0.5 * (hi - lo);
}

bool ClosedLoopRig::locked() const {
    if (!holding_) return false;
    const double window = cfg_.lock.hold_periods * 2.0 * kPi / ctrl_.omega;
    return state_.t - hold_start_ >= window;
}

void ClosedLoopRig::step() {
    // (1) VCO: the force over [t, t+dt] runs at the current frequency from the
    // current phase; amplitude is held for the step.
    const double theta0 = ctrl_.theta;
    const double omega0 = ctrl_.omega;
    const double t0 = state_.t;

    if (ramp_rate_ != 0.0) {
        force_now_ += ramp_rate_ * dt_;
        if ((ramp_rate_ > 0.0 && force_now_ >= ramp_target_) ||
            (ramp_rate_ < 0.0 && force_now_ <= ramp_target_)) {
            force_now_ = ramp_target_;
            ramp_rate_ = 0.0;
        }
    }
    if (amp_loop_) force_now_ = amp_loop_->a_cmd;
    ctrl_.force_amp = force_now_;
    const double amp = force_now_;

    const ActuatorSurrogate* act =
        cfg_.amplitude_loop ? &cfg_.amplitude_loop->actuator : nullptr;
    auto force_fn = [&](double tau) {
        const double th = theta0 + omega0 * (tau - t0);
        return act ? act->apply(amp, th) : amp * std::sin(th);
    };

    (void)vco_step(ctrl_, dt_, t0);  // theta <- theta + omega dt

    // (2) plant
    state_ = rk4_step(state_, force_fn, dt_, cfg_.plant);
    if (std::abs(state_.x) > kDivergenceGuard)
        throw IntegrationDivergence("displacement exceeded guard", state_.t);

    // (3) filters, fed the end-of-step samples at the shared carrier phase
    f_last_ = act ? act->apply(amp, ctrl_.theta) : amp * std::sin(ctrl_.theta);
    try {
        eps_resp_ = resp_.update(state_.x, ctrl_.theta);
        force_.update(f_last_, ctrl_.theta);
    } catch (const FilterDivergence&) {
        throw FilterDivergence("adaptive filter diverged", state_.t);
    }

    // (4) phase lag, unwrapped for the controller
    const bool defined = resp_.phase_defined(ctrl_.kappa) && force_.phase_defined(ctrl_.upsilon);
    if (defined) {
        unwrapper_.update(phase_lag(resp_, force_, ctrl_.kappa));
        have_phase_ = true;
        degenerate_since_ = state_.t;
    } else {
        const double grace = cfg_.grace_periods * 2.0 * kPi / ctrl_.omega_o;
        if (state_.t - degenerate_since_ > grace)
            throw UndefinedPhase("phase lag undefined beyond the grace window", state_.t);
    }

    // (5) PI frequency law; amplitude loop when configured
    if (defined) {
        pi_update(ctrl_, cfg_.gains, unwrapper_.value(), dt_);
        if (ctrl_.omega <= kOmegaFloor)
            throw LoopFailure("instantaneous frequency hit the floor", state_.t);
    }
    if (amp_loop_ && force_.phase_defined(ctrl_.upsilon))
        amplitude_control_step(*amp_loop_, force_.amplitude(ctrl_.upsilon), dt_);

    // lock certificate bookkeeping (wrapped distance to the reference)
    if (defined && std::abs(wrap_to_pi(unwrapper_.value() - ctrl_.phase_ref)) <
                       cfg_.lock.tol_lock) {
        if (!holding_) {
            holding_ = true;
            hold_start_ = state_.t;
        }
    } else {
        holding_ = false;
    }

    ++steps_;
    emit_logs();
}

void ClosedLoopRig::emit_logs() {
    if (log_sink_ && steps_ % log_decimation_ == 0) {
        LoopLogRow row;
        row.t = state_.t;
        row.omega = ctrl_.omega;
        row.phase_lag = unwrapper_.value();
        row.amps.resize(static_cast<std::size_t>(cfg_.filter.n_harmonics));
        for (int k = 1; k <= cfg_.filter.n_harmonics; ++k)
            row.amps[static_cast<std::size_t>(k - 1)] = resp_.amplitude(k);
        row.x = state_.x;
        row.f = f_last_;
        row.locked = locked();
        log_sink_(row);
    }
    if (diag_sink_ && steps_ % diag_decimation_ == 0) {
        FilterDiagRow row;
        row.t = state_.t;
        row.epsilon = eps_resp_;
        row.amps.resize(static_cast<std::size_t>(cfg_.filter.n_harmonics));
        row.phases.resize(static_cast<std::size_t>(cfg_.filter.n_harmonics));
        for (int k = 1; k <= cfg_.filter.n_harmonics; ++k) {
            row.amps[static_cast<std::size_t>(k - 1)] = resp_.amplitude(k);
            row.phases[static_cast<std::size_t>(k - 1)] =
                resp_.phase_defined(k) ? resp_.phase(k)
                                       : std::numeric_limits<double>::quiet_NaN();
        }
        diag_sink_(row);
    }
}

void ClosedLoopRig::run(double duration) {
    const long n = static_cast<long>(std::llround(duration * cfg_.f_s));
    for (long i = 0; i < n; ++i) step();
}

RunLog run_closed_loop(const RigConfig& cfg, double duration, int log_decimation) {
    ClosedLoopRig rig(cfg);
    RunLog log;
    rig.set_log_sink([&log](const LoopLogRow& row) { log.rows.push_back(row); },
                     log_decimation);
    rig.run(duration);
    log.final_omega = rig.omega();
    log.final_phase_lag = rig.phase_lag_unwrapped();
    log.locked = rig.locked();
    return log;
}

}  // namespace pllt
