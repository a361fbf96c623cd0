#include "pllt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <thread>

namespace pllt {

double resonant_phase_lag(const ResonanceSpec& spec) {
    spec.validate();
    const bool both_odd = (spec.kappa % 2 == 1) && (spec.upsilon % 2 == 1);
    double lag = both_odd ? -kPi / 2.0 : -3.0 * kPi / (4.0 * spec.upsilon);
    if (spec.signal == ResonanceSpec::Signal::acceleration) lag = wrap_to_pi(lag + kPi);
    return lag;
}

Experiment::Experiment(RigConfig rig_cfg, HoldPolicy hold)
    : rig_(std::move(rig_cfg)), hold_(hold) {
    hold_.validate();
}

double Experiment::subharmonic_content() const {
    const int ups = rig_.config().filter.upsilon;
    const double a_forcing = rig_.response_filter().amplitude(ups);
    const double a_sub = rig_.response_filter().amplitude(1);
    return a_forcing > 0.0 ? a_sub / a_forcing : 0.0;
}

Experiment::WaitResult Experiment::wait_for_lock(double timeout_periods) {
    WaitResult res;
    const double t_start = rig_.t();
    bool window_primed = false;

    // amplitude history for the stationarity rule, sampled 8x per period
    std::deque<std::pair<double, double>> amp_hist;

    double t_next_sample = rig_.t();
    while (true) {
        const double period = response_period();
        const double deadline = t_start + timeout_periods * period;
        if (rig_.t() >= deadline) break;

        rig_.step();

        if (rig_.phase_defined()) {
            const double ph = rig_.phase_lag_unwrapped();
            const double om = rig_.omega();
            if (!window_primed) {
                res.phase_min = res.phase_max = ph;
                res.omega_min = res.omega_max = om;
                window_primed = true;
            } else {
                res.phase_min = std::min(res.phase_min, ph);
                res.phase_max = std::max(res.phase_max, ph);
                res.omega_min = std::min(res.omega_min, om);
                res.omega_max = std::max(res.omega_max, om);
            }
        }

        if (rig_.t() >= t_next_sample) {
            amp_hist.emplace_back(rig_.t(), rig_.response_total_amplitude());
            t_next_sample = rig_.t() + period / 8.0;
            const double window = rig_.config().lock.hold_periods * 2.0 * kPi / rig_.omega();
            while (!amp_hist.empty() && amp_hist.front().first < rig_.t() - 2.0 * window)
                amp_hist.pop_front();
        }

        if (!rig_.locked()) continue;
        if (hold_.stationarity_tol > 0.0) {
            const double window = rig_.config().lock.hold_periods * 2.0 * kPi / rig_.omega();
            const double t_ref = rig_.t() - window;
            // oldest sample at or after t_ref
            auto it = std::find_if(amp_hist.begin(), amp_hist.end(),
                                   [&](const auto& s) { return s.first >= t_ref; });
            if (it == amp_hist.end() || it->first > t_ref + window / 4.0)
                continue;  // history does not span the window yet
            const double a_then = it->second;
            const double a_now = amp_hist.back().second;
            const double drift = std::abs(a_now - a_then) / std::max(a_now, 1e-15);
            if (drift > hold_.stationarity_tol) continue;
        }
        res.achieved = true;
        return res;
    }
    return res;
}

ExperimentRecord Experiment::measure_record() {
    const int n = rig_.config().filter.n_harmonics;
    ExperimentRecord rec;
    rec.harmonic_amps.assign(static_cast<std::size_t>(n), 0.0);

    const double t_stop = rig_.t() + hold_.measure_periods * response_period();
    long samples = 0;
    double omega_acc = 0.0, phase_acc = 0.0, total_acc = 0.0;
    while (rig_.t() < t_stop) {
        rig_.step();
        omega_acc += rig_.omega();
        phase_acc += rig_.phase_lag_unwrapped();
        for (int k = 1; k <= n; ++k)
            rec.harmonic_amps[static_cast<std::size_t>(k - 1)] += rig_.harmonic_amplitude(k);
        total_acc += rig_.response_total_amplitude();
        ++samples;
    }
    const double inv = 1.0 / static_cast<double>(samples);
    rec.omega = omega_acc * inv;
    rec.phase_meas = wrap_to_pi(phase_acc * inv);
    for (auto& a : rec.harmonic_amps) a *= inv;
    rec.total_amp = total_acc * inv;
    rec.force = rig_.force_amp();
    rec.phase_ref = rig_.phase_ref();
    rec.locked = rig_.locked();
    return rec;
}

SweepResult Experiment::nfrc_sweep(const std::vector<double>& phase_refs) {
    SweepResult result;
    for (std::size_t i = 0; i < phase_refs.size(); ++i) {
        rig_.set_phase_ref(phase_refs[i]);
        const double t_change = rig_.t();
        rig_.run(hold_.discard_periods * response_period());

        const WaitResult wait = wait_for_lock(hold_.timeout_periods);
        if (!wait.achieved) {
            SweepPointFailure fail;
            fail.index = static_cast<int>(i);
            fail.set_point = phase_refs[i];
            fail.reason = "lock-timeout";
            fail.phase_min = wait.phase_min;
            fail.phase_max = wait.phase_max;
            fail.omega_min = wait.omega_min;
            fail.omega_max = wait.omega_max;
            result.failures.push_back(fail);
            if (hold_.abort_on_timeout) {
                result.aborted = true;
                return result;
            }
            continue;
        }
        ExperimentRecord rec = measure_record();
        rec.settle_time = rig_.t() - t_change;
        result.records.push_back(std::move(rec));
    }
    return result;
}

SweepResult Experiment::backbone_sweep(const std::vector<double>& forces) {
    SweepResult result;
    const int ups = rig_.config().filter.upsilon;
    for (std::size_t i = 0; i < forces.size(); ++i) {
        const double t_change = rig_.t();
        rig_.set_force_target(forces[i], hold_.ramp_periods * response_period());
        rig_.run(hold_.discard_periods * response_period());

        const WaitResult wait = wait_for_lock(hold_.timeout_periods);
        if (!wait.achieved) {
            SweepPointFailure fail;
            fail.index = static_cast<int>(i);
            fail.set_point = forces[i];
            fail.reason = "lock-timeout";
            fail.phase_min = wait.phase_min;
            fail.phase_max = wait.phase_max;
            fail.omega_min = wait.omega_min;
            fail.omega_max = wait.omega_max;

            // A subharmonic backbone ends when the isola ceases to exist: the
            // 1/upsilon line collapses and the plant falls back on the main
            // branch. Reported, not an error.
            if (ups > 1 && subharmonic_content() < 0.1) {
                fail.reason = "isola-extinct";
                result.isola_extinct = true;
                result.failures.push_back(fail);
                return result;
            }
            result.failures.push_back(fail);
            if (hold_.abort_on_timeout) {
                result.aborted = true;
                return result;
            }
            continue;
        }
        ExperimentRecord rec = measure_record();
        rec.settle_time = rig_.t() - t_change;
        result.records.push_back(std::move(rec));
    }
    return result;
}

TransferResult Experiment::state_transfer(double timeout_periods, int log_decimation) {
    TransferResult result;
    rig_.set_log_sink([&result](const LoopLogRow& row) { result.log.rows.push_back(row); },
                      log_decimation);

    const int ups = rig_.config().filter.upsilon;
    const double t_start = rig_.t();
    WaitResult wait;

    // capture = lock certificate + dominant subharmonic content (upsilon > 1)
    while (true) {
        wait = wait_for_lock(timeout_periods - (rig_.t() - t_start) / response_period());
        if (!wait.achieved) break;
        if (ups <= 1 || subharmonic_content() > 0.5) break;
        // locked on something without subharmonic content: keep waiting
        rig_.run(response_period());
        if (rig_.t() - t_start >= timeout_periods * response_period()) {
            wait.achieved = false;
            break;
        }
    }

    result.phase_min = wait.phase_min;
    result.phase_max = wait.phase_max;
    result.omega_min = wait.omega_min;
    result.omega_max = wait.omega_max;

    if (wait.achieved) {
        result.outcome = TransferOutcome::captured;
        result.capture_time = rig_.t() - t_start;
        result.record = measure_record();
        result.record.settle_time = result.capture_time;
    } else {
        result.outcome = TransferOutcome::not_captured;
    }
    result.log.final_omega = rig_.omega();
    result.log.final_phase_lag = rig_.phase_lag_unwrapped();
    result.log.locked = rig_.locked();
    rig_.set_log_sink(nullptr, 1);
    return result;
}

std::string to_string(SteadyStateLabel label) {
    switch (label) {
        case SteadyStateLabel::main: return "main";
        case SteadyStateLabel::isola: return "isola";
        default: return "unresolved";
    }
}

SteadyStateLabel classify_steady_state(const TimeSeries& tail, double omega, int upsilon) {
    if (tail.size() < 16) return SteadyStateLabel::unresolved;
    const double period = upsilon * 2.0 * kPi / omega;
    const double span = tail.back().t - tail.front().t;
    if (span < 20.0 * period - 1e-9)
        throw ConfigError("classify_steady_state: tail shorter than 20 response periods");

    // use the last 20 whole response periods
    const double t_end = tail.back().t;
    const double t_from = t_end - 20.0 * period;
    std::size_t begin = 0;
    while (begin < tail.size() && tail[begin].t < t_from) ++begin;
    const std::size_t count = tail.size() - begin;
    if (count < 16) return SteadyStateLabel::unresolved;

    double mean = 0.0;
    for (std::size_t i = begin; i < tail.size(); ++i) mean += tail[i].x;
    mean /= static_cast<double>(count);

    const double w_sub = omega / upsilon;
    double as = 0.0, ac = 0.0, ms1 = 0.0, ms2 = 0.0;
    const std::size_t half = begin + count / 2;
    for (std::size_t i = begin; i < tail.size(); ++i) {
        const double xc = tail[i].x - mean;
        as += xc * std::sin(w_sub * tail[i].t);
        ac += xc * std::cos(w_sub * tail[i].t);
        if (i < half)
            ms1 += xc * xc;
        else
            ms2 += xc * xc;
    }
    const double a_sub = 2.0 * std::hypot(as, ac) / static_cast<double>(count);
    const double rms = std::sqrt((ms1 + ms2) / static_cast<double>(count));
    const double rms1 = std::sqrt(ms1 / static_cast<double>(half - begin));
    const double rms2 = std::sqrt(ms2 / static_cast<double>(tail.size() - half));

    if (rms < 1e-12) return SteadyStateLabel::main;  // zero tail: no content at all
    if (std::abs(rms1 - rms2) / std::max(rms, 1e-15) > 0.25)
        return SteadyStateLabel::unresolved;

    if (a_sub > 0.10 * rms) return SteadyStateLabel::isola;
    if (a_sub < 0.01 * rms) return SteadyStateLabel::main;
    return SteadyStateLabel::unresolved;
}

namespace {

/// One basin cell: fixed-step RK4 under f = F sin(omega t) with the forcing
/// phasor advanced incrementally and re-synced periodically.
BasinLabel basin_cell(const OscillatorParams& p, double force, double omega, int upsilon,
                      double x0, double v0, const BasinOptions& opts) {
    const double dt = 1.0 / opts.f_s;
    const double forcing_period = 2.0 * kPi / omega;
    const double resp_period = upsilon * forcing_period;
    const long total_steps =
        static_cast<long>(std::llround(opts.horizon_periods * forcing_period * opts.f_s));
    const long tail_steps =
        std::min(total_steps,
                 static_cast<long>(std::llround((opts.tail_periods + 1.0) * resp_period *
                                                opts.f_s)));
    const long record_from = total_steps - tail_steps;

    TimeSeries tail;
    tail.reserve(static_cast<std::size_t>(tail_steps) + 1);

    const double ch = std::cos(0.5 * omega * dt);
    const double sh = std::sin(0.5 * omega * dt);

    double x = x0, v = v0;
    // forcing phasor at t, t+dt/2 (advanced by half steps)
    double s0 = 0.0, c0 = 1.0;
    for (long i = 0; i < total_steps; ++i) {
        if (i % 4096 == 0) {  // re-sync the phasor to the exact phase
            const double th = omega * static_cast<double>(i) * dt;
            s0 = std::sin(th);
            c0 = std::cos(th);
        }
        const double f0 = force * s0;
        const double s_half = s0 * ch + c0 * sh;
        const double c_half = c0 * ch - s0 * sh;
        const double fh = force * s_half;
        s0 = s_half * ch + c_half * sh;
        c0 = c_half * ch - s_half * sh;
        const double f1 = force * s0;

        // inlined RK4 for (x, v)
        const double k1x = v;
        const double k1v = (f0 - p.c * v - p.k * x - p.k_nl * x * x * x) / p.m;
        const double x2 = x + 0.5 * dt * k1x, v2 = v + 0.5 * dt * k1v;
        const double k2x = v2;
        const double k2v = (fh - p.c * v2 - p.k * x2 - p.k_nl * x2 * x2 * x2) / p.m;
        const double x3 = x + 0.5 * dt * k2x, v3 = v + 0.5 * dt * k2v;
        const double k3x = v3;
        const double k3v = (fh - p.c * v3 - p.k * x3 - p.k_nl * x3 * x3 * x3) / p.m;
        const double x4 = x + dt * k3x, v4 = v + dt * k3v;
        const double k4x = v4;
        const double k4v = (f1 - p.c * v4 - p.k * x4 - p.k_nl * x4 * x4 * x4) / p.m;
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

        if (!std::isfinite(x) || std::abs(x) > kDivergenceGuard)
            return BasinLabel::diverged;
        if (i >= record_from)
            tail.push_back({static_cast<double>(i + 1) * dt, x, v, f1});
    }

    switch (classify_steady_state(tail, omega, upsilon)) {
        case SteadyStateLabel::isola: return BasinLabel::isola;
        case SteadyStateLabel::main: return BasinLabel::main;
        default: return BasinLabel::unresolved;
    }
}

}  // namespace

BasinResult basin_scan(const OscillatorParams& plant, double force, double omega,
                       int upsilon, const BasinGrid& grid, const BasinOptions& opts) {
    plant.validate();
    grid.validate();
    if (!(omega > 0.0)) throw ConfigError("basin scan requires omega > 0");

    BasinResult result;
    result.grid = grid;
    result.force = force;
    result.omega = omega;
    result.upsilon = upsilon;
    result.labels.assign(static_cast<std::size_t>(grid.nx) * grid.nv,
                         static_cast<std::int8_t>(BasinLabel::unresolved));

    const int jobs = std::max(1, opts.jobs);
    std::atomic<int> next_row{0};
    auto worker = [&]() {
        for (;;) {
            const int j = next_row.fetch_add(1);
            if (j >= grid.nv) return;
            for (int i = 0; i < grid.nx; ++i) {
                const BasinLabel label = basin_cell(plant, force, omega, upsilon,
                                                    grid.x_at(i), grid.v_at(j), opts);
                result.labels[static_cast<std::size_t>(j) * grid.nx + i] =
                    static_cast<std::int8_t>(label);
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto l : result.labels) {
        switch (static_cast<BasinLabel>(l)) {
            case BasinLabel::main: ++result.n_main; break;
            case BasinLabel::isola: ++result.n_isola; break;
            case BasinLabel::unresolved: ++result.n_unresolved; break;
            case BasinLabel::diverged: ++result.n_diverged; break;
        }
    }
    return result;
}

}  // namespace pllt
