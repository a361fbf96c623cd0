#include "pllt/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "pllt/csv.hpp"

namespace pllt {

namespace fs = std::filesystem;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        out.push_back(a);
        return out;
    }
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

std::vector<std::string> record_columns(int n) {
    std::vector<std::string> cols{"omega", "F", "phase_ref", "phase_meas"};
    for (int k = 1; k <= n; ++k) cols.push_back("A" + std::to_string(k));
    cols.push_back("A_total");
    cols.push_back("locked");
    cols.push_back("settle_time");
    return cols;
}

}  // namespace

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records,
                       int n_harmonics) {
    CsvWriter csv(path, record_columns(n_harmonics));
    for (const auto& r : records) {
        std::vector<double> row{r.omega, r.force, r.phase_ref, r.phase_meas};
        row.insert(row.end(), r.harmonic_amps.begin(), r.harmonic_amps.end());
        row.push_back(r.total_amp);
        row.push_back(r.locked ? 1.0 : 0.0);
        row.push_back(r.settle_time);
        csv.write_row(row);
    }
}

void write_failures_csv(const std::string& path,
                        const std::vector<SweepPointFailure>& failures) {
    CsvWriter csv(path, {"index", "set_point", "reason", "phase_min", "phase_max",
                         "omega_min", "omega_max"});
    for (const auto& f : failures)
        csv.write_cells({std::to_string(f.index), format_full(f.set_point), f.reason,
                         format_full(f.phase_min), format_full(f.phase_max),
                         format_full(f.omega_min), format_full(f.omega_max)});
}

void write_runlog_csv(const std::string& path, const RunLog& log, int n_harmonics) {
    std::vector<std::string> cols{"t", "omega", "phase_lag"};
    for (int k = 1; k <= n_harmonics; ++k) cols.push_back("A" + std::to_string(k));
    cols.push_back("x");
    cols.push_back("f");
    cols.push_back("locked");
    CsvWriter csv(path, cols);
    for (const auto& r : log.rows) {
        std::vector<double> row{r.t, r.omega, r.phase_lag};
        row.insert(row.end(), r.amps.begin(), r.amps.end());
        row.push_back(r.x);
        row.push_back(r.f);
        row.push_back(r.locked ? 1.0 : 0.0);
        csv.write_row(row);
    }
}

void write_branch_csv(const std::string& path, const Branch& branch) {
    const int n = branch.points.empty()
                      ? 0
                      : static_cast<int>((branch.points.front().z.size() - 1) / 2);
    std::vector<std::string> cols{"omega", "F"};
    for (int k = 1; k <= n; ++k) cols.push_back("A" + std::to_string(k));
    cols.insert(cols.end(),
                {"stable", "bif_tag", "mult_re1", "mult_im1", "mult_re2", "mult_im2"});
    CsvWriter csv(path, cols);
    for (const auto& p : branch.points) {
        std::vector<std::string> cells{format_full(p.omega), format_full(p.force)};
        for (int k = 1; k <= n; ++k) cells.push_back(format_full(p.harmonic_amplitude(k)));
        cells.push_back(p.stable ? "1" : "0");
        cells.push_back(to_string(p.bif_tag));
        cells.push_back(format_full(p.mult1.real()));
        cells.push_back(format_full(p.mult1.imag()));
        cells.push_back(format_full(p.mult2.real()));
        cells.push_back(format_full(p.mult2.imag()));
        csv.write_cells(cells);
    }
}

void write_basin_csv(const std::string& path, const BasinResult& basin) {
    CsvWriter csv(path, {"x0", "v0", "label"});
    for (int j = 0; j < basin.grid.nv; ++j)
        for (int i = 0; i < basin.grid.nx; ++i)
            csv.write_cells(
                {format_full(basin.grid.x_at(i)), format_full(basin.grid.v_at(j)),
                 std::to_string(
                     basin.labels[static_cast<std::size_t>(j) * basin.grid.nx + i])});
}

void write_basin_summary_csv(const std::string& path, const BasinResult& basin,
                             const BasinOptions& opts) {
    CsvWriter csv(path,
                  {"F", "omega", "upsilon", "x_min", "x_max", "v_min", "v_max", "nx", "nv",
                   "horizon_periods", "f_s", "isola_fraction", "n_main", "n_isola",
                   "n_unresolved", "n_diverged"});
    csv.write_row({basin.force, basin.omega, static_cast<double>(basin.upsilon),
                   basin.grid.x_min, basin.grid.x_max, basin.grid.v_min, basin.grid.v_max,
                   static_cast<double>(basin.grid.nx), static_cast<double>(basin.grid.nv),
                   opts.horizon_periods, opts.f_s, basin.isola_fraction(),
                   static_cast<double>(basin.n_main), static_cast<double>(basin.n_isola),
                   static_cast<double>(basin.n_unresolved),
                   static_cast<double>(basin.n_diverged)});
}

void write_timeseries_csv(const std::string& path, const TimeSeries& series) {
    CsvWriter csv(path, {"t", "x", "v", "f"});
    for (const auto& s : series) csv.write_row({s.t, s.x, s.v, s.f});
}

namespace {

void write_plot_script(const std::string& dir, const RunConfig& cfg,
                       const std::vector<std::string>& data_files, int n_harmonics,
                       std::vector<std::string>& files_out) {
    const std::string path = dir + "/plot.gp";
    std::ofstream gp(path);
    if (!gp) throw PlltError("cannot write plot script: " + path);
    gp << "# gnuplot script generated alongside the run artifacts\n";
    gp << "set datafile separator ','\n";
    gp << "set key autotitle columnhead\n";
    gp << "set terminal pngcairo size 1200,500\n";

    const int col_omega = 1;
    const int col_atotal = 4 + n_harmonics + 1;
    const int col_phase = 4;

    switch (cfg.kind) {
        case ExperimentKind::nfrc:
        case ExperimentKind::backbone: {
            gp << "set output 'curves.png'\nset multiplot layout 1,2\n";
            gp << "set xlabel 'omega [rad/s]'\nset ylabel 'amplitude [m]'\n";
            gp << "plot '" << data_files.front() << "' using " << col_omega << ":"
               << col_atotal << " with linespoints pt 7 ps 0.4\n";
            gp << "set ylabel 'phase lag [rad]'\n";
            gp << "plot '" << data_files.front() << "' using " << col_omega << ":"
               << col_phase << " with linespoints pt 7 ps 0.4\n";
            gp << "unset multiplot\n";
            break;
        }
        case ExperimentKind::transfer: {
            gp << "set terminal pngcairo size 900,900\nset output 'transfer.png'\n";
            gp << "set multiplot layout 3,1\nset xlabel 't [s]'\n";
            gp << "set ylabel 'phase lag [rad]'\nplot '" << data_files.front()
               << "' using 1:3 with lines\n";
            gp << "set ylabel 'omega [rad/s]'\nplot '" << data_files.front()
               << "' using 1:2 with lines\n";
            gp << "set ylabel 'x [m]'\nplot '" << data_files.front() << "' using 1:"
               << 3 + n_harmonics + 1 << " with lines\n";
            gp << "unset multiplot\n";
            break;
        }
        case ExperimentKind::basin: {
            gp << "set terminal pngcairo size 700,600\nset output 'basin.png'\n";
            gp << "set xlabel 'x0 [m]'\nset ylabel 'v0 [m/s]'\n";
            gp << "plot 'basin.csv' using 1:2:3 with image notitle\n";
            break;
        }
        case ExperimentKind::hbm: {
            gp << "set output 'branches.png'\nset multiplot layout 1,2\n";
            gp << "set xlabel 'omega [rad/s]'\nset ylabel 'A1 [m]'\n";
            gp << "plot ";
            for (std::size_t i = 0; i < data_files.size(); ++i) {
                if (i) gp << ", ";
                gp << "'" << data_files[i] << "' using 1:3 with lines";
            }
            gp << "\nset ylabel 'stability'\nplot ";
            for (std::size_t i = 0; i < data_files.size(); ++i) {
                if (i) gp << ", ";
                gp << "'" << data_files[i] << "' using 1:" << 3 + n_harmonics
                   << " with points pt 7 ps 0.3";
            }
            gp << "\nunset multiplot\n";
            break;
        }
    }
    gp.close();
    files_out.push_back("plot.gp");
}

struct RunContext {
    std::vector<std::string> files;
    nlohmann::json summary;
    std::uint64_t steps = 0;
};

void run_sweep_kind(const RunConfig& cfg, const std::string& dir, RunContext& ctx) {
    Experiment exp(cfg.make_rig_config(), cfg.hold);

    const bool from_transfer = cfg.kind == ExperimentKind::nfrc ? cfg.nfrc_from_transfer
                                                                : cfg.backbone_from_transfer;
    if (from_transfer) {
        TransferResult tr = exp.state_transfer(cfg.transfer_timeout_periods,
                                               cfg.log_decimation);
        write_runlog_csv(dir + "/transfer.csv", tr.log, cfg.filter_n);
        ctx.files.push_back("transfer.csv");
        ctx.summary["transfer_captured"] = tr.outcome == TransferOutcome::captured;
        if (tr.outcome != TransferOutcome::captured)
            throw PlltError("state transfer did not capture the target resonance");
    }

    SweepResult res;
    std::string csv_name;
    if (cfg.kind == ExperimentKind::nfrc) {
        csv_name = "nfrc.csv";
        std::vector<double> schedule =
            linspace(cfg.nfrc_phase_start, cfg.nfrc_phase_end, cfg.nfrc_steps);
        if (from_transfer) {
            // one leg from the captured phase toward the window end
            const double captured = exp.rig().phase_lag_wrapped();
            std::vector<double> leg;
            for (const double p : schedule)
                if ((cfg.nfrc_direction_up && p >= captured) ||
                    (!cfg.nfrc_direction_up && p <= captured))
                    leg.push_back(p);
            std::sort(leg.begin(), leg.end());
            if (!cfg.nfrc_direction_up) std::reverse(leg.begin(), leg.end());
            schedule = std::move(leg);
        }
        res = exp.nfrc_sweep(schedule);
    } else {
        csv_name = "backbone.csv";
        res = exp.backbone_sweep(
            linspace(cfg.backbone_force_start, cfg.backbone_force_end, cfg.backbone_steps));
    }

    write_records_csv(dir + "/" + csv_name, res.records, cfg.filter_n);
    ctx.files.push_back(csv_name);
    if (!res.failures.empty()) {
        write_failures_csv(dir + "/sweep_failures.csv", res.failures);
        ctx.files.push_back("sweep_failures.csv");
    }
    ctx.steps += static_cast<std::uint64_t>(exp.rig().step_count());
    ctx.summary["records"] = res.records.size();
    ctx.summary["failures"] = res.failures.size();
    ctx.summary["aborted"] = res.aborted;
    if (cfg.kind == ExperimentKind::backbone)
        ctx.summary["isola_extinct"] = res.isola_extinct;

    write_plot_script(dir, cfg, {csv_name}, cfg.filter_n, ctx.files);
    if (res.records.empty() || res.aborted)
        throw PlltError("sweep produced no locked records");
}

void run_transfer_kind(const RunConfig& cfg, const std::string& dir, RunContext& ctx) {
    Experiment exp(cfg.make_rig_config(), cfg.hold);
    TransferResult tr = exp.state_transfer(cfg.transfer_timeout_periods, cfg.log_decimation);
    write_runlog_csv(dir + "/transfer.csv", tr.log, cfg.filter_n);
    ctx.files.push_back("transfer.csv");
    ctx.steps += static_cast<std::uint64_t>(exp.rig().step_count());

    ctx.summary["captured"] = tr.outcome == TransferOutcome::captured;
    ctx.summary["capture_time"] = tr.capture_time;
    ctx.summary["phase_min"] = tr.phase_min;
    ctx.summary["phase_max"] = tr.phase_max;
    ctx.summary["omega_min"] = tr.omega_min;
    ctx.summary["omega_max"] = tr.omega_max;
    if (tr.outcome == TransferOutcome::captured) {
        write_records_csv(dir + "/transfer_point.csv", {tr.record}, cfg.filter_n);
        ctx.files.push_back("transfer_point.csv");
    }
    write_plot_script(dir, cfg, {"transfer.csv"}, cfg.filter_n, ctx.files);
}

void run_basin_kind(const RunConfig& cfg, const std::string& dir, RunContext& ctx) {
    BasinOptions opts;
    opts.horizon_periods = cfg.basin_horizon_periods;
    opts.f_s = cfg.basin_f_s;
    opts.tail_periods = cfg.basin_tail_periods;
    opts.jobs = cfg.jobs;
    const double omega = cfg.resolved_omega0();
    const BasinResult basin =
        basin_scan(cfg.plant, cfg.force_amp, omega, cfg.upsilon, cfg.basin_grid, opts);

    write_basin_csv(dir + "/basin.csv", basin);
    write_basin_summary_csv(dir + "/basin_summary.csv", basin, opts);
    ctx.files.push_back("basin.csv");
    ctx.files.push_back("basin_summary.csv");

    const double steps_per_cell = opts.horizon_periods * 2.0 * kPi / omega * opts.f_s;
    ctx.steps += static_cast<std::uint64_t>(steps_per_cell) *
                 static_cast<std::uint64_t>(basin.labels.size());
    ctx.summary["isola_fraction"] = basin.isola_fraction();
    ctx.summary["n_main"] = basin.n_main;
    ctx.summary["n_isola"] = basin.n_isola;
    ctx.summary["n_unresolved"] = basin.n_unresolved;
    ctx.summary["n_diverged"] = basin.n_diverged;
    write_plot_script(dir, cfg, {"basin.csv"}, cfg.filter_n, ctx.files);
}

void run_hbm_kind(const RunConfig& cfg, const std::string& dir, RunContext& ctx) {
    const HbmSystem sys(cfg.plant, cfg.hbm_n, cfg.upsilon);

    ContinuationOptions copts;
    copts.param = SweepParam::omega;
    copts.lambda_min = cfg.hbm_omega_min;
    copts.lambda_max = cfg.hbm_omega_max;
    copts.h0 = cfg.hbm_h0;
    copts.h_min = cfg.hbm_h_min;
    copts.h_max = cfg.hbm_h_max;
    copts.max_points = cfg.hbm_max_points;
    copts.compute_stability = cfg.hbm_stability;
    copts.detect_closure = cfg.hbm_seed_transfer;

    std::vector<Branch> branches(cfg.hbm_forces.size());
    std::vector<std::string> errors(cfg.hbm_forces.size());

    auto run_one = [&](std::size_t i) {
        const double force = cfg.hbm_forces[i];
        try {
            BranchPoint seed;
            if (cfg.hbm_seed_transfer) {
                RunConfig tcfg = cfg;
                tcfg.force_amp = force;
                Experiment exp(tcfg.make_rig_config(), cfg.hold);
                TransferResult tr =
                    exp.state_transfer(cfg.transfer_timeout_periods, cfg.log_decimation);
                if (tr.outcome != TransferOutcome::captured)
                    throw PlltError("isola seeding transfer did not capture");
                seed = seed_isola(sys, exp.rig().state(), exp.rig().theta(),
                                  exp.rig().omega(), force);
            } else {
                seed = newton_correct(sys, sys.linear_guess(cfg.hbm_omega_min, force),
                                      cfg.hbm_omega_min, force);
            }
            Branch branch = continue_branch(sys, seed, copts);
            detect_bifurcations(sys, branch);
            branches[i] = std::move(branch);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    if (cfg.jobs > 1 && cfg.hbm_forces.size() > 1) {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        const int workers =
            std::min<std::size_t>(cfg.jobs, cfg.hbm_forces.size());
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cfg.hbm_forces.size()) return;
                    run_one(i);
                }
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < cfg.hbm_forces.size(); ++i) run_one(i);
    }

    std::vector<std::string> data_files;
    nlohmann::json jb = nlohmann::json::array();
    for (std::size_t i = 0; i < branches.size(); ++i) {
        if (!errors[i].empty())
            throw PlltError("branch at F=" + format_full(cfg.hbm_forces[i]) +
                            " failed: " + errors[i]);
        const std::string name = "branch_" + std::to_string(i + 1) + ".csv";
        write_branch_csv(dir + "/" + name, branches[i]);
        ctx.files.push_back(name);
        data_files.push_back(name);

        int folds = 0, bps = 0;
        for (const auto& p : branches[i].points) {
            folds += p.bif_tag == BifTag::fold;
            bps += p.bif_tag == BifTag::branch_point;
        }
        nlohmann::json j;
        j["force"] = cfg.hbm_forces[i];
        j["points"] = branches[i].points.size();
        j["folds"] = folds;
        j["branch_points"] = bps;
        j["closed"] = branches[i].closed;
        j["step_collapsed"] = branches[i].step_collapsed;
        jb.push_back(j);
    }
    ctx.summary["branches"] = jb;
    write_plot_script(dir, cfg, data_files, cfg.hbm_n, ctx.files);
}

}  // namespace

RunManifest run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.config_snapshot = serialize(cfg);

    fs::create_directories(cfg.out_dir);
    RunContext ctx;
    try {
        cfg.validate();
        switch (cfg.kind) {
            case ExperimentKind::nfrc:
            case ExperimentKind::backbone:
                run_sweep_kind(cfg, cfg.out_dir, ctx);
                break;
            case ExperimentKind::transfer:
                run_transfer_kind(cfg, cfg.out_dir, ctx);
                break;
            case ExperimentKind::basin:
                run_basin_kind(cfg, cfg.out_dir, ctx);
                break;
            case ExperimentKind::hbm:
                run_hbm_kind(cfg, cfg.out_dir, ctx);
                break;
        }
        manifest.outcome = "success";
    } catch (const std::exception& e) {
        manifest.outcome = std::string("failed: ") + e.what();
    }

    for (const auto& name : ctx.files) {
        ManifestFile f;
        f.name = name;
        const std::string full = cfg.out_dir + "/" + name;
        f.bytes = fs::exists(full) ? fs::file_size(full) : 0;
        f.fnv1a64 = fs::exists(full) ? fnv1a64_file(full) : 0;
        manifest.files.push_back(f);
    }
    manifest.integration_steps = ctx.steps;
    manifest.summary_json = ctx.summary.empty() ? "" : ctx.summary.dump();
    manifest.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
    write_manifest(cfg.out_dir + "/manifest.json", manifest);
    return manifest;
}

CompareReport compare_files(const std::string& path_a, const std::string& path_b,
                            const CompareOptions& opts) {
    const CsvTable ta = CsvTable::read(path_a);
    const CsvTable tb = CsvTable::read(path_b);

    auto amp_column = [&](const CsvTable& t) -> std::string {
        if (t.has_column("A_total")) return "A_total";
        const std::string ak = "A" + std::to_string(opts.harmonic);
        if (t.has_column(ak)) return ak;
        throw ComparisonImpossible("no amplitude column (A_total or " + ak + ")");
    };

    const std::vector<double> wa = ta.numeric_column("omega");
    const std::vector<double> aa = ta.numeric_column(amp_column(ta));
    const std::vector<double> wb = tb.numeric_column("omega");
    const std::vector<double> ab = tb.numeric_column(amp_column(tb));
    if (wa.empty() || wb.size() < 2)
        throw ComparisonImpossible("need at least 1 and 2 rows to compare");

    const double lo = std::max(*std::min_element(wa.begin(), wa.end()),
                               *std::min_element(wb.begin(), wb.end()));
    const double hi = std::min(*std::max_element(wa.begin(), wa.end()),
                               *std::max_element(wb.begin(), wb.end()));
    if (!(hi >= lo)) throw ComparisonImpossible("frequency ranges are disjoint");

    const bool both_phase = ta.has_column("phase_meas") && tb.has_column("phase_meas");
    std::vector<double> pa, pb;
    if (both_phase) {
        pa = ta.numeric_column("phase_meas");
        pb = tb.numeric_column("phase_meas");
    }

    const double w_scale = std::max(1e-12, hi - lo);
    double a_scale = 0.0;
    for (const double a : ab) a_scale = std::max(a_scale, std::abs(a));
    a_scale = std::max(a_scale, 1e-12);

    CompareReport rep;
    rep.max_phase_dev = both_phase ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    double sq_sum = 0.0;

    for (std::size_t i = 0; i < wa.size(); ++i) {
        if (wa[i] < lo - 1e-12 || wa[i] > hi + 1e-12) continue;
        // nearest point on B's polyline in scaled coordinates
        double best = std::numeric_limits<double>::max();
        double amp_at_best = 0.0, phase_at_best = 0.0;
        for (std::size_t j = 0; j + 1 < wb.size(); ++j) {
            const double x1 = wb[j] / w_scale, y1 = ab[j] / a_scale;
            const double x2 = wb[j + 1] / w_scale, y2 = ab[j + 1] / a_scale;
            const double px = wa[i] / w_scale, py = aa[i] / a_scale;
            const double dx = x2 - x1, dy = y2 - y1;
            const double len2 = dx * dx + dy * dy;
            double s = len2 > 0.0 ? ((px - x1) * dx + (py - y1) * dy) / len2 : 0.0;
            s = std::clamp(s, 0.0, 1.0);
            const double cx = x1 + s * dx, cy = y1 + s * dy;
            const double d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy);
            if (d2 < best) {
                best = d2;
                amp_at_best = ab[j] + s * (ab[j + 1] - ab[j]);
                if (both_phase) phase_at_best = pb[j] + s * (pb[j + 1] - pb[j]);
            }
        }
        ComparePoint cp;
        cp.omega = wa[i];
        cp.amp_dev = std::abs(aa[i] - amp_at_best) / std::max(std::abs(amp_at_best), 1e-15);
        cp.phase_dev = both_phase ? std::abs(wrap_to_pi(pa[i] - phase_at_best))
                                  : std::numeric_limits<double>::quiet_NaN();
        rep.per_point.push_back(cp);
        rep.max_amp_dev = std::max(rep.max_amp_dev, cp.amp_dev);
        if (both_phase) rep.max_phase_dev = std::max(rep.max_phase_dev, cp.phase_dev);
        sq_sum += cp.amp_dev * cp.amp_dev;
        ++rep.points;
    }

    if (rep.points == 0) throw ComparisonImpossible("no points in the overlapping range");
    rep.rms_amp_dev = std::sqrt(sq_sum / rep.points);
    rep.pass = rep.max_amp_dev <= opts.tol_amp &&
               (!both_phase || rep.max_phase_dev <= opts.tol_phase_deg * kPi / 180.0);
    return rep;
}

}  // namespace pllt
