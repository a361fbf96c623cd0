#pragma once

#include <string>
#include <vector>

#include "pllt/config.hpp"
#include "pllt/experiment.hpp"
#include "pllt/hbm.hpp"
#include "pllt/manifest.hpp"

namespace pllt {

/// Executes the configured experiment, writes all artifacts and the manifest
/// into cfg.out_dir, and returns the manifest. Failures are captured in the
/// manifest outcome rather than thrown.
RunManifest run(const RunConfig& cfg);

struct CompareOptions {
    double tol_amp = 0.01;        ///< relative amplitude tolerance
    double tol_phase_deg = 1.0;   ///< phase tolerance [deg], when both sides have phase
    int harmonic = 1;             ///< amplitude column A<harmonic> when A_total is absent
};

struct ComparePoint {
    double omega;
    double amp_dev;    ///< relative
    double phase_dev;  ///< rad; NaN when either side lacks phase
};

struct CompareReport {
    double max_amp_dev = 0.0;
    double rms_amp_dev = 0.0;
    double max_phase_dev = 0.0;  ///< rad; NaN when not compared
    int points = 0;
    bool pass = false;
    std::vector<ComparePoint> per_point;
};

/// Compares two result curves (experiment records or oracle branches) over
/// their overlapping frequency range: for every row of A, the deviation to the
/// nearest point of B's polyline in scaled (omega, amplitude) coordinates.
/// Throws ComparisonImpossible when the ranges are disjoint.
CompareReport compare_files(const std::string& path_a, const std::string& path_b,
                            const CompareOptions& opts = {});

// CSV emission helpers shared by run() and the test suites.
void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records,
                       int n_harmonics);
void write_failures_csv(const std::string& path,
                        const std::vector<SweepPointFailure>& failures);
void write_runlog_csv(const std::string& path, const RunLog& log, int n_harmonics);
void write_branch_csv(const std::string& path, const Branch& branch);
void write_basin_csv(const std::string& path, const BasinResult& basin);
void write_basin_summary_csv(const std::string& path, const BasinResult& basin,
                             const BasinOptions& opts);
void write_timeseries_csv(const std::string& path, const TimeSeries& series);

}  // namespace pllt
