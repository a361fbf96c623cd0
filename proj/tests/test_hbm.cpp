#include <doctest.h>

#include <cmath>
#include <random>

#include "pllt/harmonics.hpp"
#include "pllt/hbm.hpp"
#include "pllt/oscillator.hpp"
#include "support/analytic.hpp"

using namespace pllt;

namespace {

const OscillatorParams kDuffing{1.0, 0.001, 1.0, 1.0};

/// Integrates the plant from the reconstructed orbit state for n response
/// periods and returns (first-period amplitude, last-period amplitude).
std::pair<double, double> orbit_drift(const HbmSystem& sys, const BranchPoint& p,
                                      int n_periods) {
    const double period = p.upsilon * 2.0 * kPi / p.omega;
    const int steps_per_period = 512;
    const double dt = period / steps_per_period;
    auto force = [&](double t) { return p.force * std::sin(p.omega * t); };

    MechState s{sys.displacement(p.z, 0.0), sys.velocity(p.z, 0.0, p.omega), 0.0};
    double lo = s.x, hi = s.x;
    for (int i = 0; i < steps_per_period; ++i) {
        s = rk4_step(s, force, dt, sys.plant());
        lo = std::min(lo, s.x);
        hi = std::max(hi, s.x);
    }
    const double first = 0.5 * (hi - lo);
    for (int k = 1; k < n_periods - 1; ++k)
        for (int i = 0; i < steps_per_period; ++i) s = rk4_step(s, force, dt, sys.plant());
    double lo2 = s.x, hi2 = s.x;
    for (int i = 0; i < steps_per_period; ++i) {
        s = rk4_step(s, force, dt, sys.plant());
        lo2 = std::min(lo2, s.x);
        hi2 = std::max(hi2, s.x);
    }
    return {first, 0.5 * (hi2 - lo2)};
}

}  // namespace

TEST_CASE("trivial solution: zero coefficients, zero force, zero residual") {
    HbmSystem sys(kDuffing, 5, 1);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(sys.dim());
    CHECK(sys.residual(z, 1.1, 0.0).norm() == 0.0);
}

TEST_CASE("linear plant: residual vanishes exactly at the closed-form coefficients") {
    OscillatorParams linear = kDuffing;
    linear.k_nl = 0.0;
    HbmSystem sys(linear, 1, 1);
    for (const double w : {0.5, 0.9, 1.0, 1.3}) {
        const Eigen::VectorXd z = sys.linear_guess(w, 0.01);
        CHECK(sys.residual(z, w, 0.01).norm() < 1e-14);
    }
}

TEST_CASE("analytic Jacobians match finite differences") {
    HbmSystem sys(kDuffing, 7, 1);
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    Eigen::VectorXd z(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) z[i] = dist(gen);
    const double w = 1.05, F = 1e-4;

    const Eigen::MatrixXd jac = sys.jacobian_z(z, w);
    const double h = 1e-7;
    for (int j = 0; j < sys.dim(); ++j) {
        Eigen::VectorXd zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        const Eigen::VectorXd col =
            (sys.residual(zp, w, F) - sys.residual(zm, w, F)) / (2.0 * h);
        CHECK((jac.col(j) - col).norm() < 1e-6);
    }

    const Eigen::VectorXd dw =
        (sys.residual(z, w + h, F) - sys.residual(z, w - h, F)) / (2.0 * h);
    CHECK((sys.d_residual_d_omega(z, w) - dw).norm() < 1e-6);

    const Eigen::VectorXd dF =
        (sys.residual(z, w, F + h) - sys.residual(z, w, F - h)) / (2.0 * h);
    CHECK((sys.d_residual_d_force() - dF).norm() < 1e-6);
}

TEST_CASE("corrector: exact solution converges immediately, garbage fails loudly") {
    HbmSystem sys(kDuffing, 9, 1);
    const BranchPoint p = newton_correct(sys, sys.linear_guess(0.98, 1e-4), 0.98, 1e-4);
    CHECK(sys.residual(p.z, p.omega, p.force).norm() <=
          1e-10 * residual_scale(sys, p.z, p.force));

    // re-correcting from the exact solution does not move it
    const BranchPoint q = newton_correct(sys, p.z, 0.98, 1e-4);
    CHECK((q.z - p.z).norm() == 0.0);

    std::mt19937 gen(5);
    std::uniform_real_distribution<double> big(1e5, 1e6);
    Eigen::VectorXd garbage(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) garbage[i] = big(gen);
    CHECK_THROWS_AS((void)newton_correct(sys, garbage, 0.98, 1e-4), CorrectorFailure);
}

TEST_CASE("HBM solution reproduces the time-integrated steady state") {
    HbmSystem sys(kDuffing, 14, 1);
    const BranchPoint p = newton_correct(sys, sys.linear_guess(1.02, 1e-4), 1.02, 1e-4);
    const auto [first, last] = orbit_drift(sys, p, 100);
    const double hbm_amp = sys.total_amplitude(p.z);
    CHECK(std::abs(first - hbm_amp) / hbm_amp < 1e-3);
    CHECK(std::abs(last - hbm_amp) / hbm_amp < 1e-3);
}

TEST_CASE("Floquet multipliers of a low-amplitude point match the linear pair") {
    HbmSystem sys(kDuffing, 9, 1);
    const BranchPoint p = newton_correct(sys, sys.linear_guess(0.7, 1e-5), 0.7, 1e-5);
    const FloquetResult fs = floquet_stability(sys, p.z, p.omega);
    // constant-coefficient limit: a complex pair of modulus exp(-c T / 2m)
    const double period = 2.0 * kPi / p.omega;
    const double expected = std::exp(-kDuffing.c * period / (2.0 * kDuffing.m));
    CHECK(std::abs(fs.mult1) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(std::abs(fs.mult2) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(fs.stable);
}

TEST_CASE("primary branch at F=1e-4: two folds, stability flips at them") {
    HbmSystem sys(kDuffing, 14, 1);
    const BranchPoint seed = newton_correct(sys, sys.linear_guess(0.99, 1e-4), 0.99, 1e-4);

    ContinuationOptions opts;
    opts.param = SweepParam::omega;
    opts.direction = 1.0;
    opts.lambda_min = 0.98;
    opts.lambda_max = 1.03;
    opts.h0 = 2e-3;
    opts.h_max = 0.02;
    Branch branch = continue_branch(sys, seed, opts);
    REQUIRE(branch.points.size() > 20);
    detect_bifurcations(sys, branch);

    int folds = 0, bps = 0;
    std::vector<std::size_t> fold_idx;
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        if (branch.points[i].bif_tag == BifTag::fold) {
            ++folds;
            fold_idx.push_back(i);
        }
        bps += branch.points[i].bif_tag == BifTag::branch_point;
    }
    CHECK(folds == 2);
    CHECK(bps == 0);

    // a fold is a +1 multiplier crossing
    for (const std::size_t i : fold_idx) {
        const double mmax = std::max(std::abs(branch.points[i].mult1),
                                     std::abs(branch.points[i].mult2));
        CHECK(std::abs(mmax - 1.0) < 1e-3);
    }

    // stability flips exactly at the folds and nowhere else
    std::vector<std::size_t> flips;
    for (std::size_t i = 1; i < branch.points.size(); ++i)
        if (branch.points[i].stable != branch.points[i - 1].stable) flips.push_back(i);
    REQUIRE(flips.size() == 2);
    REQUIRE(fold_idx.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        const auto d = static_cast<std::ptrdiff_t>(flips[j]) -
                       static_cast<std::ptrdiff_t>(fold_idx[j]);
        CHECK(std::abs(d) <= 1);  // the flip brackets the inserted fold point
    }

    // every stable point survives direct time integration (subsampled here)
    int checked = 0;
    const std::size_t stride = std::max<std::size_t>(1, branch.points.size() / 12);
    for (std::size_t i = 0; i < branch.points.size(); i += stride) {
        const BranchPoint& p = branch.points[i];
        if (!p.stable) continue;
        const auto [first, last] = orbit_drift(sys, p, 100);
        const double amp = sys.total_amplitude(p.z);
        CHECK(std::abs(last - amp) / amp < 1e-3);
        CHECK(std::abs(last - first) / amp < 1e-3);
        ++checked;
    }
    CHECK(checked >= 3);
}

TEST_CASE("zero-force continuation stays on the trivial branch") {
    HbmSystem sys(kDuffing, 5, 1);
    const BranchPoint seed =
        newton_correct(sys, Eigen::VectorXd::Zero(sys.dim()), 0.9, 0.0);
    ContinuationOptions opts;
    opts.lambda_min = 0.9;
    opts.lambda_max = 1.1;
    opts.h0 = 0.01;
    opts.compute_stability = false;
    const Branch branch = continue_branch(sys, seed, opts);
    CHECK(branch.points.size() > 3);
    for (const auto& p : branch.points) CHECK(sys.total_amplitude(p.z) < 1e-12);
}

TEST_CASE("monotone linear branch carries no bifurcation tags") {
    OscillatorParams linear = kDuffing;
    linear.k_nl = 0.0;
    HbmSystem sys(linear, 5, 1);
    const BranchPoint seed = newton_correct(sys, sys.linear_guess(0.8, 0.01), 0.8, 0.01);
    ContinuationOptions opts;
    opts.lambda_min = 0.8;
    opts.lambda_max = 1.2;
    Branch branch = continue_branch(sys, seed, opts);
    detect_bifurcations(sys, branch);
    for (const auto& p : branch.points) CHECK(p.bif_tag == BifTag::none);
}

TEST_CASE("harmonic truncation: N=14 vs N=20 amplitudes agree to 1e-4 relative") {
    HbmSystem sys14(kDuffing, 14, 1);
    HbmSystem sys20(kDuffing, 20, 1);
    for (const double w : {0.99, 1.0, 1.005}) {
        const BranchPoint a = newton_correct(sys14, sys14.linear_guess(w, 1.5e-4), w, 1.5e-4);
        const BranchPoint b = newton_correct(sys20, sys20.linear_guess(w, 1.5e-4), w, 1.5e-4);
        const double aa = sys14.total_amplitude(a.z);
        const double ab = sys20.total_amplitude(b.z);
        CHECK(std::abs(aa - ab) / ab < 1e-4);
    }
}

TEST_CASE("branch point where the even-harmonic family bifurcates near omega_l/2") {
    // the symmetry-breaking point on the main branch from which the even
    // 2:1 superharmonic family emerges; its location is derived here
    HbmSystem sys(kDuffing, 14, 1);
    const BranchPoint seed = newton_correct(sys, sys.linear_guess(0.25, 0.5), 0.25, 0.5);

    ContinuationOptions opts;
    opts.lambda_min = 0.18;
    opts.lambda_max = 0.80;
    opts.h0 = 2e-3;
    opts.h_max = 0.01;
    Branch branch = continue_branch(sys, seed, opts);
    detect_bifurcations(sys, branch);

    std::vector<double> bp_omegas;
    for (const auto& p : branch.points)
        if (p.bif_tag == BifTag::branch_point) bp_omegas.push_back(p.omega);
    REQUIRE(!bp_omegas.empty());
    // the symmetric solution destabilizes between two pitchforks near 0.6
    CHECK(bp_omegas.size() == 2);
    for (const double w : bp_omegas) {
        CHECK(w > 0.5);
        CHECK(w < 0.7);
    }

    // switching at the first branch point lands on a solution with even content
    for (const auto& p : branch.points) {
        if (p.bif_tag != BifTag::branch_point) continue;
        const BranchPoint other = switch_branch(sys, p);
        const double even = other.harmonic_amplitude(2) + other.harmonic_amplitude(4);
        const double odd = other.harmonic_amplitude(1) + other.harmonic_amplitude(3);
        CHECK(even > 1e-3 * odd);
        break;
    }
}

TEST_CASE("phase-pinned corrector finds the resonant point on the backbone") {
    HbmSystem sys(kDuffing, 14, 1);
    const double F = 1e-4;
    const BranchPoint p = newton_correct_at_phase(sys, sys.linear_guess(1.0, F), 1.0, F, 1,
                                                  -kPi / 2.0);
    CHECK(p.harmonic_phase(1) == doctest::Approx(-kPi / 2.0).epsilon(1e-9));
    // cross-check against the first-order hardening backbone
    const double X = sys.total_amplitude(p.z);
    const double w_backbone = oracle::duffing_backbone_omega(1.0, 1.0, 1.0, X);
    CHECK(std::abs(p.omega - w_backbone) / w_backbone < 0.02);
}

TEST_CASE("seeding from integrated samples recovers a converged point") {
    HbmSystem sys(kDuffing, 14, 1);
    const BranchPoint truth = newton_correct(sys, sys.linear_guess(1.01, 1e-4), 1.01, 1e-4);

    // start exactly on the orbit and let the seeder integrate and project
    MechState state{sys.displacement(truth.z, 0.0), sys.velocity(truth.z, 0.0, truth.omega),
                    0.0};
    const BranchPoint seeded = seed_isola(sys, state, 0.0, truth.omega, truth.force);
    CHECK((seeded.z - truth.z).norm() < 1e-6);
    CHECK(sys.residual(seeded.z, seeded.omega, seeded.force).norm() <=
          1e-10 * residual_scale(sys, seeded.z, seeded.force));
}
