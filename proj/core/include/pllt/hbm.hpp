#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <vector>

#include "pllt/errors.hpp"
#include "pllt/oscillator.hpp"

namespace pllt {

enum class BifTag { none, fold, branch_point };

[[nodiscard]] std::string to_string(BifTag tag);

/// One converged periodic solution of the harmonic balance system.
struct BranchPoint {
    Eigen::VectorXd z;   ///< Fourier coefficients [c0, s1, c1, ..., sN, cN]
    double omega = 0.0;  ///< forcing frequency [rad/s]
    double force = 0.0;  ///< forcing amplitude [N]
    int upsilon = 1;     ///< subharmonic divisor of the basis
    bool stable = false;
    std::complex<double> mult1{0.0, 0.0};
    std::complex<double> mult2{0.0, 0.0};
    BifTag bif_tag = BifTag::none;

    // continuation diagnostics used by the bifurcation detector
    double tangent_param = 0.0;  ///< continuation-parameter component of the unit tangent
    double border_det = 0.0;     ///< determinant of the bordered Jacobian

    [[nodiscard]] double harmonic_amplitude(int j) const {
        return std::hypot(z[2 * j - 1], z[2 * j]);
    }
    [[nodiscard]] double harmonic_phase(int j) const {
        return std::atan2(z[2 * j], z[2 * j - 1]);
    }
};

enum class SweepParam { omega, force };

struct Branch {
    std::vector<BranchPoint> points;
    SweepParam param = SweepParam::omega;
    int upsilon = 1;
    bool closed = false;          ///< continuation returned to its start (isola)
    bool step_collapsed = false;  ///< terminated by the minimum-step guard
};

/// Harmonic balance problem for the Duffing plant on a 1/upsilon subharmonic
/// basis with N harmonics. The cubic term is evaluated by alternating between
/// the frequency and time domains on a power-of-two sample grid that resolves
/// the tripled bandwidth of the cube without aliasing.
class HbmSystem {
public:
    HbmSystem(OscillatorParams plant, int n_harmonics, int upsilon);

    [[nodiscard]] int n_harmonics() const { return n_; }
    [[nodiscard]] int upsilon() const { return upsilon_; }
    [[nodiscard]] int dim() const { return 2 * n_ + 1; }
    [[nodiscard]] int n_samples() const { return samples_; }
    [[nodiscard]] const OscillatorParams& plant() const { return plant_; }

    /// Fourier-domain balance residual of the equation of motion.
    [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& z, double omega,
                                           double force) const;

    /// d residual / d z: analytic linear blocks plus the AFT-differentiated
    /// cubic term.
    [[nodiscard]] Eigen::MatrixXd jacobian_z(const Eigen::VectorXd& z, double omega) const;

    [[nodiscard]] Eigen::VectorXd d_residual_d_omega(const Eigen::VectorXd& z,
                                                     double omega) const;
    [[nodiscard]] Eigen::VectorXd d_residual_d_force() const;

    /// Time samples of the reconstruction over one response period.
    [[nodiscard]] Eigen::VectorXd time_samples(const Eigen::VectorXd& z) const {
        return gamma_ * z;
    }
    /// Projection of time samples back onto the Fourier basis.
    [[nodiscard]] Eigen::VectorXd project(const Eigen::VectorXd& samples) const {
        return gamma_pinv_ * samples;
    }

    /// Peak amplitude (max-min)/2 of the reconstructed signal over one period.
    [[nodiscard]] double total_amplitude(const Eigen::VectorXd& z) const;

    /// Displacement and velocity at response phase phi (phi = omega t / upsilon).
    [[nodiscard]] double displacement(const Eigen::VectorXd& z, double phi) const;
    [[nodiscard]] double velocity(const Eigen::VectorXd& z, double phi, double omega) const;

    /// Fourier coefficients of the linear frequency response at (omega, force)
    /// with k_nl ignored; used to seed correctors.
    [[nodiscard]] Eigen::VectorXd linear_guess(double omega, double force) const;

private:
    OscillatorParams plant_;
    int n_;
    int upsilon_;
    int samples_;
    Eigen::MatrixXd gamma_;       ///< samples x dim basis evaluation
    Eigen::MatrixXd gamma_pinv_;  ///< dim x samples projection (2/M Gamma^T)
};

struct NewtonOptions {
    int max_iters = 25;
    double tol = 1e-10;  ///< scaled residual tolerance
};

/// Scale used for the residual convergence test.
[[nodiscard]] double residual_scale(const HbmSystem& sys, const Eigen::VectorXd& z,
                                    double force);

/// Newton correction at fixed (omega, force). Throws CorrectorFailure.
[[nodiscard]] BranchPoint newton_correct(const HbmSystem& sys, const Eigen::VectorXd& z0,
                                         double omega, double force,
                                         const NewtonOptions& opts = {});

/// Newton correction with the response phase of harmonic `kappa` pinned to
/// `phase_target`, solving for (z, omega) at fixed force. Used to look up the
/// oracle point matching a locked experimental phase.
[[nodiscard]] BranchPoint newton_correct_at_phase(const HbmSystem& sys,
                                                  const Eigen::VectorXd& z0, double omega0,
                                                  double force, int kappa,
                                                  double phase_target,
                                                  const NewtonOptions& opts = {});

/// Floquet multipliers of the linearized dynamics over one response period,
/// via RK4 integration of the monodromy matrix. Returns the pair and the
/// stability verdict |mult| <= 1 + 1e-6.
struct FloquetResult {
    std::complex<double> mult1;
    std::complex<double> mult2;
    bool stable;
};

[[nodiscard]] FloquetResult floquet_stability(const HbmSystem& sys, const Eigen::VectorXd& z,
                                              double omega);

/// Applies floquet_stability to a point and stores the result.
void annotate_stability(const HbmSystem& sys, BranchPoint& point);

struct ContinuationOptions {
    SweepParam param = SweepParam::omega;
    double direction = 1.0;  ///< initial sign of the tangent's parameter component
    double lambda_min = 0.0;
    double lambda_max = 1e9;
    double h0 = 5e-3;
    double h_min = 1e-4;
    double h_max = 0.05;
    int max_points = 4000;
    NewtonOptions newton;
    bool detect_closure = false;  ///< stop when the branch returns to its seed
    bool compute_stability = true;
};

/// Pseudo-arclength continuation from a converged seed. Traverses folds,
/// adapts the step between h_min and h_max (halving on corrector failure) and
/// terminates gracefully on step collapse, parameter bounds, closure or the
/// point budget.
[[nodiscard]] Branch continue_branch(const HbmSystem& sys, const BranchPoint& seed,
                                     const ContinuationOptions& opts);

/// Tags folds (parameter component of the tangent changes sign) and branch
/// points (bordered-Jacobian determinant changes sign without a fold).
/// Detected bifurcations are refined by bisection and inserted into the
/// branch as tagged points.
void detect_bifurcations(const HbmSystem& sys, Branch& branch);

/// Branch switching at a branch point: perturbs along the singular direction
/// and corrects onto the bifurcating solution family.
[[nodiscard]] BranchPoint switch_branch(const HbmSystem& sys, const BranchPoint& bp,
                                        double perturbation = 1e-3);

/// Fits a captured steady state (one response period of samples starting at
/// zero carrier phase) on the upsilon basis and corrects it to a BranchPoint.
[[nodiscard]] BranchPoint seed_from_samples(const HbmSystem& sys,
                                            const Eigen::VectorXd& samples, double omega,
                                            double force, const NewtonOptions& opts = {});

/// Seeds a point on a (sub)harmonic branch from a mechanical state known to
/// lie on the steady orbit: integrates the plant open loop under
/// f = F sin(omega t + theta0) for one response period and projects.
/// theta0 is the forcing phase at state.t.
[[nodiscard]] BranchPoint seed_isola(const HbmSystem& sys, const MechState& state,
                                     double theta0, double omega, double force,
                                     double f_s = 0.0, const NewtonOptions& opts = {});

}  // namespace pllt
