#include "pllt/hbm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pllt/harmonics.hpp"

namespace pllt {

namespace {

int next_pow2(int v) {
    int p = 1;
    while (p < v) p *= 2;
    return p;
}

/// Eigenvalues of a 2x2 real matrix.
void eig2(const Eigen::Matrix2d& m, std::complex<double>& l1, std::complex<double>& l2) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    l1 = 0.5 * (tr + disc);
    l2 = 0.5 * (tr - disc);
}

}  // namespace

std::string to_string(BifTag tag) {
    switch (tag) {
        case BifTag::fold: return "fold";
        case BifTag::branch_point: return "branch_point";
        default: return "none";
    }
}

HbmSystem::HbmSystem(OscillatorParams plant, int n_harmonics, int upsilon)
    : plant_(plant), n_(n_harmonics), upsilon_(upsilon) {
    plant_.validate();
    if (n_ < 1) throw ConfigError("hbm.n_harmonics must be >= 1");
    if (upsilon_ < 1) throw ConfigError("hbm.upsilon must be >= 1");
    samples_ = next_pow2(2 * (4 * n_ + 1));

    gamma_.resize(samples_, dim());
    Eigen::VectorXd row(dim());
    for (int i = 0; i < samples_; ++i) {
        basis_eval(2.0 * kPi * i / samples_, n_, row);
        gamma_.row(i) = row.transpose();
    }
    gamma_pinv_ = (2.0 / samples_) * gamma_.transpose();
}

Eigen::VectorXd HbmSystem::residual(const Eigen::VectorXd& z, double omega,
                                    double force) const {
    const double base = omega / upsilon_;
    Eigen::VectorXd r(dim());
    r[0] = plant_.k * z[0];
    for (int j = 1; j <= n_; ++j) {
        const double w = j * base;
        const double a = plant_.k - plant_.m * w * w;
        const double b = plant_.c * w;
        const double s = z[2 * j - 1];
        const double c = z[2 * j];
        r[2 * j - 1] = a * s - b * c;
        r[2 * j] = b * s + a * c;
    }
    // cubic term by alternating frequency/time
    Eigen::VectorXd x = gamma_ * z;
    x = x.array().cube();
    r.noalias() += plant_.k_nl * (gamma_pinv_ * x);
    r[2 * upsilon_ - 1] -= force;
    return r;
}

Eigen::MatrixXd HbmSystem::jacobian_z(const Eigen::VectorXd& z, double omega) const {
    const double base = omega / upsilon_;
    const Eigen::VectorXd x = gamma_ * z;
    const Eigen::VectorXd w = 3.0 * plant_.k_nl * x.array().square();
    Eigen::MatrixXd jac = gamma_pinv_ * w.asDiagonal() * gamma_;
    jac(0, 0) += plant_.k;
    for (int j = 1; j <= n_; ++j) {
        const double wj = j * base;
        const double a = plant_.k - plant_.m * wj * wj;
        const double b = plant_.c * wj;
        jac(2 * j - 1, 2 * j - 1) += a;
        jac(2 * j - 1, 2 * j) -= b;
        jac(2 * j, 2 * j - 1) += b;
        jac(2 * j, 2 * j) += a;
    }
    return jac;
}

Eigen::VectorXd HbmSystem::d_residual_d_omega(const Eigen::VectorXd& z, double omega) const {
    const double base = omega / upsilon_;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim());
    for (int j = 1; j <= n_; ++j) {
        const double wj = j * base;
        const double da = -2.0 * plant_.m * wj * j / upsilon_;
        const double db = plant_.c * j / upsilon_;
        const double s = z[2 * j - 1];
        const double c = z[2 * j];
        d[2 * j - 1] = da * s - db * c;
        d[2 * j] = db * s + da * c;
    }
    return d;
}

Eigen::VectorXd HbmSystem::d_residual_d_force() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim());
    d[2 * upsilon_ - 1] = -1.0;
    return d;
}

double HbmSystem::total_amplitude(const Eigen::VectorXd& z) const {
    constexpr int kDense = 512;
    Eigen::VectorXd row(dim());
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < kDense; ++i) {
        basis_eval(2.0 * kPi * i / kDense, n_, row);
        const double val = row.dot(z);
        if (i == 0) {
            lo = hi = val;
        } else {
            lo = std::min(lo, val);
            hi = std::max(hi, val);
        }
    }
    return 0.5 * (hi - lo);
}

double HbmSystem::displacement(const Eigen::VectorXd& z, double phi) const {
    Eigen::VectorXd row(dim());
    basis_eval(phi, n_, row);
    return row.dot(z);
}

double HbmSystem::velocity(const Eigen::VectorXd& z, double phi, double omega) const {
    const double base = omega / upsilon_;
    double v = 0.0;
    for (int j = 1; j <= n_; ++j) {
        const double wj = j * base;
        v += wj * (z[2 * j - 1] * std::cos(j * phi) - z[2 * j] * std::sin(j * phi));
    }
    return v;
}

Eigen::VectorXd HbmSystem::linear_guess(double omega, double force) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim());
    const double a = plant_.k - plant_.m * omega * omega;
    const double b = plant_.c * omega;
    const double den = a * a + b * b;
    z[2 * upsilon_ - 1] = force * a / den;
    z[2 * upsilon_] = -force * b / den;
    return z;
}

double residual_scale(const HbmSystem& sys, const Eigen::VectorXd& z, double force) {
    return std::max({1e-12, std::abs(force), sys.plant().k * z.cwiseAbs().maxCoeff()});
}

namespace {

BranchPoint make_point(const HbmSystem& sys, Eigen::VectorXd z, double omega, double force) {
    BranchPoint p;
    p.z = std::move(z);
    p.omega = omega;
    p.force = force;
    p.upsilon = sys.upsilon();
    return p;
}

}  // namespace

BranchPoint newton_correct(const HbmSystem& sys, const Eigen::VectorXd& z0, double omega,
                           double force, const NewtonOptions& opts) {
    Eigen::VectorXd z = z0;
    Eigen::VectorXd r = sys.residual(z, omega, force);
    double rnorm = r.norm();
    for (int it = 0; it < opts.max_iters; ++it) {
        if (rnorm <= opts.tol * residual_scale(sys, z, force))
            return make_point(sys, z, omega, force);
        const Eigen::MatrixXd jac = sys.jacobian_z(z, omega);
        const Eigen::VectorXd dz = jac.partialPivLu().solve(-r);
        if (!dz.allFinite())
            throw CorrectorFailure("singular HBM Jacobian", rnorm, it);
        double step = 1.0;
        for (int halving = 0; halving < 5; ++halving) {
            const Eigen::VectorXd z_try = z + step * dz;
            const Eigen::VectorXd r_try = sys.residual(z_try, omega, force);
            if (r_try.norm() < rnorm || halving == 4) {
                z = z_try;
                r = r_try;
                rnorm = r_try.norm();
                break;
            }
            step *= 0.5;
        }
        if (!std::isfinite(rnorm))
            throw CorrectorFailure("HBM residual became non-finite", rnorm, it);
    }
    if (rnorm <= opts.tol * residual_scale(sys, z, force))
        return make_point(sys, z, omega, force);
    throw CorrectorFailure("HBM corrector did not converge", rnorm, opts.max_iters);
}

BranchPoint newton_correct_at_phase(const HbmSystem& sys, const Eigen::VectorXd& z0,
                                    double omega0, double force, int kappa,
                                    double phase_target, const NewtonOptions& opts) {
    const int dim = sys.dim();
    Eigen::VectorXd z = z0;
    double omega = omega0;
    const double st = std::sin(phase_target);
    const double ct = std::cos(phase_target);

    auto full_residual = [&](const Eigen::VectorXd& zz, double ww) {
        Eigen::VectorXd fr(dim + 1);
        fr.head(dim) = sys.residual(zz, ww, force);
        // phase pin: atan2(c,s) = target  <=>  c cos - s sin = 0 (right half-plane)
        fr[dim] = zz[2 * kappa] * ct - zz[2 * kappa - 1] * st;
        return fr;
    };

    Eigen::VectorXd r = full_residual(z, omega);
    double rnorm = r.norm();
    for (int it = 0; it < opts.max_iters; ++it) {
        if (rnorm <= opts.tol * residual_scale(sys, z, force)) break;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
        jac.topLeftCorner(dim, dim) = sys.jacobian_z(z, omega);
        jac.topRightCorner(dim, 1) = sys.d_residual_d_omega(z, omega);
        jac(dim, 2 * kappa - 1) = -st;
        jac(dim, 2 * kappa) = ct;
        const Eigen::VectorXd du = jac.partialPivLu().solve(-r);
        if (!du.allFinite())
            throw CorrectorFailure("singular phase-pinned Jacobian", rnorm, it);
        double step = 1.0;
        for (int halving = 0; halving < 5; ++halving) {
            const Eigen::VectorXd z_try = z + step * du.head(dim);
            const double w_try = omega + step * du[dim];
            const Eigen::VectorXd r_try = full_residual(z_try, w_try);
            if (r_try.norm() < rnorm || halving == 4) {
                z = z_try;
                omega = w_try;
                r = r_try;
                rnorm = r_try.norm();
                break;
            }
            step *= 0.5;
        }
        if (!std::isfinite(rnorm))
            throw CorrectorFailure("phase-pinned residual became non-finite", rnorm, it);
    }
    if (rnorm > opts.tol * residual_scale(sys, z, force))
        throw CorrectorFailure("phase-pinned corrector did not converge", rnorm,
                               opts.max_iters);
    // require the solution in the half-plane matching the target, not target+pi
    if (z[2 * kappa - 1] * ct + z[2 * kappa] * st <= 0.0)
        throw CorrectorFailure("phase-pinned corrector landed in antiphase", rnorm, 0);
    return make_point(sys, z, omega, force);
}

FloquetResult floquet_stability(const HbmSystem& sys, const Eigen::VectorXd& z,
                                double omega) {
    const OscillatorParams& p = sys.plant();
    const double period = sys.upsilon() * 2.0 * kPi / omega;
    const int steps = 4096;
    const double dt = period / steps;

    // stiffness coefficient (k + 3 k_nl x(t)^2)/m at the 2*steps+1 RK4 nodes
    Eigen::VectorXd coef(2 * steps + 1);
    Eigen::VectorXd row(sys.dim());
    for (int i = 0; i <= 2 * steps; ++i) {
        basis_eval(kPi * i / steps, sys.n_harmonics(), row);
        const double x = row.dot(z);
        coef[i] = (p.k + 3.0 * p.k_nl * x * x) / p.m;
    }
    if (!coef.allFinite())
        throw IntegrationDivergence("variational coefficients non-finite", 0.0);

    const double cm = p.c / p.m;
    auto deriv = [&](const Eigen::Matrix2d& m, double stiff) {
        Eigen::Matrix2d d;
        d.row(0) = m.row(1);
        d.row(1) = -stiff * m.row(0) - cm * m.row(1);
        return d;
    };

    Eigen::Matrix2d mono = Eigen::Matrix2d::Identity();
    for (int i = 0; i < steps; ++i) {
        const double s0 = coef[2 * i];
        const double sh = coef[2 * i + 1];
        const double s1 = coef[2 * i + 2];
        const Eigen::Matrix2d k1 = deriv(mono, s0);
        const Eigen::Matrix2d k2 = deriv(mono + 0.5 * dt * k1, sh);
        const Eigen::Matrix2d k3 = deriv(mono + 0.5 * dt * k2, sh);
        const Eigen::Matrix2d k4 = deriv(mono + dt * k3, s1);
        mono += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!mono.allFinite())
        throw IntegrationDivergence("monodromy integration diverged", period);

    FloquetResult res;
    eig2(mono, res.mult1, res.mult2);
    const double mmax = std::max(std::abs(res.mult1), std::abs(res.mult2));
    res.stable = mmax <= 1.0 + 1e-6;
    return res;
}

void annotate_stability(const HbmSystem& sys, BranchPoint& point) {
    const FloquetResult fs = floquet_stability(sys, point.z, point.omega);
    point.mult1 = fs.mult1;
    point.mult2 = fs.mult2;
    point.stable = fs.stable;
}

namespace {

struct ContState {
    Eigen::VectorXd z;
    double lambda;  // omega or force
};

double get_omega(const ContState& u, const ContinuationOptions& o, double fixed) {
    return o.param == SweepParam::omega ? u.lambda : fixed;
}
double get_force(const ContState& u, const ContinuationOptions& o, double fixed) {
    return o.param == SweepParam::force ? u.lambda : fixed;
}

/// Solves the bordered system [J_z, R_lambda; b^T] tau = [0; 1] and
/// normalizes. b is the previous unit tangent (or e_lambda for the seed).
Eigen::VectorXd bordered_tangent(const HbmSystem& sys, const ContState& u,
                                 const ContinuationOptions& o, double fixed,
                                 const Eigen::VectorXd& bottom) {
    const int dim = sys.dim();
    const double omega = get_omega(u, o, fixed);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
    m.topLeftCorner(dim, dim) = sys.jacobian_z(u.z, omega);
    m.topRightCorner(dim, 1) = o.param == SweepParam::omega
                                   ? sys.d_residual_d_omega(u.z, omega)
                                   : sys.d_residual_d_force();
    m.row(dim) = bottom.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim + 1);
    rhs[dim] = 1.0;
    Eigen::VectorXd tau = m.partialPivLu().solve(rhs);
    const double norm = tau.norm();
    if (!(norm > 0.0) || !tau.allFinite())
        throw CorrectorFailure("tangent computation failed", 0.0, 0);
    return tau / norm;
}

double bordered_det(const HbmSystem& sys, const ContState& u, const ContinuationOptions& o,
                    double fixed, const Eigen::VectorXd& tangent) {
    const int dim = sys.dim();
    const double omega = get_omega(u, o, fixed);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
    m.topLeftCorner(dim, dim) = sys.jacobian_z(u.z, omega);
    m.topRightCorner(dim, 1) = o.param == SweepParam::omega
                                   ? sys.d_residual_d_omega(u.z, omega)
                                   : sys.d_residual_d_force();
    m.row(dim) = tangent.transpose();
    return m.partialPivLu().determinant();
}

/// Pseudo-arclength corrector: Newton on [R; tau0^T (u - pred)] = 0.
/// Returns iterations used, or -1 on failure.
int correct_on_hyperplane(const HbmSystem& sys, const ContinuationOptions& o, double fixed,
                          const Eigen::VectorXd& tau0, const ContState& pred,
                          ContState& u) {
    const int dim = sys.dim();
    for (int it = 0; it < o.newton.max_iters; ++it) {
        const double omega = get_omega(u, o, fixed);
        const double force = get_force(u, o, fixed);
        Eigen::VectorXd r(dim + 1);
        r.head(dim) = sys.residual(u.z, omega, force);
        r[dim] = tau0.head(dim).dot(u.z - pred.z) + tau0[dim] * (u.lambda - pred.lambda);
        if (!r.allFinite()) return -1;
        if (r.head(dim).norm() <= o.newton.tol * residual_scale(sys, u.z, force) &&
            std::abs(r[dim]) <= 1e-12 + 1e-9 * std::abs(u.lambda))
            return it;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
        m.topLeftCorner(dim, dim) = sys.jacobian_z(u.z, omega);
        m.topRightCorner(dim, 1) = o.param == SweepParam::omega
                                       ? sys.d_residual_d_omega(u.z, omega)
                                       : sys.d_residual_d_force();
        m.row(dim) = tau0.transpose();
        const Eigen::VectorXd du = m.partialPivLu().solve(-r);
        if (!du.allFinite()) return -1;
        u.z += du.head(dim);
        u.lambda += du[dim];
    }
    return -1;
}

BranchPoint to_point(const HbmSystem& sys, const ContState& u, const ContinuationOptions& o,
                     double fixed, const Eigen::VectorXd& tangent, bool with_stability) {
    BranchPoint p;
    p.z = u.z;
    p.omega = get_omega(u, o, fixed);
    p.force = get_force(u, o, fixed);
    p.upsilon = sys.upsilon();
    p.tangent_param = tangent[sys.dim()];
    p.border_det = bordered_det(sys, u, o, fixed, tangent);
    if (with_stability) annotate_stability(sys, p);
    return p;
}

}  // namespace

Branch continue_branch(const HbmSystem& sys, const BranchPoint& seed,
                       const ContinuationOptions& opts) {
    Branch branch;
    branch.param = opts.param;
    branch.upsilon = sys.upsilon();

    const double fixed = opts.param == SweepParam::omega ? seed.force : seed.omega;
    ContState u{seed.z, opts.param == SweepParam::omega ? seed.omega : seed.force};

    // first tangent: bordered with the bare parameter row, oriented by direction
    Eigen::VectorXd e_lambda = Eigen::VectorXd::Zero(sys.dim() + 1);
    e_lambda[sys.dim()] = 1.0;
    Eigen::VectorXd tau = bordered_tangent(sys, u, opts, fixed, e_lambda);
    if (tau[sys.dim()] * opts.direction < 0.0) tau = -tau;

    branch.points.push_back(to_point(sys, u, opts, fixed, tau, opts.compute_stability));

    const ContState u_seed = u;
    double h = opts.h0;
    double traveled = 0.0;

    while (static_cast<int>(branch.points.size()) < opts.max_points) {
        ContState pred{u.z + h * tau.head(sys.dim()), u.lambda + h * tau[sys.dim()]};
        ContState trial = pred;
        const int iters = correct_on_hyperplane(sys, opts, fixed, tau, pred, trial);
        if (iters < 0) {
            h *= 0.5;
            if (h < opts.h_min) {
                branch.step_collapsed = true;
                break;
            }
            continue;
        }

        Eigen::VectorXd tau_new = bordered_tangent(sys, trial, opts, fixed, tau);
        const double along =
            tau_new.head(sys.dim()).dot(trial.z - u.z) + tau_new[sys.dim()] * (trial.lambda - u.lambda);
        if (along < 0.0) tau_new = -tau_new;

        traveled += (trial.z - u.z).norm() + std::abs(trial.lambda - u.lambda);
        u = trial;
        tau = tau_new;
        branch.points.push_back(to_point(sys, u, opts, fixed, tau, opts.compute_stability));

        if (u.lambda < opts.lambda_min || u.lambda > opts.lambda_max) break;

        if (opts.detect_closure && branch.points.size() > 10 && traveled > 10.0 * opts.h0) {
            const double gap =
                std::sqrt((u.z - u_seed.z).squaredNorm() +
                          (u.lambda - u_seed.lambda) * (u.lambda - u_seed.lambda));
            if (gap < h) {
                branch.closed = true;
                break;
            }
        }

        if (iters <= 3)
            h = std::min(h * 1.3, opts.h_max);
        else if (iters >= 8)
            h = std::max(h * 0.6, opts.h_min);
    }
    return branch;
}

namespace {

/// Walks a fraction `frac` of the step from branch point `a` toward `b` and
/// corrects; returns the corrected state and its tangent.
bool refine_step(const HbmSystem& sys, const ContinuationOptions& o, double fixed,
                 const BranchPoint& a, const BranchPoint& b, double frac, ContState& out,
                 Eigen::VectorXd& tau_out) {
    ContState ua{a.z, o.param == SweepParam::omega ? a.omega : a.force};
    ContState ub{b.z, o.param == SweepParam::omega ? b.omega : b.force};
    const double dist = std::sqrt((ub.z - ua.z).squaredNorm() +
                                  (ub.lambda - ua.lambda) * (ub.lambda - ua.lambda));
    Eigen::VectorXd dir(sys.dim() + 1);
    dir.head(sys.dim()) = (ub.z - ua.z) / dist;
    dir[sys.dim()] = (ub.lambda - ua.lambda) / dist;

    Eigen::VectorXd tau;
    try {
        tau = bordered_tangent(sys, ua, o, fixed, dir);
    } catch (const CorrectorFailure&) {
        return false;
    }
    if (tau.dot(dir) < 0.0) tau = -tau;

    ContState pred{ua.z + frac * dist * tau.head(sys.dim()),
                   ua.lambda + frac * dist * tau[sys.dim()]};
    ContState trial = pred;
    if (correct_on_hyperplane(sys, o, fixed, tau, pred, trial) < 0) return false;
    try {
        tau_out = bordered_tangent(sys, trial, o, fixed, tau);
    } catch (const CorrectorFailure&) {
        return false;
    }
    if (tau_out.dot(tau) < 0.0) tau_out = -tau_out;
    out = trial;
    return true;
}

}  // namespace

void detect_bifurcations(const HbmSystem& sys, Branch& branch) {
    if (branch.points.size() < 3) return;
    ContinuationOptions opts;
    opts.param = branch.param;

    std::vector<std::pair<std::size_t, BranchPoint>> inserts;

    for (std::size_t i = 1; i < branch.points.size(); ++i) {
        const BranchPoint& a = branch.points[i - 1];
        const BranchPoint& b = branch.points[i];
        const double fixed = opts.param == SweepParam::omega ? a.force : a.omega;

        const bool fold_bracket = a.tangent_param * b.tangent_param < 0.0;
        const bool det_bracket = a.border_det * b.border_det < 0.0;
        if (!fold_bracket && !det_bracket) continue;

        // bisection on the fraction of the step between a and b
        double lo = 0.0, hi = 1.0;
        ContState mid_state;
        Eigen::VectorXd mid_tau;
        BranchPoint refined = a;
        bool have_mid = false;
        for (int iter = 0; iter < 30 && hi - lo > 1e-4; ++iter) {
            const double frac = 0.5 * (lo + hi);
            if (!refine_step(sys, opts, fixed, a, b, frac, mid_state, mid_tau)) break;
            have_mid = true;
            const double marker =
                fold_bracket ? mid_tau[sys.dim()]
                             : bordered_det(sys, mid_state, opts, fixed, mid_tau);
            const double ref = fold_bracket ? a.tangent_param : a.border_det;
            if (marker * ref > 0.0)
                lo = frac;
            else
                hi = frac;
        }
        if (have_mid) {
            refined = to_point(sys, mid_state, opts, fixed, mid_tau, true);
            refined.bif_tag = fold_bracket ? BifTag::fold : BifTag::branch_point;
            inserts.emplace_back(i, refined);
        } else {
            // refinement failed; tag the nearer existing point
            branch.points[i].bif_tag = fold_bracket ? BifTag::fold : BifTag::branch_point;
        }
    }

    for (auto it = inserts.rbegin(); it != inserts.rend(); ++it)
        branch.points.insert(branch.points.begin() + static_cast<std::ptrdiff_t>(it->first),
                             it->second);
}

BranchPoint switch_branch(const HbmSystem& sys, const BranchPoint& bp, double perturbation) {
    const Eigen::MatrixXd jac = sys.jacobian_z(bp.z, bp.omega);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullV);
    const Eigen::VectorXd null_dir = svd.matrixV().col(sys.dim() - 1);

    const double z_scale = std::max(1.0, bp.z.cwiseAbs().maxCoeff());
    const double accept = 10.0 * perturbation * z_scale;

    for (const double dw_rel : {1e-3, -1e-3, 3e-3, -3e-3, 1e-2, -1e-2}) {
        const double omega = bp.omega * (1.0 + dw_rel);
        Eigen::VectorXd z_main;
        try {
            z_main = newton_correct(sys, bp.z, omega, bp.force).z;
        } catch (const CorrectorFailure&) {
            continue;
        }
        for (const double eps_rel : {perturbation, 10.0 * perturbation, 0.05, 0.2}) {
            for (const double sign : {1.0, -1.0}) {
                try {
                    BranchPoint cand = newton_correct(
                        sys, z_main + sign * eps_rel * z_scale * null_dir, omega, bp.force);
                    if ((cand.z - z_main).cwiseAbs().maxCoeff() > accept) {
                        annotate_stability(sys, cand);
                        return cand;
                    }
                } catch (const CorrectorFailure&) {
                    continue;
                }
            }
        }
    }
    throw CorrectorFailure("branch switching found no bifurcating solution", 0.0, 0);
}

BranchPoint seed_from_samples(const HbmSystem& sys, const Eigen::VectorXd& samples,
                              double omega, double force, const NewtonOptions& opts) {
    if (samples.size() != sys.n_samples())
        throw ConfigError("seed_from_samples expects exactly n_samples() values");
    const Eigen::VectorXd z0 = sys.project(samples);
    BranchPoint p = newton_correct(sys, z0, omega, force, opts);
    annotate_stability(sys, p);
    return p;
}

BranchPoint seed_isola(const HbmSystem& sys, const MechState& state, double theta0,
                       double omega, double force, double f_s, const NewtonOptions& opts) {
    if (!(omega > 0.0)) throw ConfigError("seed_isola requires omega > 0");
    const int ups = sys.upsilon();
    const double period = ups * 2.0 * kPi / omega;

    // advance to the next zero of the carrier phase modulo one response period
    const double cycle = 2.0 * kPi * ups;
    const double theta_star = cycle * std::ceil(theta0 / cycle);
    const double lead = (theta_star - theta0) / omega;

    const int m = sys.n_samples();
    const double sample_dt = period / m;
    if (f_s <= 0.0) f_s = 1024.0 / period;  // 1024 integration steps per period
    const int n_sub = std::max(4, static_cast<int>(std::lround(f_s * sample_dt)));
    const double dt = sample_dt / n_sub;

    auto force_fn = [&](double tau) {
        return force * std::sin(theta0 + omega * (tau - state.t));
    };

    MechState s = state;
    // integrate up to theta_star
    const long lead_steps = static_cast<long>(std::floor(lead / dt));
    for (long i = 0; i < lead_steps; ++i) s = rk4_step(s, force_fn, dt, sys.plant());
    const double rem = (state.t + lead) - s.t;
    if (rem > 1e-15) s = rk4_step(s, force_fn, rem, sys.plant());

    Eigen::VectorXd samples(m);
    for (int i = 0; i < m; ++i) {
        samples[i] = s.x;
        for (int j = 0; j < n_sub; ++j) s = rk4_step(s, force_fn, dt, sys.plant());
    }
    return seed_from_samples(sys, samples, omega, force, opts);
}

}  // namespace pllt
