#pragma once

#include <Eigen/Core>
#include <cmath>

#include "pllt/errors.hpp"

namespace pllt {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
[[nodiscard]] inline double wrap_to_pi(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

/// Amplitudes below this are treated as degenerate: their phase is undefined
/// rather than silently reported as arctan2(0,0)=0.
inline constexpr double kDegenerateAmplitude = 1e-12;

struct FilterConfig {
    int n_harmonics = 9;  ///< harmonic count N
    int upsilon = 1;      ///< subharmonic divisor
    double mu = 1e-4;     ///< LMS step size

    [[nodiscard]] int weight_count() const { return 2 * n_harmonics + 1; }

    void validate() const {
        if (n_harmonics < 1) throw ConfigError("filter.n must be >= 1");
        if (upsilon < 1) throw ConfigError("filter.upsilon must be >= 1");
        const double bound = 2.0 / (n_harmonics + 0.5);
        if (!(mu > 0.0) || !(mu < bound))
            throw ConfigError("filter.mu must lie in (0, " + std::to_string(bound) + ")");
    }
};

/// Per-harmonic amplitude and phase extracted from converged weights.
struct HarmonicEstimate {
    int kappa;
    double amplitude;
    double phase;  ///< in (-pi, pi]
};

/// Fills q with [1/sqrt(2), sin(phi), cos(phi), ..., sin(N phi), cos(N phi)].
/// phi is the already-divided carrier phase theta/upsilon.
void basis_eval(double phi, int n_harmonics, Eigen::VectorXd& q);

[[nodiscard]] Eigen::VectorXd basis_eval(double phi, int n_harmonics);

/// Online Fourier decomposition of a streaming signal on harmonics of a
/// time-varying carrier. Weights approximate the Fourier coefficients
/// [c0, s1, c1, ..., sN, cN] of the signal on the basis above.
class AdaptiveFilter {
public:
    explicit AdaptiveFilter(FilterConfig cfg)
        : cfg_(cfg),
          weights_(Eigen::VectorXd::Zero(cfg.weight_count())),
          q_(Eigen::VectorXd::Zero(cfg.weight_count())) {
        cfg.validate();
    }

    /// One LMS step at carrier phase theta (the VCO's accumulated phase).
    /// Returns the synthesis error epsilon. Throws FilterDivergence if the
    /// update produces a non-finite error.
    double update(double sample, double theta) {
        phi_ = theta / cfg_.upsilon;
        basis_eval(phi_, cfg_.n_harmonics, q_);
        const double eps = sample - q_.dot(weights_);
        if (!std::isfinite(eps)) throw FilterDivergence("adaptive filter diverged", phi_);
        weights_.noalias() += cfg_.mu * eps * q_;
        return eps;
    }

    /// A_kappa = sqrt(c^2 + s^2) of harmonic kappa (1 <= kappa <= N).
    [[nodiscard]] double amplitude(int kappa) const {
        check_range(kappa);
        const double s = weights_[2 * kappa - 1];
        const double c = weights_[2 * kappa];
        return std::hypot(s, c);
    }

    /// Phase of A sin(kappa phi + Phi), i.e. arctan2(c, s), in (-pi, pi].
    /// Throws UndefinedPhase when the harmonic is degenerate.
    [[nodiscard]] double phase(int kappa) const {
        check_range(kappa);
        const double s = weights_[2 * kappa - 1];
        const double c = weights_[2 * kappa];
        if (std::hypot(s, c) < kDegenerateAmplitude)
            throw UndefinedPhase("harmonic " + std::to_string(kappa) +
                                 " has degenerate amplitude");
        return std::atan2(c, s);
    }

    [[nodiscard]] bool phase_defined(int kappa) const {
        check_range(kappa);
        return std::hypot(weights_[2 * kappa - 1], weights_[2 * kappa]) >= kDegenerateAmplitude;
    }

    [[nodiscard]] HarmonicEstimate estimate(int kappa) const {
        return {kappa, amplitude(kappa), phase(kappa)};
    }

    /// Q(phi) . weights, the synthesized signal value at basis phase phi.
    [[nodiscard]] double synthesize(double phi) const {
        Eigen::VectorXd q(cfg_.weight_count());
        basis_eval(phi, cfg_.n_harmonics, q);
        return q.dot(weights_);
    }

    void reset() { weights_.setZero(); phi_ = 0.0; }

    [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
    [[nodiscard]] Eigen::VectorXd& weights() { return weights_; }
    [[nodiscard]] double basis_phase() const { return phi_; }
    [[nodiscard]] const FilterConfig& config() const { return cfg_; }

private:
    void check_range(int kappa) const {
        if (kappa < 1 || kappa > cfg_.n_harmonics)
            throw ConfigError("harmonic index " + std::to_string(kappa) + " out of range");
    }

    FilterConfig cfg_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd q_;
    double phi_ = 0.0;
};

/// Wrapped phase lag of the kappa-th response harmonic relative to the
/// fundamental forcing component on the same carrier:
/// Phi_{kappa,upsilon} = Phi^x_kappa - Phi^f_upsilon, in (-pi, pi].
/// Both filters must share the same carrier phase source.
[[nodiscard]] double phase_lag(const AdaptiveFilter& response, const AdaptiveFilter& force,
                               int kappa);

/// Builds a continuous (never wrapped) phase stream from wrapped samples by
/// adding the multiple of 2*pi that minimizes the change between consecutive
/// samples. The controller integrates this stream, so wraps must not reach it.
class PhaseUnwrapper {
public:
    double update(double wrapped) {
        if (!primed_) {
            value_ = wrapped;
            primed_ = true;
            return value_;
        }
        value_ += wrap_to_pi(wrapped - value_);
        return value_;
    }

    [[nodiscard]] double value() const { return value_; }
    [[nodiscard]] bool primed() const { return primed_; }
    void reset() { primed_ = false; value_ = 0.0; }

private:
    double value_ = 0.0;
    bool primed_ = false;
};

}  // namespace pllt
