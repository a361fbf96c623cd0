#pragma once

// Closed-form oracles used by the test suites. These are independent of the
// library implementation: plain textbook formulas for the linear plant plus
// generic signal measurements on raw trajectories.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

/// Steady-state amplitude of m x'' + c x' + k x = F sin(w t).
inline double linear_frf_amplitude(double m, double c, double k, double F, double w) {
    const double a = k - m * w * w;
    return F / std::hypot(a, c * w);
}

/// Steady-state phase of the displacement relative to the forcing, in (-pi, 0).
inline double linear_frf_phase(double m, double c, double k, double w) {
    return -std::atan2(c * w, k - m * w * w);
}

/// Free response of the underdamped linear oscillator from (x0, v0).
inline double linear_free_response(double m, double c, double k, double x0, double v0,
                                   double t) {
    const double alpha = c / (2.0 * m);
    const double wd = std::sqrt(k / m - alpha * alpha);
    return std::exp(-alpha * t) *
           (x0 * std::cos(wd * t) + (v0 + alpha * x0) / wd * std::sin(wd * t));
}

/// First-order hardening backbone: resonance frequency at response amplitude X.
inline double duffing_backbone_omega(double m, double k, double k_nl, double X) {
    return std::sqrt(k / m) * (1.0 + 3.0 * k_nl * X * X / (8.0 * k));
}

/// (max - min)/2 of x over the samples with t >= t_from.
template <typename Series>
double peak_amplitude(const Series& series, double t_from) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& s : series) {
        if (s.t < t_from) continue;
        if (first) {
            lo = hi = s.x;
            first = false;
        } else {
            lo = std::min(lo, s.x);
            hi = std::max(hi, s.x);
        }
    }
    return 0.5 * (hi - lo);
}

/// Single-frequency Fourier projection of x over the samples with t >= t_from:
/// returns (amplitude, phase) of A sin(w t + phi).
template <typename Series>
std::pair<double, double> project_tone(const Series& series, double w, double t_from) {
    double as = 0.0, ac = 0.0;
    long n = 0;
    for (const auto& s : series) {
        if (s.t < t_from) continue;
        as += s.x * std::sin(w * s.t);
        ac += s.x * std::cos(w * s.t);
        ++n;
    }
    const double sc = 2.0 / static_cast<double>(n);
    return {std::hypot(as * sc, ac * sc), std::atan2(ac, as)};
}

}  // namespace oracle
