#include <doctest.h>

#include <cmath>
#include <random>

#include "pllt/harmonics.hpp"
#include "support/analytic.hpp"

using namespace pllt;

TEST_CASE("basis row values") {
    const Eigen::VectorXd q0 = basis_eval(0.0, 2);
    CHECK(q0[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(q0[1] == doctest::Approx(0.0));
    CHECK(q0[2] == doctest::Approx(1.0));
    CHECK(q0[3] == doctest::Approx(0.0));
    CHECK(q0[4] == doctest::Approx(1.0));

    const Eigen::VectorXd q1 = basis_eval(kPi / 2.0, 1);
    CHECK(q1[1] == doctest::Approx(1.0));
    CHECK(q1[2] == doctest::Approx(0.0).epsilon(1e-12));

    const Eigen::VectorXd q2 = basis_eval(kPi, 2);
    CHECK(q2[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q2[2] == doctest::Approx(-1.0));
    CHECK(q2[3] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q2[4] == doctest::Approx(1.0));
}

TEST_CASE("basis recurrence matches direct evaluation up to N=16") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double phi = dist(gen);
        const Eigen::VectorXd q = basis_eval(phi, 16);
        for (int j = 1; j <= 16; ++j) {
            CHECK(q[2 * j - 1] == doctest::Approx(std::sin(j * phi)).epsilon(1e-10));
            CHECK(q[2 * j] == doctest::Approx(std::cos(j * phi)).epsilon(1e-10));
        }
    }
}

TEST_CASE("one LMS step from zero weights") {
    AdaptiveFilter f({1, 1, 1e-4});
    // sample exactly synthesized -> weights unchanged
    f.update(0.0, 0.0);
    CHECK(f.weights().isZero(0.0));

    // one algebraic step: z' = mu * eps * Q with Q = [1/sqrt2, 0, 1] at theta = 0
    const double eps = f.update(1.0, 0.0);
    CHECK(eps == doctest::Approx(1.0));
    CHECK(f.weights()[0] == doctest::Approx(1e-4 / std::sqrt(2.0)));
    CHECK(f.weights()[1] == doctest::Approx(0.0));
    CHECK(f.weights()[2] == doctest::Approx(1e-4));
}

TEST_CASE("amplitude and phase extraction conventions") {
    AdaptiveFilter f({2, 1, 1e-4});
    f.weights() << 0.0, 3.0, 4.0, 0.0, 0.0;
    CHECK(f.amplitude(1) == doctest::Approx(5.0));
    CHECK(f.amplitude(2) == 0.0);

    f.weights() << 0.0, 1.0, 0.0, 0.0, 0.0;
    CHECK(f.phase(1) == doctest::Approx(0.0));  // pure sine
    f.weights() << 0.0, 0.0, 1.0, 0.0, 0.0;
    CHECK(f.phase(1) == doctest::Approx(kPi / 2.0));  // pure cosine
    f.weights() << 0.0, -1.0, 0.0, 0.0, 0.0;
    CHECK(f.phase(1) == doctest::Approx(kPi));  // arctan2(0, -1), in (-pi, pi]

    // degenerate harmonic reports undefined phase instead of 0
    CHECK_THROWS_AS(f.phase(2), UndefinedPhase);
    CHECK_THROWS_AS(f.estimate(2), UndefinedPhase);
    CHECK(!f.phase_defined(2));
}

TEST_CASE("pure-tone recovery to 1e-5 after 200 carrier periods") {
    // x(t) = 0.7 sin(w t + 0.3), constant w, N=3, upsilon=1, mu=1e-4, f_s=200
    const double w = 1.0, fs = 200.0, dt = 1.0 / fs;
    AdaptiveFilter f({3, 1, 1e-4});
    const long n = static_cast<long>(std::llround(200.0 * 2.0 * kPi / w * fs));
    for (long i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) * dt;
        f.update(0.7 * std::sin(w * t + 0.3), w * t);
    }
    CHECK(std::abs(f.amplitude(1) - 0.7) < 1e-5);
    CHECK(std::abs(f.phase(1) - 0.3) < 1e-5);
}

TEST_CASE("span recovery property: multi-harmonic inputs converge to the generators") {
    // inputs exactly in the span of the basis at constant frequency; several
    // step sizes below the bound
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> amp_dist(0.2, 1.5);
    std::uniform_real_distribution<double> ph_dist(-3.0, 3.0);

    for (const double mu : {3e-5, 1e-4, 3e-4}) {
        const int n_h = 4;
        const double w = 0.8, fs = 200.0, dt = 1.0 / fs;
        std::vector<double> amps, phs;
        for (int k = 0; k < n_h; ++k) {
            amps.push_back(amp_dist(gen));
            phs.push_back(ph_dist(gen));
        }
        auto signal = [&](double t) {
            double x = 0.0;
            for (int k = 1; k <= n_h; ++k)
                x += amps[static_cast<std::size_t>(k - 1)] *
                     std::sin(k * w * t + phs[static_cast<std::size_t>(k - 1)]);
            return x;
        };
        AdaptiveFilter f({n_h, 1, mu});
        // settle 30 mean time constants (2/mu samples each)
        const long n = static_cast<long>(30.0 * 2.0 / mu);
        double eps_tail = 0.0;
        for (long i = 1; i <= n; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double eps = f.update(signal(t), w * t);
            if (i > n - 100) eps_tail = std::max(eps_tail, std::abs(eps));
        }
        for (int k = 1; k <= n_h; ++k) {
            CHECK(std::abs(f.amplitude(k) - amps[static_cast<std::size_t>(k - 1)]) < 1e-5);
            CHECK(std::abs(wrap_to_pi(f.phase(k) - phs[static_cast<std::size_t>(k - 1)])) <
                  1e-5);
        }
        CHECK(eps_tail < 1e-6);  // LMS error converges to zero on in-span input
    }
}

TEST_CASE("consistency: converged weights reconstruct the periodic input") {
    const double w = 1.3, fs = 200.0, dt = 1.0 / fs;
    AdaptiveFilter f({3, 1, 2e-4});
    auto signal = [&](double t) {
        return 0.9 * std::sin(w * t + 0.2) + 0.25 * std::sin(3.0 * w * t - 1.1);
    };
    const long n = static_cast<long>(40.0 * 2.0 / 2e-4);
    for (long i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) * dt;
        f.update(signal(t), w * t);
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double err = f.synthesize(w * t) - signal(t);
        num += err * err;
        den += signal(t) * signal(t);
    }
    CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("mu = 1e-4 is stable at both paper sampling rates") {
    for (const double fs : {200.0, 1000.0}) {
        const double w = 1.0, dt = 1.0 / fs;
        AdaptiveFilter f({9, 1, 1e-4});
        const long n = static_cast<long>(std::llround(500.0 * 2.0 * kPi / w * fs));
        for (long i = 1; i <= n; ++i) {
            const double t = static_cast<double>(i) * dt;
            f.update(std::sin(w * t + 0.5), w * t);
        }
        CHECK(f.weights().allFinite());
        CHECK(std::abs(f.amplitude(1) - 1.0) < 1e-4);
    }
}

TEST_CASE("step sizes beyond the validation bound are rejected") {
    CHECK_THROWS_AS((FilterConfig{9, 1, 0.5}.validate()), ConfigError);
    CHECK_THROWS_AS((FilterConfig{9, 1, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((FilterConfig{9, 1, -1e-4}.validate()), ConfigError);
    CHECK_NOTHROW((FilterConfig{9, 1, 1e-4}.validate()));
}

TEST_CASE("phase lag of response vs force, with subharmonic bookkeeping") {
    // x = sin(w t - pi/2) against f = sin(w t): lag -pi/2
    const double w = 1.0, fs = 200.0, dt = 1.0 / fs;
    {
        AdaptiveFilter resp({3, 1, 1e-3});
        AdaptiveFilter force({3, 1, 1e-3});
        const long n = static_cast<long>(100.0 * 2.0 / 1e-3);
        for (long i = 1; i <= n; ++i) {
            const double t = static_cast<double>(i) * dt;
            resp.update(std::sin(w * t - kPi / 2.0), w * t);
            force.update(std::sin(w * t), w * t);
        }
        CHECK(phase_lag(resp, force, 1) == doctest::Approx(-kPi / 2.0).epsilon(1e-6));
    }
    {
        // forcing sin(3 W t) on an upsilon=3 basis occupies the kappa=3 line;
        // the response subharmonic sin(W t - pi/2) sits on kappa=1
        const double W = 1.0;
        AdaptiveFilter resp({4, 3, 1e-3});
        AdaptiveFilter force({4, 3, 1e-3});
        const long n = static_cast<long>(100.0 * 2.0 / 1e-3);
        for (long i = 1; i <= n; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double theta = 3.0 * W * t;  // carrier phase (the VCO's theta)
            resp.update(std::sin(W * t - kPi / 2.0), theta);
            force.update(std::sin(3.0 * W * t), theta);
        }
        CHECK(phase_lag(resp, force, 1) == doctest::Approx(-kPi / 2.0).epsilon(1e-6));
    }
}

TEST_CASE("unwrapped stream never jumps by more than pi") {
    PhaseUnwrapper un;
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> step(-2.5, 2.5);
    double truth = 0.0;
    double prev = un.update(wrap_to_pi(truth));
    for (int i = 0; i < 3000; ++i) {
        truth += step(gen);
        const double u = un.update(wrap_to_pi(truth));
        CHECK(std::abs(u - prev) <= kPi + 1e-12);
        CHECK(wrap_to_pi(u - truth) == doctest::Approx(0.0).epsilon(1e-9));
        prev = u;
    }
}

TEST_CASE("frequency-modulated carrier is tracked through the accumulated phase") {
    // linear chirp, 1% frequency change per 100 periods; the basis phase is
    // accumulated per sample exactly like the VCO does
    const double fs = 200.0, dt = 1.0 / fs;
    const double w0 = 1.0;
    const double rate = 0.01 * w0 / (100.0 * 2.0 * kPi / w0);  // rad/s^2
    AdaptiveFilter f({3, 1, 1e-3});

    double theta = 0.0;
    double max_phase_err = 0.0, max_amp_err = 0.0;
    const long n = static_cast<long>(std::llround(500.0 * 2.0 * kPi / w0 * fs));
    const long settled = static_cast<long>(15.0 * 2.0 / 1e-3);
    for (long i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double w = w0 + rate * t;
        theta += w * dt;  // per-sample accumulation (VCO style)
        const double true_phase = w0 * t + 0.5 * rate * t * t;  // exact integral
        f.update(0.7 * std::sin(true_phase + 0.3), theta);
        if (i > settled) {
            max_phase_err = std::max(max_phase_err, std::abs(f.phase(1) - 0.3));
            max_amp_err = std::max(max_amp_err, std::abs(f.amplitude(1) - 0.7));
        }
    }
    CHECK(max_phase_err < 0.01);
    CHECK(max_amp_err < 0.01);
}
