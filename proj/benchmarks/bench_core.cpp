#include <benchmark/benchmark.h>

#include <cmath>

#include "pllt/closed_loop.hpp"
#include "pllt/harmonics.hpp"
#include "pllt/hbm.hpp"
#include "pllt/oscillator.hpp"

namespace {

const pllt::OscillatorParams kPlant{1.0, 0.001, 1.0, 1.0};

void BM_Rk4Step(benchmark::State& state) {
    pllt::MechState s{0.1, 0.0, 0.0};
    auto force = [](double t) { return 1e-4 * std::sin(t); };
    for (auto _ : state) {
        s = pllt::rk4_step(s, force, 0.005, kPlant);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Rk4Step);

void BM_BasisEval(benchmark::State& state) {
    Eigen::VectorXd q;
    double phi = 0.0;
    for (auto _ : state) {
        pllt::basis_eval(phi += 0.01, 9, q);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_BasisEval);

void BM_LmsUpdate(benchmark::State& state) {
    pllt::AdaptiveFilter filter({9, 1, 1e-4});
    double theta = 0.0;
    for (auto _ : state) {
        theta += 0.005;
        benchmark::DoNotOptimize(filter.update(0.7 * std::sin(theta + 0.3), theta));
    }
}
BENCHMARK(BM_LmsUpdate);

void BM_ClosedLoopStep(benchmark::State& state) {
    pllt::RigConfig cfg;
    cfg.plant = kPlant;
    cfg.f_s = 200.0;
    cfg.filter = {9, 1, 1e-4};
    cfg.gains = {1.0, 5e-3};
    cfg.omega_o = 1.0;
    cfg.phase_ref = -pllt::kPi / 2.0;
    cfg.force_amp = 1e-4;
    pllt::ClosedLoopRig rig(cfg);
    for (auto _ : state) rig.step();
}
BENCHMARK(BM_ClosedLoopStep);

void BM_HbmResidual(benchmark::State& state) {
    pllt::HbmSystem sys(kPlant, 14, 1);
    const Eigen::VectorXd z = sys.linear_guess(1.0, 1e-4);
    for (auto _ : state) benchmark::DoNotOptimize(sys.residual(z, 1.0, 1e-4));
}
BENCHMARK(BM_HbmResidual);

void BM_HbmJacobian(benchmark::State& state) {
    pllt::HbmSystem sys(kPlant, 14, 1);
    const Eigen::VectorXd z = sys.linear_guess(1.0, 1e-4);
    for (auto _ : state) benchmark::DoNotOptimize(sys.jacobian_z(z, 1.0));
}
BENCHMARK(BM_HbmJacobian);

void BM_Floquet(benchmark::State& state) {
    pllt::HbmSystem sys(kPlant, 14, 1);
    const pllt::BranchPoint p = pllt::newton_correct(sys, sys.linear_guess(0.95, 1e-4),
                                                     0.95, 1e-4);
    for (auto _ : state)
        benchmark::DoNotOptimize(pllt::floquet_stability(sys, p.z, p.omega));
}
BENCHMARK(BM_Floquet);

}  // namespace

BENCHMARK_MAIN();
