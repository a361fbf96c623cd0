#include "pllt/oscillator.hpp"

#include <cmath>

namespace pllt {

TimeSeries simulate(const MechState& initial, const ForceFn& force, const SimConfig& cfg,
                    const OscillatorParams& p, const std::vector<Observer>& observers) {
    cfg.validate();
    p.validate();

    const double dt = cfg.dt();
    const long n_steps = static_cast<long>(std::llround(cfg.duration * cfg.f_s));

    TimeSeries out;
    out.reserve(static_cast<std::size_t>(n_steps / cfg.decimation) + 2);

    MechState s = initial;
    out.push_back({s.t, s.x, s.v, force(s.t)});

    for (long i = 0; i < n_steps; ++i) {
        s = rk4_step(s, force, dt, p);
        if (std::abs(s.x) > kDivergenceGuard)
            throw IntegrationDivergence("displacement exceeded guard", s.t);

        const Sample sample{s.t, s.x, s.v, force(s.t)};
        for (const auto& obs : observers) obs(sample);
        if ((i + 1) % cfg.decimation == 0) out.push_back(sample);
    }
    return out;
}

}  // namespace pllt
