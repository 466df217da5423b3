#ifndef NETDYN_SYNTH_HPP
#define NETDYN_SYNTH_HPP

#include <cstddef>

#include "netdyn/series.hpp"

namespace netdyn {

/// s(n) = amplitude * sin(2*pi*n / period_samples + phase).
TimeSeries synth_sine(std::size_t n, double period_samples,
                      double amplitude = 1.0, double phase = 0.0,
                      double tau = 1.0);

/// i.i.d. uniform values on [lo, hi), mt19937-driven, reproducible by seed.
TimeSeries synth_uniform_noise(std::size_t n, unsigned seed, double lo = 0.0,
                               double hi = 1.0, double tau = 1.0);

struct LorenzSettings {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double dt = 0.01;         ///< fixed RK4 step
    std::size_t stride = 10;  ///< integration steps per output sample
    std::size_t burn_in = 10000; ///< steps discarded to land on the attractor
};

/// x-component of the Lorenz system integrated with fixed-step fourth-order
/// Runge-Kutta from (1, 1, 1). tau of the result is dt * stride.
TimeSeries synth_lorenz_x(std::size_t n, const LorenzSettings& settings = {});

} // namespace netdyn

#endif // NETDYN_SYNTH_HPP
