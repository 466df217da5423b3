#include "netdyn/synth.hpp"

#include <cmath>
#include <random>

namespace netdyn {

TimeSeries synth_sine(std::size_t n, double period_samples, double amplitude,
                      double phase, double tau)
{
    TimeSeries out;
    out.tau = tau;
    out.values.resize(n);
    const double omega = 2.0 * M_PI / period_samples;
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = amplitude * std::sin(omega * double(i) + phase);
    return out;
}

TimeSeries synth_uniform_noise(std::size_t n, unsigned seed, double lo,
                               double hi, double tau)
{
    TimeSeries out;
    out.tau = tau;
    out.values.resize(n);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = dist(rng);
    return out;
}

namespace {

struct LorenzState {
    double x, y, z;
};

LorenzState derivative(const LorenzState& s, const LorenzSettings& p)
{
    return {p.sigma * (s.y - s.x),
            s.x * (p.rho - s.z) - s.y,
            s.x * s.y - p.beta * s.z};
}

void rk4_step(LorenzState& s, const LorenzSettings& p)
{
    const double h = p.dt;
    const LorenzState k1 = derivative(s, p);
    const LorenzState s2{s.x + h / 2 * k1.x, s.y + h / 2 * k1.y, s.z + h / 2 * k1.z};
    const LorenzState k2 = derivative(s2, p);
    const LorenzState s3{s.x + h / 2 * k2.x, s.y + h / 2 * k2.y, s.z + h / 2 * k2.z};
    const LorenzState k3 = derivative(s3, p);
    const LorenzState s4{s.x + h * k3.x, s.y + h * k3.y, s.z + h * k3.z};
    const LorenzState k4 = derivative(s4, p);
    s.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    s.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    s.z += h / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
}

} // namespace

TimeSeries synth_lorenz_x(std::size_t n, const LorenzSettings& settings)
{
    TimeSeries out;
    out.tau = settings.dt * double(settings.stride);
    out.values.reserve(n);

    LorenzState state{1.0, 1.0, 1.0};
    for (std::size_t i = 0; i < settings.burn_in; ++i)
        rk4_step(state, settings);
    for (std::size_t i = 0; i < n; ++i) {
        out.values.push_back(state.x);
        for (std::size_t k = 0; k < settings.stride; ++k)
            rk4_step(state, settings);
    }
    return out;
}

} // namespace netdyn
