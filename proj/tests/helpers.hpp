#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vfo/adles.hpp"
#include "vfo/vfmodel.hpp"

namespace testutil {

inline double urand(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double urand(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * urand(gen);
}

// Mono PCM16 WAV writer for test fixtures.
inline void write_wav16(const std::string& path, const std::vector<double>& samples,
                        std::uint32_t rate) {
    std::ofstream f(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
    f.write("RIFF", 4);
    u32(36 + data_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(1);  // PCM
    u16(1);  // mono
    u32(rate);
    u32(rate * 2);
    u16(2);
    u16(16);
    f.write("data", 4);
    u32(data_size);
    for (double s : samples) {
        const double c = std::max(-1.0, std::min(1.0, s));
        const std::int16_t v = static_cast<std::int16_t>(std::lround(c * 32767.0));
        f.write(reinterpret_cast<const char*>(&v), 2);
    }
}

inline std::vector<double> sine(double freq, double rate, std::size_t n,
                                double amp = 1.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
    return x;
}

// Model-generated measured flow at given parameters, unit peak.
inline vfo::GlottalWaveform synth_measured(const vfo::ModelParams& p, std::size_t n_steps,
                                           double h, double sample_rate = 8000.0) {
    const vfo::FoldTrajectory traj =
        vfo::integrate_forward(p, vfo::BoundaryConditions{}, n_steps, h);
    vfo::GlottalWaveform u = vfo::predict_flow(traj, vfo::PhysicalConstants{});
    vfo::normalize_peak(u.samples);
    u.kind = vfo::FlowKind::measured;
    u.sample_rate = sample_rate;
    return u;
}

// Central finite difference of the estimation objective.
inline vfo::Gradients fd_gradient(const vfo::ModelParams& p,
                                  const vfo::BoundaryConditions& bc,
                                  const vfo::PhysicalConstants& consts,
                                  const std::vector<double>& measured, double h) {
    auto energy_at = [&](vfo::ModelParams q) {
        return vfo::eval_objective(q, bc, consts, measured, h).energy;
    };
    vfo::Gradients g;
    double* comps[3] = {&g.g_alpha, &g.g_beta, &g.g_delta};
    const double vals[3] = {p.alpha, p.beta, p.delta};
    for (int j = 0; j < 3; ++j) {
        const double eps = 1e-5 * std::max(1.0, std::fabs(vals[j]));
        vfo::ModelParams hi = p, lo = p;
        double* fields_hi[3] = {&hi.alpha, &hi.beta, &hi.delta};
        double* fields_lo[3] = {&lo.alpha, &lo.beta, &lo.delta};
        *fields_hi[j] += eps;
        *fields_lo[j] -= eps;
        *comps[j] = (energy_at(hi) - energy_at(lo)) / (2.0 * eps);
    }
    return g;
}

inline constexpr double kModelStep = 2.0 * std::numbers::pi * 150.0 / 8000.0;

}  // namespace testutil
