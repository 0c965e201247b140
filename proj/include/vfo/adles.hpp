#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vfo/glottal.hpp"
#include "vfo/vfmodel.hpp"

namespace vfo {

struct ResidualSeries {
    std::vector<double> values;  // R(t) = u0(t) - u0m(t) per step
    double h = 0.0;
    double energy = 0.0;  // h * sum R^2

    double mean_abs() const;
    double max_abs() const;
};

// Costates of (xl, vl, xr, vr) at each node of the forward grid, produced by
// the backward (adjoint) sweep. Terminal entry is exactly zero. The gradient
// triple is accumulated during the same sweep because it depends on
// intermediate stage values that the node costates alone do not determine.
struct AdjointTrajectory {
    double h = 0.0;
    std::vector<std::array<double, 4>> costates;  // d E / d (xl, vl, xr, vr)_i
    double g_alpha = 0.0;
    double g_beta = 0.0;
    double g_delta = 0.0;
};

struct Gradients {
    double g_alpha = 0.0;
    double g_beta = 0.0;
    double g_delta = 0.0;
};

struct OptimizerConfig {
    double step_size = 0.01;  // delta of the update rule
    std::size_t max_iters = 100;
    double rel_tol = 1e-6;  // relative energy-change stopping threshold
    ModelParams init;       // defaults to the normal-voice averages
    bool backtracking = true;
    bool grow_step = true;       // double the base step after an unimpeded accept
    double align_window_s = 0.005;  // cross-correlation lag search half-window
    // projection box applied after every update
    double alpha_min = 0.0, alpha_max = 2.0;
    double beta_min = 1e-4, beta_max = 2.0;
    double delta_min = -2.0, delta_max = 2.0;
};

struct EstimationResult {
    ModelParams params;
    ResidualSeries residual;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> energy_trace;  // accepted E per iteration
};

class ResidualMismatchError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class DegenerateInputError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// values[i] = u0[i] - u0m[i]; energy by the rectangle rule with step h.
ResidualSeries residual(const GlottalWaveform& u0, const GlottalWaveform& u0m, double h);

// Backward sweep of the exact adjoint of the forward RK4 recursion, forced by
// the residual; costates and the gradient of E come out of one pass.
AdjointTrajectory integrate_adjoint(const FoldTrajectory& traj, const ResidualSeries& res,
                                    const ModelParams& p, const PhysicalConstants& consts);

Gradients gradients(const AdjointTrajectory& adj);

// Objective evaluation used inside estimate(): forward solve, predict flow,
// fit the optimal gain on the measured side, residual energy. Exposed for the
// finite-difference oracle.
struct ObjectiveEval {
    double energy = 0.0;
    double gain = 0.0;  // least-squares scale applied to the measured flow
    FoldTrajectory traj;
    ResidualSeries res;
};
ObjectiveEval eval_objective(const ModelParams& p, const BoundaryConditions& bc,
                             const PhysicalConstants& consts,
                             const std::vector<double>& measured, double h);

// ADLES: iterate forward solve -> residual -> adjoint -> gradient -> update
// with backtracking until the relative energy change drops below rel_tol.
EstimationResult estimate(const GlottalWaveform& u0m, const BoundaryConditions& bc,
                          const PhysicalConstants& consts, const OptimizerConfig& cfg,
                          double h);

}  // namespace vfo
