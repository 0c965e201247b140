#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfo/glottal.hpp"

namespace vfo {

// Parameters of the asymmetric 1-mass body-cover model.
struct ModelParams {
    double alpha = 0.25;  // supra/sub-glottal pressure coupling
    double beta = 0.32;   // aggregate mass/spring/damping
    double delta = 0.0;   // left/right asymmetry
};

struct PhysicalConstants {
    double x0 = 0.1;          // rest half-opening
    double flow_scale = 1.0;  // air particle velocity x fold length, absorbed
};

struct BoundaryConditions {
    double cl = 0.1;  // xl(0)
    double cr = 0.1;  // xr(0); velocities start at zero
};

struct FoldState {
    double xl = 0.0;
    double vl = 0.0;
    double xr = 0.0;
    double vr = 0.0;
};

struct FoldTrajectory {
    double h = 0.0;  // uniform model-time step
    std::vector<FoldState> states;

    std::size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }
    double time_at(std::size_t i) const { return h * static_cast<double>(i); }
};

// Thrown when a state component exceeds the blow-up bound during integration.
class BlowupError : public std::runtime_error {
  public:
    explicit BlowupError(std::size_t step)
        : std::runtime_error("integration diverged at step " + std::to_string(step)),
          step_(step) {}
    std::size_t step() const { return step_; }

  private:
    std::size_t step_;
};

inline constexpr double kBlowupBound = 1e6;

// Fold accelerations (left, right) at the given state.
std::pair<double, double> accel(const FoldState& s, const ModelParams& p);

// Classical fixed-step RK4 from (cl, 0, cr, 0); returns n_steps + 1 states.
FoldTrajectory integrate_forward(const ModelParams& p, const BoundaryConditions& bc,
                                 std::size_t n_steps, double h);

// u0 = flow_scale * (2 x0 + xl + xr), clamped below at zero (closed glottis).
// sample_rate on the returned waveform is in model-time steps (1/h).
GlottalWaveform predict_flow(const FoldTrajectory& traj, const PhysicalConstants& consts);

enum class FoldSide { left, right };

// (x, xdot) pairs in time order for one fold.
std::vector<std::pair<double, double>> phase_portrait(const FoldTrajectory& traj,
                                                      FoldSide side);

// Closed-curve test on a phase portrait tail: every point of the final cycle
// must lie within tol_frac of the orbit diameter of some point of the
// previous cycle. Cycles are delimited by upward mean-crossings of x.
// Returns false when fewer than two full cycles are present.
bool closed_orbit(const std::vector<std::pair<double, double>>& pts, double tol_frac);

}  // namespace vfo
