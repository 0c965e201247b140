#include "vfo/vfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vfo {

std::pair<double, double> accel(const FoldState& s, const ModelParams& p) {
    const double coupling = p.alpha * (s.vr + s.vl);
    const double al =
        coupling - p.beta * (1.0 + s.xl * s.xl) * s.vl - s.xl - 0.5 * p.delta * s.xl;
    const double ar =
        coupling - p.beta * (1.0 + s.xr * s.xr) * s.vr - s.xr + 0.5 * p.delta * s.xr;
    return {al, ar};
}

namespace {

inline FoldState deriv(const FoldState& s, const ModelParams& p) {
    auto [al, ar] = accel(s, p);
    return {s.vl, al, s.vr, ar};
}

inline FoldState axpy(const FoldState& s, double c, const FoldState& d) {
    return {s.xl + c * d.xl, s.vl + c * d.vl, s.xr + c * d.xr, s.vr + c * d.vr};
}

inline bool exceeds_bound(const FoldState& s) {
    return !(std::fabs(s.xl) <= kBlowupBound && std::fabs(s.vl) <= kBlowupBound &&
             std::fabs(s.xr) <= kBlowupBound && std::fabs(s.vr) <= kBlowupBound);
}

}  // namespace

FoldTrajectory integrate_forward(const ModelParams& p, const BoundaryConditions& bc,
                                 std::size_t n_steps, double h) {
    FoldTrajectory traj;
    traj.h = h;
    traj.states.reserve(n_steps + 1);
    FoldState s{bc.cl, 0.0, bc.cr, 0.0};
    traj.states.push_back(s);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const FoldState k1 = deriv(s, p);
        const FoldState k2 = deriv(axpy(s, 0.5 * h, k1), p);
        const FoldState k3 = deriv(axpy(s, 0.5 * h, k2), p);
        const FoldState k4 = deriv(axpy(s, h, k3), p);
        s = {s.xl + h / 6.0 * (k1.xl + 2.0 * k2.xl + 2.0 * k3.xl + k4.xl),
             s.vl + h / 6.0 * (k1.vl + 2.0 * k2.vl + 2.0 * k3.vl + k4.vl),
             s.xr + h / 6.0 * (k1.xr + 2.0 * k2.xr + 2.0 * k3.xr + k4.xr),
             s.vr + h / 6.0 * (k1.vr + 2.0 * k2.vr + 2.0 * k3.vr + k4.vr)};
        if (exceeds_bound(s)) throw BlowupError(i + 1);
        traj.states.push_back(s);
    }
    return traj;
}

GlottalWaveform predict_flow(const FoldTrajectory& traj, const PhysicalConstants& consts) {
    GlottalWaveform w;
    w.kind = FlowKind::predicted;
    w.sample_rate = traj.h > 0.0 ? 1.0 / traj.h : 0.0;
    w.samples.reserve(traj.size());
    for (const FoldState& s : traj.states) {
        const double u = consts.flow_scale * (2.0 * consts.x0 + s.xl + s.xr);
        w.samples.push_back(u > 0.0 ? u : 0.0);  // closed glottis carries no flow
    }
    return w;
}

std::vector<std::pair<double, double>> phase_portrait(const FoldTrajectory& traj,
                                                      FoldSide side) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(traj.size());
    for (const FoldState& s : traj.states) {
        if (side == FoldSide::left)
            pts.emplace_back(s.xl, s.vl);
        else
            pts.emplace_back(s.xr, s.vr);
    }
    return pts;
}

bool closed_orbit(const std::vector<std::pair<double, double>>& pts, double tol_frac) {
    if (pts.size() < 4) return false;
    double mean_x = 0.0;
    for (const auto& [x, v] : pts) mean_x += x;
    mean_x /= static_cast<double>(pts.size());

    std::vector<std::size_t> crossings;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i - 1].first < mean_x && pts[i].first >= mean_x) crossings.push_back(i);
    if (crossings.size() < 3) return false;

    const std::size_t c0 = crossings[crossings.size() - 3];
    const std::size_t c1 = crossings[crossings.size() - 2];
    const std::size_t c2 = crossings[crossings.size() - 1];

    double min_x = pts[c0].first, max_x = min_x;
    double min_v = pts[c0].second, max_v = min_v;
    for (std::size_t i = c0; i < c2; ++i) {
        min_x = std::min(min_x, pts[i].first);
        max_x = std::max(max_x, pts[i].first);
        min_v = std::min(min_v, pts[i].second);
        max_v = std::max(max_v, pts[i].second);
    }
    const double diameter =
        std::sqrt((max_x - min_x) * (max_x - min_x) + (max_v - min_v) * (max_v - min_v));
    if (diameter == 0.0) return false;

    // distance from each point of the final cycle to the previous cycle,
    // treated as a polyline so the sampling density does not bound the result
    auto seg_dist2 = [](const std::pair<double, double>& p,
                        const std::pair<double, double>& a,
                        const std::pair<double, double>& b) {
        const double ex = b.first - a.first, ev = b.second - a.second;
        const double px = p.first - a.first, pv = p.second - a.second;
        const double len2 = ex * ex + ev * ev;
        const double t = len2 > 0.0 ? std::clamp((px * ex + pv * ev) / len2, 0.0, 1.0) : 0.0;
        const double dx = px - t * ex, dv = pv - t * ev;
        return dx * dx + dv * dv;
    };
    for (std::size_t i = c1; i < c2; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = c0; j + 1 <= c1; ++j)
            best = std::min(best, seg_dist2(pts[i], pts[j], pts[j + 1]));
        if (std::sqrt(best) > tol_frac * diameter) return false;
    }
    return true;
}

}  // namespace vfo
