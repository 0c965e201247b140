#include "vfo/adles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vfo {

double ResidualSeries::mean_abs() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += std::fabs(v);
    return s / static_cast<double>(values.size());
}

double ResidualSeries::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

ResidualSeries residual(const GlottalWaveform& u0, const GlottalWaveform& u0m, double h) {
    if (u0.samples.size() != u0m.samples.size())
        throw ResidualMismatchError("residual: waveform lengths differ");
    ResidualSeries r;
    r.h = h;
    r.values.resize(u0.samples.size());
    double e = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        r.values[i] = u0.samples[i] - u0m.samples[i];
        e += r.values[i] * r.values[i];
    }
    r.energy = h * e;
    return r;
}

namespace {

struct Vec4 {
    double x[4] = {0, 0, 0, 0};
    Vec4 operator+(const Vec4& o) const {
        return {{x[0] + o.x[0], x[1] + o.x[1], x[2] + o.x[2], x[3] + o.x[3]}};
    }
    Vec4 scaled(double c) const { return {{c * x[0], c * x[1], c * x[2], c * x[3]}}; }
};

inline Vec4 f_rhs(const Vec4& y, const ModelParams& p) {
    FoldState s{y.x[0], y.x[1], y.x[2], y.x[3]};
    auto [al, ar] = accel(s, p);
    return {{y.x[1], al, y.x[3], ar}};
}

// J(y)^T w for the first-order system (xl, vl, xr, vr).
inline Vec4 jacT(const Vec4& y, const Vec4& w, const ModelParams& p) {
    const double xl = y.x[0], vl = y.x[1], xr = y.x[2], vr = y.x[3];
    const double dal_dxl = -2.0 * p.beta * xl * vl - 1.0 - 0.5 * p.delta;
    const double dal_dvl = p.alpha - p.beta * (1.0 + xl * xl);
    const double dar_dxr = -2.0 * p.beta * xr * vr - 1.0 + 0.5 * p.delta;
    const double dar_dvr = p.alpha - p.beta * (1.0 + xr * xr);
    Vec4 out;
    out.x[0] = w.x[1] * dal_dxl;
    out.x[1] = w.x[0] + w.x[1] * dal_dvl + w.x[3] * p.alpha;
    out.x[2] = w.x[3] * dar_dxr;
    out.x[3] = w.x[2] + w.x[3] * dar_dvr + w.x[1] * p.alpha;
    return out;
}

// (df/dtheta)^T w accumulated into (g_alpha, g_beta, g_delta).
inline void fthetaT(const Vec4& y, const Vec4& w, double* g) {
    const double xl = y.x[0], vl = y.x[1], xr = y.x[2], vr = y.x[3];
    const double vsum = vl + vr;
    g[0] += (w.x[1] + w.x[3]) * vsum;
    g[1] += -w.x[1] * (1.0 + xl * xl) * vl - w.x[3] * (1.0 + xr * xr) * vr;
    g[2] += -0.5 * w.x[1] * xl + 0.5 * w.x[3] * xr;
}

}  // namespace

AdjointTrajectory integrate_adjoint(const FoldTrajectory& traj, const ResidualSeries& res,
                                    const ModelParams& p, const PhysicalConstants& consts) {
    const std::size_t n = traj.size();
    if (res.values.size() != n)
        throw ResidualMismatchError("integrate_adjoint: grid mismatch");
    AdjointTrajectory adj;
    adj.h = traj.h;
    adj.costates.assign(n, {0.0, 0.0, 0.0, 0.0});
    if (n < 2) return adj;
    const double h = traj.h;

    // direct term dE/d(xl,xr)_i through the clamped flow
    auto direct = [&](std::size_t i) -> double {
        const FoldState& s = traj.states[i];
        const double uraw = consts.flow_scale * (2.0 * consts.x0 + s.xl + s.xr);
        if (uraw <= 0.0) return 0.0;  // closed glottis: flow insensitive to x
        return 2.0 * h * res.values[i] * consts.flow_scale;
    };

    double g[3] = {0.0, 0.0, 0.0};
    Vec4 w;  // running costate, including the direct term of the node to the right
    {
        const double d = direct(n - 1);
        w.x[0] += d;
        w.x[2] += d;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        const FoldState& si = traj.states[i];
        const Vec4 y{{si.xl, si.vl, si.xr, si.vr}};
        const Vec4 k1 = f_rhs(y, p);
        const Vec4 y2 = y + k1.scaled(0.5 * h);
        const Vec4 k2 = f_rhs(y2, p);
        const Vec4 y3 = y + k2.scaled(0.5 * h);
        const Vec4 k3 = f_rhs(y3, p);
        const Vec4 y4 = y + k3.scaled(h);

        Vec4 ybar = w;
        Vec4 k1b = w.scaled(h / 6.0);
        Vec4 k2b = w.scaled(h / 3.0);
        Vec4 k3b = w.scaled(h / 3.0);
        const Vec4 k4b = w.scaled(h / 6.0);

        const Vec4 y4b = jacT(y4, k4b, p);
        fthetaT(y4, k4b, g);
        ybar = ybar + y4b;
        k3b = k3b + y4b.scaled(h);

        const Vec4 y3b = jacT(y3, k3b, p);
        fthetaT(y3, k3b, g);
        ybar = ybar + y3b;
        k2b = k2b + y3b.scaled(0.5 * h);

        const Vec4 y2b = jacT(y2, k2b, p);
        fthetaT(y2, k2b, g);
        ybar = ybar + y2b;
        k1b = k1b + y2b.scaled(0.5 * h);

        ybar = ybar + jacT(y, k1b, p);
        fthetaT(y, k1b, g);

        adj.costates[i] = {ybar.x[0], ybar.x[1], ybar.x[2], ybar.x[3]};
        const double d = direct(i);
        w = ybar;
        w.x[0] += d;
        w.x[2] += d;
    }
    adj.g_alpha = g[0];
    adj.g_beta = g[1];
    adj.g_delta = g[2];
    return adj;
}

Gradients gradients(const AdjointTrajectory& adj) {
    return {adj.g_alpha, adj.g_beta, adj.g_delta};
}

ObjectiveEval eval_objective(const ModelParams& p, const BoundaryConditions& bc,
                             const PhysicalConstants& consts,
                             const std::vector<double>& measured, double h) {
    if (measured.size() < 2) throw DegenerateInputError("measured waveform too short");
    ObjectiveEval out;
    out.traj = integrate_forward(p, bc, measured.size() - 1, h);
    GlottalWaveform u0 = predict_flow(out.traj, consts);

    // least-squares gain on the measured side; absolute calibration is not
    // identifiable from consumer microphones, only waveform shape is
    double um = 0.0, mm = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        um += u0.samples[i] * measured[i];
        mm += measured[i] * measured[i];
    }
    if (mm <= 0.0) throw DegenerateInputError("measured waveform is identically zero");
    out.gain = um / mm;

    GlottalWaveform scaled;
    scaled.kind = FlowKind::measured;
    scaled.sample_rate = u0.sample_rate;
    scaled.samples.resize(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i)
        scaled.samples[i] = out.gain * measured[i];
    out.res = residual(u0, scaled, h);
    out.energy = out.res.energy;
    return out;
}

namespace {

ModelParams project(ModelParams p, const OptimizerConfig& cfg) {
    p.alpha = std::clamp(p.alpha, cfg.alpha_min, cfg.alpha_max);
    p.beta = std::clamp(p.beta, cfg.beta_min, cfg.beta_max);
    p.delta = std::clamp(p.delta, cfg.delta_min, cfg.delta_max);
    return p;
}

// Lag (in samples) maximizing cross-correlation between the predicted flow at
// the initial parameters and the measured series; measured is then shifted by
// that lag with zero fill. Inverse filtering introduces arbitrary delay.
std::vector<double> align_measured(const std::vector<double>& measured,
                                   const std::vector<double>& predicted, long max_lag) {
    if (max_lag <= 0) return measured;
    const long n = static_cast<long>(measured.size());
    long best_lag = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (long lag = -max_lag; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (long i = 0; i < n; ++i) {
            const long j = i + lag;
            if (j >= 0 && j < n) c += predicted[i] * measured[j];
        }
        if (c > best) {
            best = c;
            best_lag = lag;
        }
    }
    std::vector<double> out(measured.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        const long j = i + best_lag;
        if (j >= 0 && j < n) out[i] = measured[j];
    }
    return out;
}

}  // namespace

EstimationResult estimate(const GlottalWaveform& u0m, const BoundaryConditions& bc,
                          const PhysicalConstants& consts, const OptimizerConfig& cfg,
                          double h) {
    if (u0m.degenerate) throw DegenerateInputError("degenerate measured waveform");
    if (u0m.samples.size() < 2) throw DegenerateInputError("measured waveform too short");

    std::vector<double> m = u0m.samples;
    normalize_peak(m);

    ModelParams p = project(cfg.init, cfg);

    // one-time alignment at the initial parameters; a blow-up here signals a
    // bad init and propagates
    {
        ObjectiveEval init_eval = eval_objective(p, bc, consts, m, h);
        const long max_lag =
            static_cast<long>(std::lround(cfg.align_window_s * u0m.sample_rate));
        const GlottalWaveform u0 = predict_flow(init_eval.traj, consts);
        m = align_measured(m, u0.samples, max_lag);
    }

    EstimationResult result;
    result.params = p;
    double E;
    ObjectiveEval cur = eval_objective(p, bc, consts, m, h);
    E = cur.energy;
    double best_E = E;
    ModelParams best_p = p;

    double base_step = cfg.step_size;
    bool converged = false;
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        AdjointTrajectory adj = integrate_adjoint(cur.traj, cur.res, p, consts);
        const Gradients grad = gradients(adj);
        const double gnorm = std::fabs(grad.g_alpha) + std::fabs(grad.g_beta) +
                             std::fabs(grad.g_delta);
        if (gnorm == 0.0 || E <= 1e-30) {
            converged = true;
            break;
        }

        double step = base_step;
        bool accepted = false;
        ModelParams pn;
        ObjectiveEval next;
        const int max_halvings = cfg.backtracking ? 20 : 0;
        for (int bt = 0; bt <= max_halvings; ++bt) {
            pn = project({p.alpha - step * grad.g_alpha, p.beta - step * grad.g_beta,
                          p.delta - step * grad.g_delta},
                         cfg);
            try {
                next = eval_objective(pn, bc, consts, m, h);
            } catch (const BlowupError&) {
                step *= 0.5;
                continue;
            }
            if (!cfg.backtracking || next.energy < E) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no descent direction representable in double precision: a
            // numerical stationary point
            converged = true;
            break;
        }
        if (cfg.grow_step)
            base_step = (step == base_step) ? base_step * 2.0 : step;

        const double rel_change = std::fabs(E - next.energy) / std::max(E, 1e-300);
        p = pn;
        E = next.energy;
        cur = std::move(next);
        result.energy_trace.push_back(E);
        if (E < best_E) {
            best_E = E;
            best_p = p;
        }
        if (rel_change < cfg.rel_tol) {
            converged = true;
            break;
        }
    }

    result.iterations = result.energy_trace.size();
    result.converged = converged;
    result.params = best_p;
    ObjectiveEval best_eval = eval_objective(best_p, bc, consts, m, h);
    result.residual = std::move(best_eval.res);
    return result;
}

}  // namespace vfo
