#include "vfo/glottal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vfo {

void normalize_peak(std::vector<double>& x) {
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::fabs(v));
    if (peak == 0.0) return;
    for (double& v : x) v /= peak;
}

std::vector<double> lpc_autocorrelation(const std::vector<double>& x, int order) {
    const std::size_t n = x.size();
    std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 0; k <= order; ++k)
        for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i)
            r[static_cast<std::size_t>(k)] += x[i] * x[i - static_cast<std::size_t>(k)];
    if (r[0] <= 0.0) throw InverseFilterError("lpc: zero-energy analysis frame");

    // Levinson-Durbin
    std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
    a[0] = 1.0;
    double err = r[0];
    for (int m = 1; m <= order; ++m) {
        double acc = r[static_cast<std::size_t>(m)];
        for (int k = 1; k < m; ++k)
            acc += a[static_cast<std::size_t>(k)] * r[static_cast<std::size_t>(m - k)];
        if (err <= 0.0 || !std::isfinite(err))
            throw InverseFilterError("lpc: singular normal equations");
        const double refl = -acc / err;
        std::vector<double> prev(a.begin(), a.begin() + m);
        for (int k = 1; k < m; ++k)
            a[static_cast<std::size_t>(k)] =
                prev[static_cast<std::size_t>(k)] + refl * prev[static_cast<std::size_t>(m - k)];
        a[static_cast<std::size_t>(m)] = refl;
        err *= (1.0 - refl * refl);
    }
    // return predictor coefficients, sign-flipped so prediction is sum a_k x[n-k]
    std::vector<double> out(static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k)
        out[static_cast<std::size_t>(k - 1)] = -a[static_cast<std::size_t>(k)];
    return out;
}

GlottalWaveform inverse_filter(const Segment& seg, const InverseFilterConfig& cfg) {
    const std::size_t n = seg.samples.size();
    if (cfg.lpc_order < 2 || static_cast<std::size_t>(cfg.lpc_order) >= n / 2)
        throw InverseFilterError("lpc order out of range for segment length");

    GlottalWaveform w;
    w.kind = FlowKind::measured;
    w.sample_rate = seg.source.sample_rate;

    bool all_zero = true;
    for (double v : seg.samples)
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) {
        w.samples.assign(n, 0.0);
        w.degenerate = true;
        return w;
    }

    // pre-emphasis
    std::vector<double> pre(n);
    pre[0] = seg.samples[0];
    for (std::size_t i = 1; i < n; ++i)
        pre[i] = seg.samples[i] - cfg.preemphasis * seg.samples[i - 1];

    // cosine-tapered copy for the autocorrelation fit
    std::vector<double> tapered(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double win =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n - 1));
        tapered[i] = pre[i] * win;
    }

    std::vector<double> a;
    try {
        a = lpc_autocorrelation(tapered, cfg.lpc_order);
    } catch (const InverseFilterError&) {
        w.samples.assign(n, 0.0);
        w.degenerate = true;
        return w;
    }

    // inverse FIR: e[n] = x[n] - sum a_k x[n-k]
    std::vector<double> excitation(n);
    for (std::size_t i = 0; i < n; ++i) {
        double e = pre[i];
        for (std::size_t k = 0; k < a.size(); ++k)
            if (i > k) e -= a[k] * pre[i - k - 1];
        excitation[i] = e;
    }

    // leaky integration: differentiated flow back to flow
    w.samples.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc = excitation[i] + cfg.leak * acc;
        w.samples[i] = acc;
    }
    if (cfg.normalize) normalize_peak(w.samples);
    return w;
}

GlottalWaveform scale_to_flow(const GlottalWaveform& p0, double area_at_glottis,
                              double rho, double c_sound) {
    if (!(area_at_glottis > 0.0 && rho > 0.0 && c_sound > 0.0))
        throw InverseFilterError("scale_to_flow: constants must be positive");
    GlottalWaveform out = p0;
    const double s = area_at_glottis / (rho * c_sound);
    for (double& v : out.samples) v *= s;
    return out;
}

}  // namespace vfo
