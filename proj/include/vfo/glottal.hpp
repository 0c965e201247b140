#pragma once

#include <stdexcept>
#include <vector>

#include "vfo/signal.hpp"

namespace vfo {

enum class FlowKind { measured, predicted };

struct GlottalWaveform {
    std::vector<double> samples;
    double sample_rate = 0.0;
    FlowKind kind = FlowKind::measured;
    bool degenerate = false;  // set when the source segment was unusable
};

struct InverseFilterConfig {
    int lpc_order = 10;         // rate/1000 + 2 at 8 kHz
    double preemphasis = 0.97;  // in [0, 1)
    double leak = 0.99;         // leaky-integrator coefficient
    bool normalize = true;
};

class InverseFilterError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// LPC inverse filtering: pre-emphasize, fit an all-pole model by the
// autocorrelation method (cosine-tapered analysis window), filter with the
// inverse FIR, integrate once to recover flow from its derivative.
GlottalWaveform inverse_filter(const Segment& seg, const InverseFilterConfig& cfg);

// u0m = A(0)/(rho c) * p0.
GlottalWaveform scale_to_flow(const GlottalWaveform& p0, double area_at_glottis,
                              double rho, double c_sound);

// Scale to unit peak absolute amplitude; identically-zero input is untouched.
void normalize_peak(std::vector<double>& x);

// Levinson-Durbin solve of the autocorrelation normal equations.
// Returns LPC coefficients a[1..order] such that the prediction filter is
// 1 - sum a_k z^-k. Throws InverseFilterError on a singular system.
std::vector<double> lpc_autocorrelation(const std::vector<double>& x, int order);

}  // namespace vfo
