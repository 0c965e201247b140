#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vfo/adles.hpp"
#include "vfo/signal.hpp"

namespace vfo {

inline constexpr std::size_t kNumFeatures = 6;  // alpha, beta, delta, 3 residual stats

struct SegmentFeatures {
    std::string segment_id;
    std::string speaker_id;
    Vowel vowel = Vowel::other;
    Label label = -1;
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double res_energy = 0.0;
    double res_mean_abs = 0.0;
    double res_max_abs = 0.0;
    bool converged = false;

    std::array<double, kNumFeatures> vector() const {
        return {alpha, beta, delta, res_energy, res_mean_abs, res_max_abs};
    }
};

class EmptyResidualError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

SegmentFeatures featurize(const EstimationResult& result, const SourceInfo& meta,
                          const std::string& segment_id);

// Per-feature z-scoring fit on a training partition only.
struct Scaler {
    std::array<double, kNumFeatures> mean{};
    std::array<double, kNumFeatures> stddev{};  // 0 marks a zero-variance feature

    std::vector<std::array<double, kNumFeatures>> apply(
        const std::vector<SegmentFeatures>& rows) const;
};

Scaler fit_scaler(const std::vector<SegmentFeatures>& train);

// CSV round trip for the feature table.
void write_features_csv(const std::string& path, const std::vector<SegmentFeatures>& rows);
std::vector<SegmentFeatures> read_features_csv(const std::string& path);

}  // namespace vfo
