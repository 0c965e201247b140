#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfo/features.hpp"

namespace vfo {

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    double l2 = 0.0;
};

struct LogisticConfig {
    double l2 = 1e-3;
    std::size_t epochs = 500;
    double lr = 0.1;
};

struct CVFold {
    std::vector<std::string> train_speakers;
    std::vector<std::string> test_speakers;
};

struct CVPlan {
    std::vector<CVFold> folds;
    std::uint64_t seed = 0;
};

struct FoldReport {
    double auc = 0.0;
    std::size_t n_train_segments = 0;
    std::size_t n_test_segments = 0;
    bool degenerate = false;  // test partition had one class only
};

struct EvalReport {
    std::vector<FoldReport> folds;
    double mean_auc = 0.0;
    double std_auc = 0.0;
};

class SingleClassError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class DimensionMismatchError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class CVPlanError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

using FeatureRow = std::vector<double>;

// Full-batch gradient descent on L2-regularized cross-entropy, zero init.
LogisticModel fit_logistic(const std::vector<FeatureRow>& X, const std::vector<int>& y,
                           double l2, std::size_t epochs, double lr);

// One epoch's mean cross-entropy (without the L2 term); for loss-trace tests.
double cross_entropy(const LogisticModel& m, const std::vector<FeatureRow>& X,
                     const std::vector<int>& y);

std::vector<double> predict_scores(const LogisticModel& m,
                                   const std::vector<FeatureRow>& X);

// Mann-Whitney AUC: fraction of (positive, negative) pairs where the positive
// scores higher, ties at one half.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Speaker-granular stratified k-fold split, shuffled by the seeded RNG.
CVPlan make_cv_plan(const std::vector<std::pair<std::string, int>>& speakers,
                    std::size_t k, std::uint64_t seed);

// Per fold: standardize on train, fit, score test segments, AUC. Degenerate
// folds (single-class test partition) are flagged and excluded from the mean.
EvalReport evaluate(const std::vector<SegmentFeatures>& features, const CVPlan& plan,
                    const LogisticConfig& cfg);

}  // namespace vfo
