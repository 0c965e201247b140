#include "vfo/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace vfo {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_two_classes(const std::vector<int>& y) {
    bool pos = false, neg = false;
    for (int v : y) (v == 1 ? pos : neg) = true;
    if (!pos || !neg) throw SingleClassError("both classes must be present");
}

}  // namespace

LogisticModel fit_logistic(const std::vector<FeatureRow>& X, const std::vector<int>& y,
                           double l2, std::size_t epochs, double lr) {
    if (X.empty() || X.size() != y.size())
        throw DimensionMismatchError("fit_logistic: bad input shape");
    require_two_classes(y);
    const std::size_t dim = X[0].size();
    for (const auto& row : X)
        if (row.size() != dim) throw DimensionMismatchError("fit_logistic: ragged rows");

    LogisticModel m;
    m.weights.assign(dim, 0.0);
    m.l2 = l2;
    const double n = static_cast<double>(X.size());
    std::vector<double> gw(dim);
    for (std::size_t e = 0; e < epochs; ++e) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            double z = m.bias;
            for (std::size_t j = 0; j < dim; ++j) z += m.weights[j] * X[i][j];
            const double err = sigmoid(z) - static_cast<double>(y[i]);
            for (std::size_t j = 0; j < dim; ++j) gw[j] += err * X[i][j];
            gb += err;
        }
        for (std::size_t j = 0; j < dim; ++j)
            m.weights[j] -= lr * (gw[j] / n + l2 * m.weights[j]);
        m.bias -= lr * gb / n;
    }
    return m;
}

double cross_entropy(const LogisticModel& m, const std::vector<FeatureRow>& X,
                     const std::vector<int>& y) {
    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double z = m.bias;
        for (std::size_t j = 0; j < m.weights.size(); ++j) z += m.weights[j] * X[i][j];
        const double p = sigmoid(z);
        const double eps = 1e-12;
        loss -= y[i] == 1 ? std::log(p + eps) : std::log(1.0 - p + eps);
    }
    return loss / static_cast<double>(X.size());
}

std::vector<double> predict_scores(const LogisticModel& m,
                                   const std::vector<FeatureRow>& X) {
    std::vector<double> s;
    s.reserve(X.size());
    for (const auto& row : X) {
        if (row.size() != m.weights.size())
            throw DimensionMismatchError("predict_scores: dimension mismatch");
        double z = m.bias;
        for (std::size_t j = 0; j < row.size(); ++j) z += m.weights[j] * row[j];
        s.push_back(sigmoid(z));
    }
    return s;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DimensionMismatchError("roc_auc: size mismatch");
    require_two_classes(labels);

    // midrank formulation; all partial quantities are exact multiples of 1/2
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    double n_pos = 0.0, n_neg = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (labels[idx[k]] == 1) {
                pos_rank_sum += midrank;
                n_pos += 1.0;
            } else {
                n_neg += 1.0;
            }
        }
        i = j;
    }
    return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

CVPlan make_cv_plan(const std::vector<std::pair<std::string, int>>& speakers,
                    std::size_t k, std::uint64_t seed) {
    if (k < 2) throw CVPlanError("need at least 2 folds");
    std::vector<std::string> pos, neg;
    for (const auto& [id, label] : speakers) (label == 1 ? pos : neg).push_back(id);
    if (pos.size() < k || neg.size() < k)
        throw CVPlanError("need at least k speakers of each class");

    std::mt19937_64 gen(seed);
    auto shuffle = [&gen](std::vector<std::string>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[gen() % i]);
    };
    // sort first so the plan depends only on the speaker set, not input order
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    shuffle(pos);
    shuffle(neg);

    CVPlan plan;
    plan.seed = seed;
    plan.folds.resize(k);
    std::vector<std::vector<std::string>> test_sets(k);
    for (std::size_t i = 0; i < pos.size(); ++i) test_sets[i % k].push_back(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i) test_sets[i % k].push_back(neg[i]);
    for (std::size_t f = 0; f < k; ++f) {
        plan.folds[f].test_speakers = test_sets[f];
        for (std::size_t g = 0; g < k; ++g)
            if (g != f)
                plan.folds[f].train_speakers.insert(plan.folds[f].train_speakers.end(),
                                                    test_sets[g].begin(),
                                                    test_sets[g].end());
    }
    return plan;
}

EvalReport evaluate(const std::vector<SegmentFeatures>& features, const CVPlan& plan,
                    const LogisticConfig& cfg) {
    EvalReport report;
    std::vector<double> aucs;
    for (const CVFold& fold : plan.folds) {
        const std::set<std::string> train_set(fold.train_speakers.begin(),
                                              fold.train_speakers.end());
        const std::set<std::string> test_set(fold.test_speakers.begin(),
                                             fold.test_speakers.end());
        for (const auto& s : test_set)
            if (train_set.count(s))
                throw CVPlanError("speaker appears in both train and test: " + s);

        std::vector<SegmentFeatures> train, test;
        for (const auto& f : features) {
            if (train_set.count(f.speaker_id)) train.push_back(f);
            else if (test_set.count(f.speaker_id)) test.push_back(f);
        }

        FoldReport fr;
        fr.n_train_segments = train.size();
        fr.n_test_segments = test.size();

        auto to_rows = [](const std::vector<std::array<double, kNumFeatures>>& z) {
            std::vector<FeatureRow> rows;
            rows.reserve(z.size());
            for (const auto& r : z) rows.emplace_back(r.begin(), r.end());
            return rows;
        };
        try {
            const Scaler scaler = fit_scaler(train);
            const auto Xtr = to_rows(scaler.apply(train));
            const auto Xte = to_rows(scaler.apply(test));
            std::vector<int> ytr, yte;
            for (const auto& f : train) ytr.push_back(f.label);
            for (const auto& f : test) yte.push_back(f.label);
            const LogisticModel m = fit_logistic(Xtr, ytr, cfg.l2, cfg.epochs, cfg.lr);
            fr.auc = roc_auc(predict_scores(m, Xte), yte);
            aucs.push_back(fr.auc);
        } catch (const SingleClassError&) {
            fr.degenerate = true;
        }
        report.folds.push_back(fr);
    }

    if (!aucs.empty()) {
        double mean = 0.0;
        for (double a : aucs) mean += a;
        mean /= static_cast<double>(aucs.size());
        double var = 0.0;
        for (double a : aucs) var += (a - mean) * (a - mean);
        report.mean_auc = mean;
        report.std_auc = std::sqrt(var / static_cast<double>(aucs.size()));
    }
    return report;
}

}  // namespace vfo
