#include "vfo/features.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vfo {

SegmentFeatures featurize(const EstimationResult& result, const SourceInfo& meta,
                          const std::string& segment_id) {
    if (result.residual.values.empty())
        throw EmptyResidualError("featurize: empty residual series");
    SegmentFeatures f;
    f.segment_id = segment_id;
    f.speaker_id = meta.speaker_id;
    f.vowel = meta.vowel;
    f.label = meta.label;
    f.alpha = result.params.alpha;
    f.beta = result.params.beta;
    f.delta = result.params.delta;
    f.res_energy = result.residual.energy;
    f.res_mean_abs = result.residual.mean_abs();
    f.res_max_abs = result.residual.max_abs();
    f.converged = result.converged;
    return f;
}

Scaler fit_scaler(const std::vector<SegmentFeatures>& train) {
    Scaler s;
    if (train.empty()) return s;
    const double n = static_cast<double>(train.size());
    for (const auto& row : train) {
        const auto v = row.vector();
        for (std::size_t j = 0; j < kNumFeatures; ++j) s.mean[j] += v[j];
    }
    for (auto& m : s.mean) m /= n;
    for (const auto& row : train) {
        const auto v = row.vector();
        for (std::size_t j = 0; j < kNumFeatures; ++j) {
            const double d = v[j] - s.mean[j];
            s.stddev[j] += d * d;
        }
    }
    for (auto& sd : s.stddev) sd = std::sqrt(sd / n);
    return s;
}

std::vector<std::array<double, kNumFeatures>> Scaler::apply(
    const std::vector<SegmentFeatures>& rows) const {
    std::vector<std::array<double, kNumFeatures>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const auto v = row.vector();
        std::array<double, kNumFeatures> z{};
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            z[j] = stddev[j] > 0.0 ? (v[j] - mean[j]) / stddev[j] : 0.0;
        out.push_back(z);
    }
    return out;
}

void write_features_csv(const std::string& path, const std::vector<SegmentFeatures>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "segment_id,speaker_id,vowel,label,alpha,beta,delta,res_energy,res_mean_abs,"
         "res_max_abs,converged\n";
    f.precision(17);
    for (const auto& r : rows) {
        f << r.segment_id << ',' << r.speaker_id << ',' << to_string(r.vowel) << ','
          << r.label << ',' << r.alpha << ',' << r.beta << ',' << r.delta << ','
          << r.res_energy << ',' << r.res_mean_abs << ',' << r.res_max_abs << ','
          << (r.converged ? 1 : 0) << '\n';
    }
}

std::vector<SegmentFeatures> read_features_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty feature table: " + path);
    std::vector<SegmentFeatures> rows;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> fields;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (fields.size() < 11)
            throw std::runtime_error("bad feature row in " + path + ": " + line);
        SegmentFeatures r;
        r.segment_id = fields[0];
        r.speaker_id = fields[1];
        r.vowel = vowel_from_string(fields[2]);
        r.label = std::stoi(fields[3]);
        r.alpha = std::stod(fields[4]);
        r.beta = std::stod(fields[5]);
        r.delta = std::stod(fields[6]);
        r.res_energy = std::stod(fields[7]);
        r.res_mean_abs = std::stod(fields[8]);
        r.res_max_abs = std::stod(fields[9]);
        r.converged = fields[10] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace vfo
