#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vfo/adles.hpp"
#include "vfo/classify.hpp"
#include "vfo/config.hpp"
#include "vfo/features.hpp"
#include "vfo/glottal.hpp"
#include "vfo/signal.hpp"
#include "vfo/vfmodel.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitSelftest = 3;

struct SegmentTask {
    vfo::Segment seg;
    std::string segment_id;
};

ordered_json record_for(const SegmentTask& task, const vfo::EstimationResult& r) {
    return ordered_json{{"segment_id", task.segment_id},
                        {"speaker_id", task.seg.source.speaker_id},
                        {"vowel", vfo::to_string(task.seg.source.vowel)},
                        {"label", task.seg.source.label},
                        {"alpha", r.params.alpha},
                        {"beta", r.params.beta},
                        {"delta", r.params.delta},
                        {"residual_energy", r.residual.energy},
                        {"residual_mean_abs", r.residual.mean_abs()},
                        {"residual_max_abs", r.residual.max_abs()},
                        {"iterations", r.iterations},
                        {"converged", r.converged}};
}

int run_estimate(const std::string& manifest_path, const std::string& config_path,
                 const std::string& out_path, const std::string& features_path,
                 unsigned jobs) {
    vfo::PipelineConfig cfg =
        config_path.empty() ? vfo::PipelineConfig{} : vfo::load_config(config_path);
    vfo::validate(cfg);

    const auto entries = vfo::load_manifest(manifest_path);
    if (entries.empty()) {
        std::cerr << "error: manifest has no entries: " << manifest_path << "\n";
        return kExitInput;
    }

    std::vector<SegmentTask> tasks;
    std::size_t n_segments = 0;
    for (const auto& e : entries) {
        vfo::AudioClip clip = vfo::load_clip(e.path, cfg.sample_rate);
        clip.speaker_id = e.speaker_id;
        clip.label = e.label;
        clip.vowel = e.vowel;
        auto segs = vfo::segment_clip(clip, cfg.window_s, cfg.hop_s);
        n_segments += segs.size();
        const std::string stem = std::filesystem::path(e.path).stem().string();
        for (auto& s : segs) {
            if (!vfo::is_voiced(s, cfg.energy_floor, cfg.zcr_ceiling)) continue;
            SegmentTask t;
            t.segment_id = stem + ":" + std::to_string(s.start_index);
            t.seg = std::move(s);
            tasks.push_back(std::move(t));
        }
    }

    const double h = cfg.model_step();
    std::vector<std::string> lines(tasks.size());
    std::vector<vfo::SegmentFeatures> feats(tasks.size());
    std::vector<char> has_feat(tasks.size(), 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || failed.load()) break;
            try {
                const vfo::GlottalWaveform u0m =
                    vfo::inverse_filter(tasks[i].seg, cfg.inverse_filter);
                if (u0m.degenerate) continue;  // gated earlier; belt and braces
                const vfo::EstimationResult r = vfo::estimate(
                    u0m, cfg.boundary, cfg.constants, cfg.optimizer, h);
                lines[i] = record_for(tasks[i], r).dump();
                feats[i] = vfo::featurize(r, tasks[i].seg.source, tasks[i].segment_id);
                has_feat[i] = 1;
            } catch (const std::exception& ex) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!failed.exchange(true))
                    fail_msg = "segment " + tasks[i].segment_id + ": " + ex.what();
            }
        }
    };

    const unsigned n_threads = std::max(1u, jobs);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (failed.load()) {
        std::cerr << "error: " << fail_msg << "\n";
        return kExitNumeric;
    }

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitInput;
    }
    std::size_t written = 0;
    for (const auto& line : lines)
        if (!line.empty()) {
            out << line << "\n";
            ++written;
        }
    if (!features_path.empty()) {
        std::vector<vfo::SegmentFeatures> rows;
        for (std::size_t i = 0; i < feats.size(); ++i)
            if (has_feat[i]) rows.push_back(feats[i]);
        vfo::write_features_csv(features_path, rows);
    }
    std::cerr << "clips=" << entries.size() << " segments=" << n_segments
              << " voiced=" << tasks.size() << " estimated=" << written << "\n";
    return kExitOk;
}

int run_phase(const std::string& clip_path, long segment_index,
              const std::string& config_path, const std::string& out_prefix) {
    vfo::PipelineConfig cfg =
        config_path.empty() ? vfo::PipelineConfig{} : vfo::load_config(config_path);
    vfo::validate(cfg);

    vfo::AudioClip clip = vfo::load_clip(clip_path, cfg.sample_rate);
    auto segs = vfo::segment_clip(clip, cfg.window_s, cfg.hop_s);
    if (segment_index < 0 || static_cast<std::size_t>(segment_index) >= segs.size()) {
        std::cerr << "error: segment index " << segment_index << " out of range (0.."
                  << segs.size() - 1 << ")\n";
        return kExitInput;
    }
    const vfo::Segment& seg = segs[static_cast<std::size_t>(segment_index)];
    if (!vfo::is_voiced(seg, cfg.energy_floor, cfg.zcr_ceiling)) {
        std::cerr << "error: segment " << segment_index << " fails the voicing gate\n";
        return kExitInput;
    }

    const double h = cfg.model_step();
    const vfo::GlottalWaveform u0m = vfo::inverse_filter(seg, cfg.inverse_filter);
    const vfo::EstimationResult r =
        vfo::estimate(u0m, cfg.boundary, cfg.constants, cfg.optimizer, h);
    const vfo::FoldTrajectory traj =
        vfo::integrate_forward(r.params, cfg.boundary, seg.samples.size() - 1, h);

    auto write_portrait = [&](vfo::FoldSide side, const std::string& path) {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path);
        f.precision(17);
        f << "x,xdot\n";
        for (const auto& [x, v] : vfo::phase_portrait(traj, side)) f << x << ',' << v << '\n';
    };
    write_portrait(vfo::FoldSide::left, out_prefix + "_left.csv");
    write_portrait(vfo::FoldSide::right, out_prefix + "_right.csv");
    std::cerr << "alpha=" << r.params.alpha << " beta=" << r.params.beta
              << " delta=" << r.params.delta << " E=" << r.residual.energy << "\n";
    return kExitOk;
}

int run_eval(const std::string& features_path, std::size_t k, std::uint64_t seed,
             const std::string& vowel_filter, const std::string& out_path,
             const std::string& config_path) {
    vfo::PipelineConfig cfg =
        config_path.empty() ? vfo::PipelineConfig{} : vfo::load_config(config_path);
    vfo::validate(cfg);

    const auto all = vfo::read_features_csv(features_path);
    std::vector<vfo::SegmentFeatures> rows;
    auto keep = [&](vfo::Vowel v) {
        if (vowel_filter == "all") return true;
        const std::string s = vfo::to_string(v);
        return vowel_filter.find(s) != std::string::npos && s != "other";
    };
    for (const auto& r : all) {
        if (r.label != 0 && r.label != 1) continue;
        if (keep(r.vowel)) rows.push_back(r);
    }
    if (rows.empty()) {
        std::cerr << "error: vowel filter '" << vowel_filter << "' leaves no rows\n";
        return kExitInput;
    }

    std::vector<std::pair<std::string, int>> speakers;
    for (const auto& r : rows) {
        bool seen = false;
        for (const auto& [id, label] : speakers)
            if (id == r.speaker_id) {
                seen = true;
                break;
            }
        if (!seen) speakers.emplace_back(r.speaker_id, r.label);
    }

    const vfo::CVPlan plan = vfo::make_cv_plan(speakers, k, seed);
    const vfo::EvalReport report = vfo::evaluate(rows, plan, cfg.logistic);

    ordered_json folds = ordered_json::array();
    for (const auto& f : report.folds)
        folds.push_back({{"auc", f.auc},
                         {"n_train_segments", f.n_train_segments},
                         {"n_test_segments", f.n_test_segments},
                         {"degenerate", f.degenerate}});
    const ordered_json doc{{"folds", folds},
                           {"mean_auc", report.mean_auc},
                           {"std_auc", report.std_auc},
                           {"config",
                            {{"k", k}, {"seed", seed}, {"vowel", vowel_filter}}}};
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return kExitInput;
        }
        f << text;
    }
    return kExitOk;
}

int run_selftest() {
    const double h = vfo::PipelineConfig{}.model_step();
    const vfo::BoundaryConditions bc;
    const vfo::PhysicalConstants consts;
    bool ok = true;
    auto report = [&](const char* name, bool pass) {
        std::cout << (pass ? "PASS" : "FAIL") << "  " << name << "\n";
        ok = ok && pass;
    };

    // zero fixed point
    {
        auto traj = vfo::integrate_forward(vfo::ModelParams{}, {0.0, 0.0}, 200, h);
        bool zero = true;
        for (const auto& s : traj.states)
            zero = zero && s.xl == 0.0 && s.vl == 0.0 && s.xr == 0.0 && s.vr == 0.0;
        report("forward zero fixed point", zero);
    }

    // gradient oracle against central finite differences
    {
        vfo::GlottalWaveform target;
        {
            auto traj = vfo::integrate_forward(vfo::ModelParams{0.25, 0.32, 0.0}, bc, 400, h);
            target = vfo::predict_flow(traj, consts);
            vfo::normalize_peak(target.samples);
        }
        std::mt19937_64 gen(1234);
        auto urand = [&](double lo, double hi) {
            return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
        };
        bool pass = true;
        for (int k = 0; k < 10; ++k) {
            const vfo::ModelParams p{urand(0.0, 0.6), urand(0.05, 0.8), urand(-0.5, 0.5)};
            vfo::ObjectiveEval eval;
            try {
                eval = vfo::eval_objective(p, bc, consts, target.samples, h);
            } catch (const vfo::BlowupError&) {
                continue;
            }
            const auto adj = vfo::integrate_adjoint(eval.traj, eval.res, p, consts);
            const double a[3] = {adj.g_alpha, adj.g_beta, adj.g_delta};
            double f[3];
            for (int j = 0; j < 3; ++j) {
                vfo::ModelParams hi = p, lo = p;
                double* fh[3] = {&hi.alpha, &hi.beta, &hi.delta};
                double* fl[3] = {&lo.alpha, &lo.beta, &lo.delta};
                const double base[3] = {p.alpha, p.beta, p.delta};
                const double eps = 1e-5 * std::max(1.0, std::fabs(base[j]));
                *fh[j] += eps;
                *fl[j] -= eps;
                f[j] = (vfo::eval_objective(hi, bc, consts, target.samples, h).energy -
                        vfo::eval_objective(lo, bc, consts, target.samples, h).energy) /
                       (2.0 * eps);
            }
            for (int j = 0; j < 3; ++j) {
                if (std::fabs(f[j]) < 1e-5)
                    pass = pass && std::fabs(a[j] - f[j]) <= 1e-8;
                else
                    pass = pass && std::fabs(a[j] - f[j]) / std::fabs(f[j]) <= 1e-3;
            }
        }
        report("adjoint gradient vs finite differences", pass);
    }

    // synthetic parameter recovery
    {
        const vfo::ModelParams truth{0.25, 0.32, 0.0};
        vfo::GlottalWaveform target;
        {
            auto traj = vfo::integrate_forward(truth, bc, 400, h);
            target = vfo::predict_flow(traj, consts);
            vfo::normalize_peak(target.samples);
            target.sample_rate = 8000.0;
        }
        vfo::OptimizerConfig cfg;
        cfg.init = {truth.alpha * 1.2, truth.beta * 1.2, truth.delta * 1.2};
        cfg.max_iters = 3000;
        cfg.rel_tol = 1e-14;
        const auto r = vfo::estimate(target, bc, consts, cfg, h);
        const bool pass = std::fabs(r.params.alpha - truth.alpha) / truth.alpha < 0.05 &&
                          std::fabs(r.params.beta - truth.beta) / truth.beta < 0.05 &&
                          std::fabs(r.params.delta - truth.delta) < 0.05 &&
                          !r.energy_trace.empty() &&
                          r.residual.energy < 1e-4 * r.energy_trace.front();
        report("synthetic parameter recovery", pass);
    }

    return ok ? kExitOk : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vocal fold oscillation estimation and screening pipeline"};
    app.require_subcommand(0, 1);

    bool print_default = false;
    app.add_flag("--print-default-config", print_default,
                 "print the default config document and exit");

    std::string config_path, manifest_path, out_path, clip_path, features_path;
    std::string vowel = "all";
    std::uint64_t seed = 0;
    std::size_t folds = 3;
    long segment_index = 0;
    unsigned jobs = 1;

    auto* est = app.add_subcommand("estimate", "estimate model parameters per segment");
    est->add_option("--manifest", manifest_path, "manifest CSV")->required();
    est->add_option("--config", config_path, "config JSON");
    est->add_option("--out", out_path, "output JSONL path")->required();
    est->add_option("--features", features_path, "also write the feature table CSV here");
    est->add_option("--jobs", jobs, "worker threads");

    auto* phase = app.add_subcommand("phase", "export phase portraits for one segment");
    phase->add_option("--clip", clip_path, "WAV path")->required();
    phase->add_option("--segment", segment_index, "segment index")->required();
    phase->add_option("--config", config_path, "config JSON");
    phase->add_option("--out", out_path, "output CSV prefix")->required();

    auto* eval = app.add_subcommand("eval", "cross-validated classification report");
    eval->add_option("--features", features_path, "feature table CSV")->required();
    eval->add_option("--config", config_path, "config JSON");
    eval->add_option("--out", out_path, "report JSON path");
    eval->add_option("--seed", seed, "CV shuffle seed");
    eval->add_option("--folds", folds, "number of CV folds");
    eval->add_option("--vowel", vowel, "vowel filter: a, i, u, ai, au, iu, all")
        ->check(CLI::IsMember({"a", "i", "u", "ai", "au", "iu", "all"}));

    auto* selftest = app.add_subcommand("selftest", "run the numerical oracle suite");

    CLI11_PARSE(app, argc, argv);

    if (print_default) {
        std::cout << vfo::default_config_json();
        return kExitOk;
    }
    try {
        if (est->parsed())
            return run_estimate(manifest_path, config_path, out_path, features_path, jobs);
        if (phase->parsed()) return run_phase(clip_path, segment_index, config_path, out_path);
        if (eval->parsed())
            return run_eval(features_path, folds, seed, vowel, out_path, config_path);
        if (selftest->parsed()) return run_selftest();
    } catch (const vfo::BlowupError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const vfo::DegenerateInputError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cout << app.help();
    return kExitOk;
}
