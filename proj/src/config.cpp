#include "vfo/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace vfo {

using nlohmann::json;

double PipelineConfig::model_step() const {
    return (1.0 / sample_rate) * 2.0 * std::numbers::pi * nominal_freq_hz;
}

namespace {

json to_json(const PipelineConfig& c) {
    return json{
        {"signal",
         {{"sample_rate", c.sample_rate},
          {"window_s", c.window_s},
          {"hop_s", c.hop_s},
          {"energy_floor", c.energy_floor},
          {"zcr_ceiling", c.zcr_ceiling}}},
        {"inverse_filter",
         {{"lpc_order", c.inverse_filter.lpc_order},
          {"preemphasis", c.inverse_filter.preemphasis},
          {"leak", c.inverse_filter.leak},
          {"normalize", c.inverse_filter.normalize}}},
        {"model",
         {{"nominal_freq_hz", c.nominal_freq_hz},
          {"x0", c.constants.x0},
          {"flow_scale", c.constants.flow_scale},
          {"cl", c.boundary.cl},
          {"cr", c.boundary.cr}}},
        {"optimizer",
         {{"step_size", c.optimizer.step_size},
          {"max_iters", c.optimizer.max_iters},
          {"rel_tol", c.optimizer.rel_tol},
          {"init_alpha", c.optimizer.init.alpha},
          {"init_beta", c.optimizer.init.beta},
          {"init_delta", c.optimizer.init.delta},
          {"backtracking", c.optimizer.backtracking},
          {"grow_step", c.optimizer.grow_step},
          {"align_window_s", c.optimizer.align_window_s}}},
        {"logistic",
         {{"l2", c.logistic.l2}, {"epochs", c.logistic.epochs}, {"lr", c.logistic.lr}}},
        {"eval", {{"cv_folds", c.cv_folds}, {"seed", c.seed}}}};
}

PipelineConfig from_json(const json& j) {
    PipelineConfig c;
    auto get = [](const json& obj, const char* key, auto& dst) {
        if (obj.contains(key)) dst = obj.at(key).get<std::decay_t<decltype(dst)>>();
    };
    if (j.contains("signal")) {
        const auto& s = j.at("signal");
        get(s, "sample_rate", c.sample_rate);
        get(s, "window_s", c.window_s);
        get(s, "hop_s", c.hop_s);
        get(s, "energy_floor", c.energy_floor);
        get(s, "zcr_ceiling", c.zcr_ceiling);
    }
    if (j.contains("inverse_filter")) {
        const auto& s = j.at("inverse_filter");
        get(s, "lpc_order", c.inverse_filter.lpc_order);
        get(s, "preemphasis", c.inverse_filter.preemphasis);
        get(s, "leak", c.inverse_filter.leak);
        get(s, "normalize", c.inverse_filter.normalize);
    }
    if (j.contains("model")) {
        const auto& s = j.at("model");
        get(s, "nominal_freq_hz", c.nominal_freq_hz);
        get(s, "x0", c.constants.x0);
        get(s, "flow_scale", c.constants.flow_scale);
        get(s, "cl", c.boundary.cl);
        get(s, "cr", c.boundary.cr);
    }
    if (j.contains("optimizer")) {
        const auto& s = j.at("optimizer");
        get(s, "step_size", c.optimizer.step_size);
        get(s, "max_iters", c.optimizer.max_iters);
        get(s, "rel_tol", c.optimizer.rel_tol);
        get(s, "init_alpha", c.optimizer.init.alpha);
        get(s, "init_beta", c.optimizer.init.beta);
        get(s, "init_delta", c.optimizer.init.delta);
        get(s, "backtracking", c.optimizer.backtracking);
        get(s, "grow_step", c.optimizer.grow_step);
        get(s, "align_window_s", c.optimizer.align_window_s);
    }
    if (j.contains("logistic")) {
        const auto& s = j.at("logistic");
        get(s, "l2", c.logistic.l2);
        get(s, "epochs", c.logistic.epochs);
        get(s, "lr", c.logistic.lr);
    }
    if (j.contains("eval")) {
        const auto& s = j.at("eval");
        get(s, "cv_folds", c.cv_folds);
        get(s, "seed", c.seed);
    }
    return c;
}

}  // namespace

std::string default_config_json() { return to_json(PipelineConfig{}).dump(2) + "\n"; }

PipelineConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    PipelineConfig c;
    try {
        c = from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    validate(c);
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_json(ss.str());
}

void validate(const PipelineConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };
    if (!(c.sample_rate > 0)) fail("sample_rate must be > 0");
    if (!(c.window_s > c.hop_s && c.hop_s > 0)) fail("require window_s > hop_s > 0");
    if (!(c.energy_floor >= 0)) fail("energy_floor must be >= 0");
    if (!(c.zcr_ceiling > 0 && c.zcr_ceiling <= 1)) fail("zcr_ceiling must be in (0, 1]");
    const double win_samples = c.window_s * c.sample_rate;
    if (c.inverse_filter.lpc_order < 2 ||
        static_cast<double>(c.inverse_filter.lpc_order) >= win_samples / 2)
        fail("lpc_order must be >= 2 and < window length / 2");
    if (!(c.inverse_filter.preemphasis >= 0 && c.inverse_filter.preemphasis < 1))
        fail("preemphasis must be in [0, 1)");
    if (!(c.inverse_filter.leak > 0 && c.inverse_filter.leak <= 1))
        fail("leak must be in (0, 1]");
    if (!(c.nominal_freq_hz > 0)) fail("nominal_freq_hz must be > 0");
    if (!(c.constants.flow_scale > 0)) fail("flow_scale must be > 0");
    if (!(c.constants.x0 >= 0)) fail("x0 must be >= 0");
    if (!(c.optimizer.step_size > 0)) fail("step_size must be > 0");
    if (c.optimizer.max_iters < 1) fail("max_iters must be >= 1");
    if (!(c.optimizer.rel_tol > 0)) fail("rel_tol must be > 0");
    if (!(c.optimizer.init.beta > 0)) fail("init beta must be > 0");
    if (!(c.optimizer.align_window_s >= 0)) fail("align_window_s must be >= 0");
    if (!(c.logistic.lr > 0)) fail("logistic lr must be > 0");
    if (!(c.logistic.l2 >= 0)) fail("logistic l2 must be >= 0");
    if (c.logistic.epochs < 1) fail("logistic epochs must be >= 1");
    if (c.cv_folds < 2) fail("cv_folds must be >= 2");
}

}  // namespace vfo
