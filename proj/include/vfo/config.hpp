#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "vfo/adles.hpp"
#include "vfo/classify.hpp"
#include "vfo/glottal.hpp"
#include "vfo/signal.hpp"
#include "vfo/vfmodel.hpp"

namespace vfo {

// One structured document covering every stage of the pipeline.
struct PipelineConfig {
    double sample_rate = 8000.0;
    double window_s = 0.050;
    double hop_s = 0.025;
    double energy_floor = 0.1;
    double zcr_ceiling = 0.3;

    InverseFilterConfig inverse_filter;

    // model time step = (1 / sample_rate) * 2*pi*nominal_freq_hz
    double nominal_freq_hz = 150.0;
    PhysicalConstants constants;
    BoundaryConditions boundary;

    OptimizerConfig optimizer;
    LogisticConfig logistic;
    std::uint64_t seed = 0;
    std::size_t cv_folds = 3;

    double model_step() const;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_config_json();
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config_json(const std::string& text);

// Throws ConfigError on any value violating a module precondition.
void validate(const PipelineConfig& cfg);

}  // namespace vfo
