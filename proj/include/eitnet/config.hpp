#pragma once

#include "eitnet/estimate.hpp"
#include "eitnet/phantom.hpp"
#include "eitnet/reconstruct.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace eitnet {

enum class StudyKind { single, monte_carlo, lcurve, crb, condition_study, linearized };

std::string to_string(StudyKind kind);
StudyKind study_from_string(const std::string& name);
std::vector<std::string> study_names();

struct TopologyConfig {
    TopologyKind kind = TopologyKind::circular;
    int n = 7;
};

struct GeometryConfig {
    BoundaryAccess access = BoundaryAccess::full;
    std::vector<Arc> arcs;
    double coverage = 0.8;
};

struct GridConfig {
    int n_radial = 60;
    int n_angular = 0;  ///< 0: smallest multiple of n that is >= 96
};

struct NoiseConfig {
    NoiseModel model = NoiseModel::additive;
    double level = 0.0;
    std::uint64_t seed = 1;
};

struct EstimatorSection {
    ParamKind parametrization = ParamKind::network;
    EstimatorKind kind = EstimatorKind::nonlinear_map;
    std::string prior = "auto";  ///< auto: gaussian-parameters (network), gaussian-conductivity (pw-linear)
    double alpha = 0.0;
    double sigma_max = kDefaultSigmaMax;
    int max_gn_steps = 1;  ///< one-step reconstruction in the single study
};

struct StudyConfig {
    StudyKind kind = StudyKind::single;
    int m = 100;
    std::vector<double> alphas;  ///< lcurve; empty: 10^{-j/2}, j = 1..6 (pw-linear) or 1..12 (network)
    int bias_samples = 0;        ///< crb: samples per finite-difference point, 0 skips the bias factor
    std::vector<int> ns;         ///< condition-study
    std::vector<ParamKind> parametrizations;  ///< condition-study
};

struct ExperimentConfig {
    PhantomSpec phantom = PhantomSpec::default_smooth();
    TopologyConfig topology;
    GeometryConfig geometry;
    GridConfig grid;
    NoiseConfig noise;
    EstimatorSection estimator;
    StudyConfig study;

    /// Field-level messages; empty when the configuration is usable.
    std::vector<std::string> validate() const;

    PipelineSpec pipeline_spec() const;
    Prior prior() const;
    EstimatorConfig estimator_config() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys take the defaults above; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig parse_config(const std::string& text);
/// Accepts a config file or a manifest written by run (its "config" key).
ExperimentConfig load_config(const std::string& path);

}  // namespace eitnet
