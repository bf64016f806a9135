#pragma once

#include "eitnet/measurement.hpp"
#include "eitnet/reconstruct.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace eitnet {

// ---------------------------------------------------------------- priors

enum class PriorKind { upper_lower, gaussian_conductivity, gaussian_parameters };

std::string to_string(PriorKind kind);
PriorKind prior_from_string(const std::string& name);

inline constexpr double kDefaultSigmaMax = 1e3;

struct Prior {
    PriorKind kind = PriorKind::upper_lower;
    double sigma_max = kDefaultSigmaMax;
    double alpha = 0.0;
    NodalField sigma_ref;  ///< empty: sigma_ref = 1
    Eigen::VectorXd s_ref;  ///< empty: s_ref = 1

    void validate() const;
};

struct PriorValue {
    double value = 0.0;  ///< log prior up to a constant; -inf when infeasible
    bool feasible = true;
};

PriorValue log_prior(const Prior& prior, const Eigen::VectorXd& s, const Parametrization& p);

// ---------------------------------------------------------------- QP

struct QpResult {
    Eigen::VectorXd x;
    std::vector<int> active;  ///< working set at the solution
    int iterations = 0;
    bool stalled = false;
};

/// min ||M x - y||^2 subject to A x >= b, by a primal active-set method started
/// at a feasible x0. Subproblems are solved by QR on the null space of the
/// working set, so M is never squared.
QpResult solve_constrained_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int max_iterations = 2000);

// ---------------------------------------------------------------- MAP

struct MapOptions {
    int max_iterations = 70;
    double gradient_drop = 1e-4;
    double shift = 1e-8;  ///< Hessian diagonal shift, times 1/C_11
};

struct MapResult {
    Eigen::VectorXd s;
    NodalField sigma;  ///< empty when not requested
    bool converged = true;
    bool feasible = true;
    bool active = false;  ///< linearized: a positivity bound is active
    bool clamped = false;
    int iterations = 0;
    double objective = 0.0;
};

MapResult map_estimate_nonlinear(const DataVector& d, const Eigen::VectorXd& covariance, const Parametrization& p,
                                 const Prior& prior, const MapOptions& options = {}, bool want_sigma = true);

/// Forward map linearized at s = 1 with the positivity constraints on fine nodes.
class LinearizedModel {
public:
    LinearizedModel(const Parametrization& p, const Eigen::VectorXd& covariance);

    const Eigen::MatrixXd& jacobian() const { return j_; }  ///< D_sigma F(1) D_s S(1)
    const Eigen::MatrixXd& basis() const { return basis_; }
    const DataVector& data_one() const { return f1_; }

    MapResult solve(const DataVector& d) const;
    /// Weighted least squares without constraints.
    Eigen::VectorXd unconstrained(const DataVector& d) const;

private:
    Eigen::MatrixXd j_;
    Eigen::MatrixXd basis_;
    DataVector f1_;
    Eigen::VectorXd inv_sqrt_c_;
    Eigen::MatrixXd m_;  ///< C^{-1/2} J
};

inline constexpr double kActiveTolerance = 1e-10;

MapResult map_estimate_linearized(const DataVector& d, const Eigen::VectorXd& covariance, const Parametrization& p);

// ---------------------------------------------------------------- Monte Carlo

std::uint64_t splitmix64(std::uint64_t& state);
/// Seed of sample k in a run with the given master seed.
std::uint64_t sample_seed(std::uint64_t master, std::uint64_t k);

struct SampleOutcome {
    Eigen::VectorXd s;
    NodalField sigma;  ///< may be empty
    bool active = false;
    bool clamped = false;
};

struct McStats {
    int requested = 0;
    int samples = 0;  ///< successful
    int failures = 0;
    int active_count = 0;
    int clamped_count = 0;
    std::uint64_t master_seed = 0;
    Eigen::VectorXd mean_s, var_s, bias_s;
    NodalField mean_sigma, var_sigma, bias_sigma;

    double active_rate() const { return samples > 0 ? static_cast<double>(active_count) / samples : 0.0; }
    double failure_rate() const { return requested > 0 ? static_cast<double>(failures) / requested : 0.0; }
};

using Sampler = std::function<SampleOutcome(std::uint64_t seed)>;

/// Runs M samples (concurrently when threads > 1) and reduces them in index
/// order, so the result does not depend on the thread count. Biases are
/// reference - mean; left empty when no reference is given.
McStats monte_carlo(const Sampler& sampler, int m, std::uint64_t master_seed, int threads = 1,
                    const Eigen::VectorXd* s_ref = nullptr, const NodalField* sigma_ref = nullptr);

// ---------------------------------------------------------------- experiments

enum class EstimatorKind { layer_peeling, nonlinear_map, linearized_map };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::nonlinear_map;
    Prior prior;
    MapOptions map;
    bool sigma_maps = true;  ///< compute S(s) per sample
};

/// One statistical experiment: truth, data model, noise and estimator.
class Experiment {
public:
    Experiment(std::shared_ptr<const Parametrization> param, const NodalField& sigma_true, NoiseModel model,
               double level, EstimatorConfig estimator);

    const Parametrization& parametrization() const { return *param_; }
    const Pipeline& pipeline() const { return param_->pipeline(); }
    const NodalField& sigma_true() const { return sigma_true_; }
    const DataVector& data_true() const { return data_true_; }
    const Eigen::VectorXd& covariance() const { return covariance_; }
    const EstimatorConfig& estimator() const { return estimator_; }
    NoiseModel noise_model() const { return model_; }
    double noise_level() const { return level_; }

    /// Same experiment with another regularization weight.
    Experiment with_alpha(double alpha) const;

    DataVector noise(std::uint64_t seed) const;
    /// Synthetic noiseless data for parameters s (model class data).
    DataVector model_data(const Eigen::VectorXd& s) const;

    MapResult estimate(const DataVector& d, bool want_sigma) const;
    SampleOutcome sample(std::uint64_t seed) const;
    Sampler sampler() const;

    /// Estimate from noiseless data with the upper/lower prior (cached).
    const Eigen::VectorXd& s_star() const;
    const NodalField& sigma_star() const;

private:
    std::shared_ptr<const Parametrization> param_;
    NodalField sigma_true_;
    NoiseModel model_;
    double level_;
    EstimatorConfig estimator_;
    DataVector data_true_;
    Eigen::VectorXd covariance_;
    std::shared_ptr<const LinearizedModel> linear_;
    struct Star {
        Eigen::VectorXd s;
        NodalField sigma;
    };
    std::shared_ptr<std::optional<Star>> star_;
    std::shared_ptr<std::mutex> star_mutex_;
    const Star& star() const;
};

McStats monte_carlo(const Experiment& experiment, int m, std::uint64_t master_seed, int threads = 1);

// ---------------------------------------------------------------- Fisher, CRB, bias

/// Data Jacobian with respect to s at S(s).
Eigen::MatrixXd parameter_jacobian(const Eigen::VectorXd& s, const Parametrization& p);

Eigen::MatrixXd fisher(const Eigen::VectorXd& s, const Parametrization& p, const Eigen::VectorXd& covariance);

/// Estimate for data generated at s with noise seed `seed`.
using ParamEstimator = std::function<Eigen::VectorXd(const Eigen::VectorXd& s, std::uint64_t seed)>;

/// Central differences of the sample mean, with common random numbers at s +- h e_k.
Eigen::MatrixXd bias_factor(const ParamEstimator& estimator, const Eigen::VectorXd& s_star, int m, double h,
                            std::uint64_t master_seed, int threads = 1, int* failures = nullptr);

struct CrbReport {
    Eigen::MatrixXd fisher;
    double fisher_condition = 0.0;
    Eigen::VectorXd crb;
    Eigen::VectorXd variance;
    Eigen::VectorXd relative;  ///< (Var - CRB) / CRB
    Eigen::MatrixXd bias;      ///< empty unless requested
    int failures = 0;
};

inline constexpr double kBiasStep = 0.01;

CrbReport crb_report(const Experiment& experiment, int m, std::uint64_t master_seed, int threads = 1,
                     int bias_samples = 0, double bias_step = kBiasStep);

// ---------------------------------------------------------------- studies

struct ConditionRow {
    int n = 0;
    std::string parametrization;  ///< "fine-grid" for the raw map
    double condition = 0.0;
};

std::vector<ConditionRow> condition_study(const std::vector<int>& ns, const std::vector<ParamKind>& kinds,
                                          int n_radial = 60, double coverage = 0.8);

struct LCurvePoint {
    double alpha = 0.0;
    double true_bias = 0.0;  ///< percent of ||sigma_true||
    double rel_std = 0.0;    ///< percent
    int failures = 0;
};

LCurvePoint lcurve_metrics(const McStats& stats, const NodalField& sigma_true, const DiskGrid& grid, double alpha);

std::vector<LCurvePoint> lcurve(const Experiment& experiment, const std::vector<double>& alphas, int m,
                                std::uint64_t master_seed, int threads = 1);

/// alpha = 10^{-j/2}, j = 1..count
std::vector<double> alpha_sweep(int count);

}  // namespace eitnet
