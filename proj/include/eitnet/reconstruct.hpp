#pragma once

#include "eitnet/grid.hpp"
#include "eitnet/measurement.hpp"
#include "eitnet/network.hpp"
#include "eitnet/optgrid.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace eitnet {

/// Smallest multiple of n that is at least 96: keeps electrode layouts
/// compatible with the fine boundary so rotations map nodes to nodes.
int default_angular(int n);

struct PipelineSpec {
    TopologyKind kind = TopologyKind::circular;
    int n = 7;
    BoundaryGeometry geometry = BoundaryGeometry::full();
    int n_radial = 60;
    int n_angular = 0;  ///< 0: default_angular(n)
    RecoveryConfig recovery = exact_recovery();
};

/// Fixed experiment context: fine grid, electrodes, network and optimal grid.
/// Not copyable; other objects keep references into it.
class Pipeline {
public:
    explicit Pipeline(const PipelineSpec& spec);
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    const PipelineSpec& spec() const { return spec_; }
    const DiskGrid& grid() const { return grid_; }
    const ElectrodeSet& electrodes() const { return electrodes_; }
    const NetworkGraph& graph() const { return graph_; }
    const OptimalGrid& optimal() const { return optimal_; }
    const RecoveryConfig& recovery() const { return spec_.recovery; }
    int parameter_count() const { return graph_.edge_count(); }

    DataVector forward(const NodalField& sigma) const { return forward_map(sigma, electrodes_, grid_); }

    /// Shared noise machinery; its covariance estimates are cached.
    const NoiseGenerator& noise() const { return *noise_; }

private:
    PipelineSpec spec_;
    DiskGrid grid_;
    ElectrodeSet electrodes_;
    NetworkGraph graph_;
    OptimalGrid optimal_;
    std::unique_ptr<NoiseGenerator> noise_;
};

std::shared_ptr<const Pipeline> make_pipeline(const PipelineSpec& spec);

inline constexpr double kRatioFloor = 1e-6;

struct QResult {
    Eigen::VectorXd q;  ///< gamma / gamma1
    bool peeled = false;
    bool converged = true;
    bool clamped = false;  ///< some ratio was raised to kRatioFloor

    /// ln q with nonpositive entries clamped to kRatioFloor.
    Eigen::VectorXd log() const;
};

QResult recon_Q(const DataVector& d, const Pipeline& pipeline, const Eigen::VectorXd& kappa_start = {});

NodalField interpolate_sigma0(const Eigen::VectorXd& q, const Pipeline& pipeline);

Eigen::VectorXd map_G(const NodalField& kappa, const Pipeline& pipeline);

struct GJacobian {
    Eigen::VectorXd value;
    Eigen::MatrixXd jacobian;  ///< g x node_count, d G / d kappa(node)
    ConductanceVector gamma;
};

GJacobian map_G_jacobian(const NodalField& kappa, const Pipeline& pipeline, const Eigen::VectorXd& kappa_start = {});

/// Pseudo-inverse of a g x node_count matrix, truncated at a relative
/// singular value threshold.
class TruncatedPinv {
public:
    TruncatedPinv(const Eigen::MatrixXd& j, double threshold);

    Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& r) const;
    Eigen::MatrixXd matrix() const;
    int rank() const { return rank_; }
    /// Ratio of the largest to the smallest singular value kept.
    double condition() const { return condition_; }

private:
    Eigen::MatrixXd v_;         ///< node_count x rank
    Eigen::MatrixXd ut_;        ///< rank x g, already divided by the singular values
    int rank_ = 0;
    double condition_ = 0.0;
};

inline constexpr double kPinvThreshold = 1e-6;

struct GnOptions {
    int max_steps = 1;
    double pinv_threshold = kPinvThreshold;
};

struct ReconState {
    NodalField kappa;
    int iterations = 0;
    std::vector<double> residuals;  ///< ||ln Q(d) - G(kappa_j)||, j = 0..iterations
    bool converged = false;         ///< final residual below the initial one (or zero)
    bool clamped = false;

    NodalField sigma() const { return kappa.array().exp().matrix(); }
};

/// Gauss-Newton on the preconditioned map, started at ln(sigma0).
ReconState gauss_newton_reconstruct(const DataVector& d, const Pipeline& pipeline, const GnOptions& options = {});

/// Same iteration for a given target ln Q and start.
ReconState gauss_newton_target(const Eigen::VectorXd& target, const NodalField& kappa0, const Pipeline& pipeline,
                               const GnOptions& options = {});

enum class ParamKind { pw_linear_uniform, pw_linear_optimal, network };

std::string to_string(ParamKind kind);
ParamKind param_from_string(const std::string& name);

/// Points of the uniform reference grid: rings at r = k/l.
std::vector<Point2> uniform_points(int n);

/// Gauss-Newton steps used to approximate the limit that defines S(s) for the network kind.
inline constexpr int kParamSteps = 4;

class Parametrization {
public:
    Parametrization(ParamKind kind, std::shared_ptr<const Pipeline> pipeline,
                    GnOptions gn = {kParamSteps, kPinvThreshold});

    ParamKind kind() const { return kind_; }
    int size() const { return pipeline_->parameter_count(); }
    const Pipeline& pipeline() const { return *pipeline_; }
    std::shared_ptr<const Pipeline> pipeline_ptr() const { return pipeline_; }
    const std::vector<Point2>& points() const { return points_; }
    const GnOptions& gn() const { return gn_; }
    bool is_linear() const { return kind_ != ParamKind::network; }
    /// Nodal interpolation operator (pw-linear kinds; the sigma0 map for network).
    const LinearInterpolant& interpolant() const { return *interp_; }

    /// S(s); throws InconsistentData if the field is not positive.
    NodalField apply(const Eigen::VectorXd& s) const;

    /// D_s S at s, node_count x g.
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& s) const;

private:
    ParamKind kind_;
    std::shared_ptr<const Pipeline> pipeline_;
    GnOptions gn_;
    std::vector<Point2> points_;
    std::shared_ptr<const LinearInterpolant> interp_;
};

NodalField parametrize(const Parametrization& p, const Eigen::VectorXd& s);

/// Columns are the sensitivity basis functions at s_bar (node_count x g).
Eigen::MatrixXd sensitivity_basis(const Parametrization& p, const Eigen::VectorXd& s_bar);

}  // namespace eitnet
