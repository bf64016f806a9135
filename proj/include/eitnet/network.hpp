#pragma once

#include "eitnet/measurement.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace eitnet {

enum class TopologyKind { circular, pyramidal, two_sided };

std::string to_string(TopologyKind kind);
TopologyKind topology_from_string(const std::string& name);

/// Critical planar network. Nodes 0..n-1 are the boundary nodes in circular order.
///
/// Edge order:
///  circular  - by layer from the boundary inwards, then by angle index;
///  pyramidal - by medial-line crossing (a, b), a = 2..n, b = 1..a-1;
///  two-sided - by sorting-network stage, then row.
struct NetworkGraph {
    TopologyKind kind = TopologyKind::circular;
    int n = 0;
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> edge_layer;  ///< circular only: 1-based layer of each edge

    int edge_count() const { return static_cast<int>(edges.size()); }
    int interior_count() const { return node_count - n; }
    bool is_boundary(int v) const { return v < n; }
};

NetworkGraph build_topology(TopologyKind kind, int n);

using ConductanceVector = Eigen::VectorXd;

Eigen::MatrixXd network_laplacian(const NetworkGraph& graph, const ConductanceVector& gamma);

/// Harmonic extension of unit boundary data (node_count x n); rows 0..n-1 are I.
Eigen::MatrixXd harmonic_extension(const NetworkGraph& graph, const ConductanceVector& gamma);

Eigen::MatrixXd network_dtn(const NetworkGraph& graph, const ConductanceVector& gamma);

DataVector discrete_forward(const ConductanceVector& gamma, const NetworkGraph& graph);

/// d vec(Lambda_gamma) / d gamma, g x g.
Eigen::MatrixXd jacobian_discrete_forward(const ConductanceVector& gamma, const NetworkGraph& graph);

/// Direct recovery for circular networks; throws InconsistentData.
ConductanceVector layer_peel_circular(const DataVector& d, const NetworkGraph& graph);

/// Same algorithm for any critical graph the planner can reduce.
ConductanceVector layer_peel(const DataVector& d, const NetworkGraph& graph);

struct FitOptions {
    double shift = 1e-4;        ///< Hessian diagonal shift, times 1/C_11
    double gradient_drop = 1e-4;
    int max_iterations = 300;
};

struct FitResult {
    ConductanceVector gamma;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    double misfit = 0.0;  ///< unweighted ||F(gamma) - d||
};

/// Regularized Gauss-Newton in kappa = ln gamma, started at kappa_start.
FitResult fit_conductances(const DataVector& d, const Eigen::VectorXd& covariance, double alpha,
                           const Eigen::VectorXd& kappa_ref, const NetworkGraph& graph,
                           const Eigen::VectorXd& kappa_start, const FitOptions& options = {});

/// Convenience overload starting at kappa_ref.
FitResult fit_conductances(const DataVector& d, const Eigen::VectorXd& covariance, double alpha,
                           const Eigen::VectorXd& kappa_ref, const NetworkGraph& graph);

enum class RecoveryMethod { peel_then_fit, fit };

struct RecoveryConfig {
    RecoveryMethod method = RecoveryMethod::peel_then_fit;
    double alpha = 0.0;  ///< regularization of the fallback fit
    FitOptions fit;
};

struct RecoveryResult {
    ConductanceVector gamma;
    bool peeled = false;
    bool converged = true;
};

/// gamma from data: layer peeling for circular graphs when configured,
/// falling back to fit_conductances(alpha, kappa_ref) started at kappa_ref.
RecoveryResult recover_conductances(const DataVector& d, const NetworkGraph& graph, const RecoveryConfig& config,
                                    const Eigen::VectorXd& kappa_ref, const Eigen::VectorXd& covariance);

}  // namespace eitnet
