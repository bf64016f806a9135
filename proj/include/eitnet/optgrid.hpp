#pragma once

#include "eitnet/grid.hpp"
#include "eitnet/measurement.hpp"
#include "eitnet/network.hpp"
#include "eitnet/triangulation.hpp"

#include <vector>

namespace eitnet {

struct ForwardJacobian {
    DataVector data;
    Eigen::MatrixXd jacobian;  ///< g x node_count, derivative w.r.t. nodal sigma
};

ForwardJacobian forward_with_jacobian(const DiskGrid& grid, const NodalField& sigma, const ElectrodeSet& electrodes);

Eigen::MatrixXd dsigma_forward(const NodalField& sigma, const ElectrodeSet& electrodes, const DiskGrid& grid);

/// Recovery that must reproduce exact data (reference conductances, sensitivities).
RecoveryConfig exact_recovery();

struct SensitivityField {
    Eigen::MatrixXd nodal;  ///< g x node_count: d gamma_k / d sigma(node)
    ConductanceVector gamma;
    double condition = 0.0;  ///< of D_gamma F at gamma

    /// Per unit area (divides by the dual cell areas).
    Eigen::MatrixXd density(const DiskGrid& grid) const;
};

SensitivityField dsigma_gamma(const NodalField& sigma, const ElectrodeSet& electrodes, const DiskGrid& grid,
                              const NetworkGraph& graph, const RecoveryConfig& recovery = exact_recovery(),
                              const Eigen::VectorXd& kappa_start = {});

struct OptimalGrid {
    std::vector<int> nodes;  ///< fine-grid node of each P_k
    std::vector<Point2> points;
    ConductanceVector gamma1;
    Triangulation triangulation;
    LinearInterpolant interpolant;  ///< values at P_k -> fine-grid field
    double recovery_residual = 0.0;  ///< ||F_net(gamma1) - F(1)|| / ||F(1)||
    int boundary_points = 0;         ///< P_k landing on the fine boundary
};

OptimalGrid optimal_grid(const ElectrodeSet& electrodes, const DiskGrid& grid, const NetworkGraph& graph);

/// Interpolation operator on fine nodes for scattered points (pw-linear kinds).
LinearInterpolant fine_interpolant(const Triangulation& tri, const DiskGrid& grid, const BoundaryGeometry& geometry);

}  // namespace eitnet
