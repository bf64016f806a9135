#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace eitnet {

/// Nodal field on a DiskGrid (conductivity, potential, log-conductivity).
using NodalField = Eigen::VectorXd;

/// Primary edge of the finite-volume grid.
struct GridEdge {
    int a = 0;
    int b = 0;
    double geom = 0.0;  ///< L(dual edge) / L(primary edge)
};

/// Polar staggered grid on the unit disk.
///
/// Node 0 is the center. Ring i (1..n_radial) at radius i/n_radial holds
/// n_angular nodes at angles 2 pi j / n_angular. The outer ring is the
/// boundary and its nodes come last, so interior nodes are [0, n_interior).
class DiskGrid {
public:
    DiskGrid(int n_radial, int n_angular);

    int n_radial() const { return n_radial_; }
    int n_angular() const { return n_angular_; }
    int node_count() const { return static_cast<int>(r_.size()); }
    int interior_count() const { return node_count() - n_angular_; }
    int boundary_node(int j) const { return interior_count() + j; }
    int node(int ring, int j) const { return ring == 0 ? 0 : 1 + (ring - 1) * n_angular_ + j; }

    double dr() const { return 1.0 / n_radial_; }
    double dtheta() const;
    double boundary_weight() const { return dtheta(); }

    double r(int k) const { return r_[k]; }
    double theta(int k) const { return theta_[k]; }
    double x(int k) const;
    double y(int k) const;
    double area(int k) const { return area_[k]; }
    const Eigen::VectorXd& areas() const { return area_; }
    const std::vector<GridEdge>& edges() const { return edges_; }

    /// Edge conductances for nodal sigma (midpoint value times geometry).
    Eigen::VectorXd conductances(const NodalField& sigma) const;

    /// Bilinear interpolation in (r, theta).
    double interpolate(const NodalField& f, double x, double y) const;

    /// L2(disk) inner product by nodal quadrature.
    double integrate(const NodalField& f) const { return area_.dot(f); }

private:
    int n_radial_;
    int n_angular_;
    Eigen::VectorXd r_;
    Eigen::VectorXd theta_;
    Eigen::VectorXd area_;
    std::vector<GridEdge> edges_;
};

DiskGrid build_grid(int n_radial, int n_angular);

/// Factored finite-volume system for one conductivity.
class FvSystem {
public:
    FvSystem(const DiskGrid& grid, const NodalField& sigma);

    const DiskGrid& grid() const { return *grid_; }
    const Eigen::VectorXd& gamma() const { return gamma_; }

    /// Full nodal potentials for boundary data (one column per data set).
    Eigen::MatrixXd solve(const Eigen::MatrixXd& boundary) const;

    /// Weighted boundary fluxes of full nodal potentials.
    Eigen::MatrixXd boundary_flux(const Eigen::MatrixXd& u) const;

    /// Schur complement of the interior nodes.
    Eigen::MatrixXd dtn() const;

private:
    const DiskGrid* grid_;
    Eigen::VectorXd gamma_;
    Eigen::SparseMatrix<double> kii_;
    Eigen::SparseMatrix<double> kib_;
    Eigen::SparseMatrix<double> kbb_;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

NodalField solve_dirichlet(const DiskGrid& grid, const NodalField& sigma,
                           const Eigen::VectorXd& boundary_values);

Eigen::MatrixXd continuum_dtn(const DiskGrid& grid, const NodalField& sigma);

/// Weighted graph Laplacian of the whole grid (dense; for small oracles).
Eigen::MatrixXd dense_laplacian(const DiskGrid& grid, const NodalField& sigma);

}  // namespace eitnet
