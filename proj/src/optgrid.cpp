#include "eitnet/optgrid.hpp"

#include "eitnet/error.hpp"

#include <cmath>
#include <sstream>

namespace eitnet {

namespace {
constexpr double kShareLevel = 0.9;
}

ForwardJacobian forward_with_jacobian(const DiskGrid& grid, const NodalField& sigma, const ElectrodeSet& electrodes) {
    const FvSystem sys(grid, sigma);
    const ElectrodeResponse resp = electrode_response(sys, electrodes);
    const int n = electrodes.n;
    const auto& edges = grid.edges();
    // edge differences of the electrode potentials
    Eigen::MatrixXd du(static_cast<Eigen::Index>(edges.size()), n);
    for (size_t e = 0; e < edges.size(); ++e)
        du.row(static_cast<Eigen::Index>(e)) = resp.potentials.row(edges[e].a) - resp.potentials.row(edges[e].b);
    ForwardJacobian out;
    out.data = resp.data;
    out.jacobian = Eigen::MatrixXd::Zero(pair_count(n), grid.node_count());
    Eigen::Index p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p)
            for (size_t e = 0; e < edges.size(); ++e) {
                const Eigen::Index ee = static_cast<Eigen::Index>(e);
                const double v = 0.5 * edges[e].geom * du(ee, i) * du(ee, j);
                out.jacobian(p, edges[e].a) += v;
                out.jacobian(p, edges[e].b) += v;
            }
    return out;
}

Eigen::MatrixXd dsigma_forward(const NodalField& sigma, const ElectrodeSet& electrodes, const DiskGrid& grid) {
    return forward_with_jacobian(grid, sigma, electrodes).jacobian;
}

RecoveryConfig exact_recovery() {
    RecoveryConfig rc;
    rc.method = RecoveryMethod::peel_then_fit;
    rc.alpha = 0.0;
    rc.fit.gradient_drop = 1e-13;
    rc.fit.shift = 1e-10;
    rc.fit.max_iterations = 300;
    return rc;
}

Eigen::MatrixXd SensitivityField::density(const DiskGrid& grid) const {
    return nodal * grid.areas().cwiseInverse().asDiagonal();
}

SensitivityField dsigma_gamma(const NodalField& sigma, const ElectrodeSet& electrodes, const DiskGrid& grid,
                              const NetworkGraph& graph, const RecoveryConfig& recovery,
                              const Eigen::VectorXd& kappa_start) {
    const ForwardJacobian fj = forward_with_jacobian(grid, sigma, electrodes);
    const int g = graph.edge_count();
    const Eigen::VectorXd start = kappa_start.size() == g ? kappa_start : Eigen::VectorXd::Zero(g);
    const Eigen::VectorXd cov = Eigen::VectorXd::Ones(g);
    SensitivityField out;
    out.gamma = recover_conductances(fj.data, graph, recovery, start, cov).gamma;
    const Eigen::MatrixXd jg = jacobian_discrete_forward(out.gamma, graph);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jg);
    const Eigen::VectorXd sv = svd.singularValues();
    out.condition = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    if (!std::isfinite(out.condition)) {
        std::ostringstream msg;
        msg << "dsigma_gamma: singular network Jacobian (condition " << out.condition << ")";
        throw SolverError(msg.str());
    }
    out.nodal = jg.partialPivLu().solve(fj.jacobian);
    return out;
}

LinearInterpolant fine_interpolant(const Triangulation& tri, const DiskGrid& grid, const BoundaryGeometry& geometry) {
    std::vector<Point2> q(static_cast<size_t>(grid.node_count()));
    for (int k = 0; k < grid.node_count(); ++k) q[static_cast<size_t>(k)] = {grid.x(k), grid.y(k)};
    const bool full = geometry.access == BoundaryAccess::full;
    auto extend = [&](Point2 z) {
        if (full) return true;
        const double t = std::atan2(z.y, z.x);
        if (!geometry.accessible(t)) return false;
        const Point2 edge{std::cos(t), std::sin(t)};
        return !tri.segment_hits_hull(z, edge);
    };
    return build_interpolant(tri, q, extend, 1.0);
}

OptimalGrid optimal_grid(const ElectrodeSet& electrodes, const DiskGrid& grid, const NetworkGraph& graph) {
    if (electrodes.n != graph.n) throw ConfigError("optimal_grid: electrode count differs from network size");
    const NodalField one = NodalField::Ones(grid.node_count());
    const SensitivityField sens = dsigma_gamma(one, electrodes, grid, graph);
    const Eigen::MatrixXd dens = sens.density(grid);
    OptimalGrid out;
    out.gamma1 = sens.gamma;
    for (Eigen::Index e = 0; e < out.gamma1.size(); ++e)
        if (!(out.gamma1[e] > 0.0)) throw SolverError("optimal_grid: reference conductance not positive");
    const DataVector f1 = forward_map(one, electrodes, grid);
    out.recovery_residual = (discrete_forward(out.gamma1, graph) - f1).norm() / f1.norm();
    // Raw density peaks sit on the electrodes for every edge, so each edge is located by its
    // share of the total relative sensitivity. The share of an edge is reflection symmetric
    // about its own axis and often has two mirrored maxima; the centroid of the level set near
    // the maximum keeps the points on the axis.
    Eigen::MatrixXd share = out.gamma1.cwiseInverse().asDiagonal() * dens;
    const Eigen::RowVectorXd total = share.cwiseAbs().colwise().sum();
    for (int v = 0; v < grid.node_count(); ++v)
        if (total[v] > 0.0) share.col(v) /= total[v];
    for (int k = 0; k < graph.edge_count(); ++k) {
        const double top = share.row(k).maxCoeff();
        double wsum = 0.0, cx = 0.0, cy = 0.0;
        for (int v = 0; v < grid.node_count(); ++v) {
            if (share(k, v) < kShareLevel * top) continue;
            const double w = grid.area(v) * share(k, v);
            wsum += w;
            cx += w * grid.x(v);
            cy += w * grid.y(v);
        }
        const Point2 p{cx / wsum, cy / wsum};
        int best = 0;
        double bd = 1e300;
        for (int v = 0; v < grid.node_count(); ++v) {
            const double d = std::hypot(grid.x(v) - p.x, grid.y(v) - p.y);
            if (d < bd) bd = d, best = v;
        }
        out.nodes.push_back(best);
        out.points.push_back(p);
        if (best >= grid.interior_count()) ++out.boundary_points;
    }
    out.triangulation = Triangulation(out.points);
    out.interpolant = fine_interpolant(out.triangulation, grid, electrodes.geometry);
    return out;
}

}  // namespace eitnet
