#include "eitnet/grid.hpp"

#include "eitnet/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace eitnet {

namespace {

constexpr double kPi = std::numbers::pi;

using Triplets = std::vector<Eigen::Triplet<double>>;

}  // namespace

DiskGrid::DiskGrid(int n_radial, int n_angular) : n_radial_(n_radial), n_angular_(n_angular) {
    if (n_radial < 2 || n_angular < 8) {
        std::ostringstream msg;
        msg << "build_grid: need n_radial >= 2 and n_angular >= 8 (got " << n_radial << ", "
            << n_angular << ")";
        throw ConfigError(msg.str());
    }
    const int n = 1 + n_radial * n_angular;
    const double h = dr();
    const double dth = dtheta();
    r_.resize(n);
    theta_.resize(n);
    area_.resize(n);
    r_[0] = 0.0;
    theta_[0] = 0.0;
    area_[0] = kPi * 0.25 * h * h;
    for (int i = 1; i <= n_radial; ++i) {
        const double ri = i * h;
        for (int j = 0; j < n_angular; ++j) {
            const int k = node(i, j);
            r_[k] = ri;
            theta_[k] = j * dth;
            if (i < n_radial)
                area_[k] = ri * h * dth;
            else
                area_[k] = 0.5 * dth * (1.0 - (1.0 - 0.5 * h) * (1.0 - 0.5 * h));
        }
    }

    edges_.reserve(static_cast<size_t>(2 * n_radial * n_angular));
    // spokes from the center cell, dual arc at r = h/2
    for (int j = 0; j < n_angular; ++j) edges_.push_back({0, node(1, j), 0.5 * h * dth / h});
    for (int i = 1; i <= n_radial; ++i) {
        const double ri = i * h;
        const double dual = (i < n_radial) ? h : 0.5 * h;
        for (int j = 0; j < n_angular; ++j)
            edges_.push_back({node(i, j), node(i, (j + 1) % n_angular), dual / (ri * dth)});
        if (i < n_radial) {
            const double rmid = (i + 0.5) * h;
            for (int j = 0; j < n_angular; ++j)
                edges_.push_back({node(i, j), node(i + 1, j), rmid * dth / h});
        }
    }
}

double DiskGrid::dtheta() const { return 2.0 * kPi / n_angular_; }

double DiskGrid::x(int k) const { return r_[k] * std::cos(theta_[k]); }

double DiskGrid::y(int k) const { return r_[k] * std::sin(theta_[k]); }

Eigen::VectorXd DiskGrid::conductances(const NodalField& sigma) const {
    Eigen::VectorXd g(edges_.size());
    for (size_t e = 0; e < edges_.size(); ++e) {
        const GridEdge& ed = edges_[e];
        g[static_cast<Eigen::Index>(e)] = ed.geom * 0.5 * (sigma[ed.a] + sigma[ed.b]);
    }
    return g;
}

double DiskGrid::interpolate(const NodalField& f, double xq, double yq) const {
    const double rq = std::min(1.0, std::hypot(xq, yq));
    double tq = std::atan2(yq, xq);
    if (tq < 0) tq += 2.0 * kPi;
    const double s = tq / dtheta();
    int j0 = static_cast<int>(std::floor(s));
    const double wt = s - j0;
    j0 %= n_angular_;
    const int j1 = (j0 + 1) % n_angular_;
    const double rs = rq / dr();
    int i0 = std::min(static_cast<int>(std::floor(rs)), n_radial_ - 1);
    const double wr = rs - i0;
    auto ring_value = [&](int i) {
        if (i == 0) return f[0];
        return (1.0 - wt) * f[node(i, j0)] + wt * f[node(i, j1)];
    };
    return (1.0 - wr) * ring_value(i0) + wr * ring_value(i0 + 1);
}

DiskGrid build_grid(int n_radial, int n_angular) { return DiskGrid(n_radial, n_angular); }

FvSystem::FvSystem(const DiskGrid& grid, const NodalField& sigma) : grid_(&grid) {
    if (sigma.size() != grid.node_count())
        throw ConfigError("FvSystem: sigma has wrong length");
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (!(sigma[k] > 0.0) || !std::isfinite(sigma[k])) {
            std::ostringstream msg;
            msg << "FvSystem: conductivity not positive at node " << k << " (r=" << grid.r(static_cast<int>(k))
                << ", theta=" << grid.theta(static_cast<int>(k)) << ")";
            throw ConfigError(msg.str());
        }
    }
    gamma_ = grid.conductances(sigma);
    const int ni = grid.interior_count();
    const int nb = grid.n_angular();
    Triplets tii, tib, tbb;
    tii.reserve(grid.edges().size() * 4);
    for (size_t e = 0; e < grid.edges().size(); ++e) {
        const GridEdge& ed = grid.edges()[e];
        const double g = gamma_[static_cast<Eigen::Index>(e)];
        const bool ba = ed.a >= ni, bb = ed.b >= ni;
        const int a = ba ? ed.a - ni : ed.a;
        const int b = bb ? ed.b - ni : ed.b;
        (ba ? tbb : tii).emplace_back(a, a, g);
        (bb ? tbb : tii).emplace_back(b, b, g);
        if (!ba && !bb) {
            tii.emplace_back(a, b, -g);
            tii.emplace_back(b, a, -g);
        } else if (ba && bb) {
            tbb.emplace_back(a, b, -g);
            tbb.emplace_back(b, a, -g);
        } else if (bb) {
            tib.emplace_back(a, b, -g);
        } else {
            tib.emplace_back(b, a, -g);
        }
    }
    kii_.resize(ni, ni);
    kii_.setFromTriplets(tii.begin(), tii.end());
    kib_.resize(ni, nb);
    kib_.setFromTriplets(tib.begin(), tib.end());
    kbb_.resize(nb, nb);
    kbb_.setFromTriplets(tbb.begin(), tbb.end());
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(kii_);
    if (ldlt_->info() != Eigen::Success)
        throw SolverError("FvSystem: factorization of the interior block failed");
}

Eigen::MatrixXd FvSystem::solve(const Eigen::MatrixXd& boundary) const {
    const int ni = grid_->interior_count();
    const int nb = grid_->n_angular();
    if (boundary.rows() != nb) throw ConfigError("FvSystem::solve: boundary data has wrong length");
    Eigen::MatrixXd rhs = -(kib_ * boundary);
    Eigen::MatrixXd ui = ldlt_->solve(rhs);
    if (ldlt_->info() != Eigen::Success || !ui.allFinite())
        throw SolverError("FvSystem::solve: interior solve failed");
    Eigen::MatrixXd u(ni + nb, boundary.cols());
    u.topRows(ni) = ui;
    u.bottomRows(nb) = boundary;
    return u;
}

Eigen::MatrixXd FvSystem::boundary_flux(const Eigen::MatrixXd& u) const {
    const int ni = grid_->interior_count();
    const int nb = grid_->n_angular();
    return kbb_ * u.bottomRows(nb) + kib_.transpose() * u.topRows(ni);
}

Eigen::MatrixXd FvSystem::dtn() const {
    const int nb = grid_->n_angular();
    const Eigen::MatrixXd u = solve(Eigen::MatrixXd::Identity(nb, nb));
    return boundary_flux(u);
}

NodalField solve_dirichlet(const DiskGrid& grid, const NodalField& sigma,
                           const Eigen::VectorXd& boundary_values) {
    FvSystem sys(grid, sigma);
    return sys.solve(boundary_values);
}

Eigen::MatrixXd continuum_dtn(const DiskGrid& grid, const NodalField& sigma) {
    return FvSystem(grid, sigma).dtn();
}

Eigen::MatrixXd dense_laplacian(const DiskGrid& grid, const NodalField& sigma) {
    const Eigen::VectorXd g = grid.conductances(sigma);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(grid.node_count(), grid.node_count());
    for (size_t e = 0; e < grid.edges().size(); ++e) {
        const GridEdge& ed = grid.edges()[e];
        const double w = g[static_cast<Eigen::Index>(e)];
        k(ed.a, ed.a) += w;
        k(ed.b, ed.b) += w;
        k(ed.a, ed.b) -= w;
        k(ed.b, ed.a) -= w;
    }
    return k;
}

}  // namespace eitnet
