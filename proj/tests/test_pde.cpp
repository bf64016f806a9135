#include "eitnet/error.hpp"
#include "eitnet/grid.hpp"
#include "eitnet/phantom.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace eitnet;

namespace {

constexpr double kPi = std::numbers::pi;

NodalField ones(const DiskGrid& g) { return NodalField::Ones(g.node_count()); }

Eigen::VectorXd boundary_wave(const DiskGrid& g, int k) {
    Eigen::VectorXd v(g.n_angular());
    for (int j = 0; j < g.n_angular(); ++j) v[j] = std::cos(k * 2.0 * kPi * j / g.n_angular());
    return v;
}

double asymmetry(const Eigen::MatrixXd& a) { return (a - a.transpose()).norm() / a.norm(); }

}  // namespace

TEST(Grid, CountsSmall) {
    const DiskGrid g = build_grid(2, 8);
    EXPECT_EQ(g.node_count(), 17);
    EXPECT_EQ(g.interior_count(), 9);
}

TEST(Grid, BoundaryAngles) {
    const DiskGrid g = build_grid(50, 100);
    EXPECT_EQ(g.node_count(), 5001);
    for (int j = 0; j < 100; ++j) {
        const int k = g.boundary_node(j);
        EXPECT_NEAR(g.r(k), 1.0, 1e-15);
        EXPECT_NEAR(g.theta(k), 2.0 * kPi * j / 100, 1e-12);
    }
}

TEST(Grid, AreaSumsToPi) {
    for (auto [nr, na] : {std::pair{2, 8}, {13, 37}, {60, 100}}) {
        const DiskGrid g = build_grid(nr, na);
        EXPECT_NEAR(g.areas().sum(), kPi, 1e-10) << nr << "x" << na;
    }
}

TEST(Grid, Incidence) {
    const DiskGrid g = build_grid(6, 12);
    std::vector<int> deg(static_cast<size_t>(g.node_count()), 0);
    for (const GridEdge& e : g.edges()) {
        ++deg[static_cast<size_t>(e.a)];
        ++deg[static_cast<size_t>(e.b)];
        EXPECT_GT(e.geom, 0.0);
    }
    EXPECT_EQ(deg[0], 12);
    for (int k = 1; k < g.interior_count(); ++k) EXPECT_EQ(deg[static_cast<size_t>(k)], 4) << k;
}

TEST(Grid, RejectsTooSmall) {
    EXPECT_THROW(build_grid(1, 8), ConfigError);
    EXPECT_THROW(build_grid(4, 7), ConfigError);
}

TEST(Dirichlet, LinearHarmonic) {
    const DiskGrid g = build_grid(40, 96);
    const NodalField u = solve_dirichlet(g, ones(g), boundary_wave(g, 1));
    const int k = g.node(20, 0);  // r = 0.5, theta = 0
    EXPECT_NEAR(g.r(k), 0.5, 1e-14);
    EXPECT_NEAR(u[k], 0.5, 5e-3);
    double err = 0.0;
    for (int i = 0; i < g.node_count(); ++i) err = std::max(err, std::abs(u[i] - g.x(i)));
    EXPECT_LT(err, 5e-3);
}

TEST(Dirichlet, LinearHarmonicSecondOrder) {
    auto err = [](int nr, int na) {
        const DiskGrid g = build_grid(nr, na);
        const NodalField u = solve_dirichlet(g, ones(g), boundary_wave(g, 1));
        double e = 0.0;
        for (int i = 0; i < g.node_count(); ++i) e = std::max(e, std::abs(u[i] - g.x(i)));
        return e;
    };
    const double coarse = err(10, 32), fine = err(20, 64);
    EXPECT_GT(coarse / fine, 3.0);
}

TEST(Dirichlet, ConstantsExact) {
    const DiskGrid g = build_grid(12, 24);
    const NodalField u = solve_dirichlet(g, ones(g), Eigen::VectorXd::Ones(24));
    EXPECT_LT((u - ones(g)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Dirichlet, DenseOracle) {
    const DiskGrid g = build_grid(10, 24);
    NodalField sigma(g.node_count());
    for (int k = 0; k < g.node_count(); ++k) sigma[k] = 1.0 + g.r(k) * g.r(k);
    const Eigen::VectorXd b = boundary_wave(g, 3);
    const NodalField u = solve_dirichlet(g, sigma, b);

    const Eigen::MatrixXd k = dense_laplacian(g, sigma);
    const int ni = g.interior_count();
    const Eigen::MatrixXd kii = k.topLeftCorner(ni, ni);
    const Eigen::MatrixXd kib = k.topRightCorner(ni, g.n_angular());
    const Eigen::VectorXd ui = kii.fullPivLu().solve(-kib * b);
    EXPECT_LT((u.head(ni) - ui).norm() / ui.norm(), 1e-12);
    EXPECT_LT((u.tail(g.n_angular()) - b).norm(), 1e-15);
}

TEST(Dtn, RayleighQuotients) {
    auto worst = [](int nr, int na) {
        const DiskGrid g = build_grid(nr, na);
        const Eigen::MatrixXd a = continuum_dtn(g, ones(g));
        double e = 0.0;
        for (int k = 1; k <= 5; ++k) {
            const Eigen::VectorXd v = boundary_wave(g, k);
            const double rq = v.dot(a * v) / v.squaredNorm();
            e = std::max(e, std::abs(rq / (k * g.boundary_weight()) - 1.0));
        }
        return e;
    };
    const double coarse = worst(20, 48), fine = worst(40, 96);
    EXPECT_LT(fine, 2e-2);
    EXPECT_LT(fine, coarse);
}

TEST(Dtn, SymmetricAndConservative) {
    const DiskGrid g = build_grid(16, 40);
    const NodalField chest = define_phantom(PhantomSpec::default_chest(), g);
    const NodalField smooth = define_phantom(PhantomSpec::default_smooth(), g);
    for (const NodalField* s : {&chest, &smooth}) {
        const Eigen::MatrixXd a = continuum_dtn(g, *s);
        EXPECT_LT(asymmetry(a), 1e-10);
        EXPECT_LT(a.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10 * a.norm());
    }
}

TEST(Dtn, ScalesWithSigma) {
    const DiskGrid g = build_grid(12, 32);
    const NodalField s = define_phantom(PhantomSpec::default_smooth(), g);
    const Eigen::MatrixXd a = continuum_dtn(g, s);
    const Eigen::MatrixXd b = continuum_dtn(g, 3.5 * s);
    EXPECT_LT((b - 3.5 * a).norm(), 1e-12 * b.norm());
}

TEST(Dtn, FluxExtraction) {
    // column j: flux of the discrete harmonic extension of e_j, read off the full operator
    const DiskGrid g = build_grid(14, 36);
    const NodalField s = define_phantom(PhantomSpec::default_chest(), g);
    const Eigen::MatrixXd a = continuum_dtn(g, s);
    const Eigen::MatrixXd k = dense_laplacian(g, s);
    const int nb = g.n_angular();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nb, nb);
    for (int j = 0; j < nb; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nb);
        e[j] = 1.0;
        const NodalField u = solve_dirichlet(g, s, e);
        b.col(j) = (k * u).tail(nb);
    }
    EXPECT_LT((a - b).norm() / a.norm(), 1e-8);
}

TEST(Fv, RejectsNonpositiveSigma) {
    const DiskGrid g = build_grid(4, 8);
    NodalField s = ones(g);
    s[3] = -1.0;
    EXPECT_THROW(continuum_dtn(g, s), ConfigError);
}
