#include "eitnet/error.hpp"
#include "eitnet/measurement.hpp"
#include "eitnet/network.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace eitnet;

namespace {

ConductanceVector random_gamma(int g, std::uint64_t seed, double lo = 0.5, double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    ConductanceVector v(g);
    for (int k = 0; k < g; ++k) v[k] = u(rng);
    return v;
}

// Dense Schur complement assembled edge by edge, independent of network_laplacian.
Eigen::MatrixXd dense_dtn(const NetworkGraph& g, const ConductanceVector& gamma) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(g.node_count, g.node_count);
    for (int e = 0; e < g.edge_count(); ++e) {
        const auto [a, b] = g.edges[static_cast<size_t>(e)];
        k(a, a) += gamma[e];
        k(b, b) += gamma[e];
        k(a, b) -= gamma[e];
        k(b, a) -= gamma[e];
    }
    const int n = g.n, m = g.interior_count();
    if (m == 0) return k;
    const Eigen::MatrixXd kii = k.bottomRightCorner(m, m);
    const Eigen::MatrixXd kib = k.bottomLeftCorner(m, n);
    return k.topLeftCorner(n, n) - kib.transpose() * kii.fullPivLu().solve(kib);
}

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseQuotient(b).cwiseAbs().maxCoeff();
}

bool connected(const NetworkGraph& g) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(g.node_count));
    for (auto [a, b] : g.edges) {
        adj[static_cast<size_t>(a)].push_back(b);
        adj[static_cast<size_t>(b)].push_back(a);
    }
    std::vector<int> stack = {0};
    std::set<int> seen = {0};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<size_t>(v)])
            if (seen.insert(w).second) stack.push_back(w);
    }
    return static_cast<int>(seen.size()) == g.node_count;
}

}  // namespace

TEST(Topology, Counts) {
    const NetworkGraph c11 = build_topology(TopologyKind::circular, 11);
    EXPECT_EQ(c11.edge_count(), 55);
    EXPECT_EQ(*std::max_element(c11.edge_layer.begin(), c11.edge_layer.end()), 5);
    EXPECT_EQ(build_topology(TopologyKind::circular, 29).edge_count(), 406);
    EXPECT_EQ(build_topology(TopologyKind::two_sided, 16).edge_count(), 120);
    for (int n : {3, 5, 7, 9, 13}) EXPECT_EQ(build_topology(TopologyKind::circular, n).edge_count(), pair_count(n));
    for (int n = 3; n <= 12; ++n) EXPECT_EQ(build_topology(TopologyKind::pyramidal, n).edge_count(), pair_count(n));
    for (int n : {4, 6, 8, 10, 16}) EXPECT_EQ(build_topology(TopologyKind::two_sided, n).edge_count(), pair_count(n));
}

TEST(Topology, Connected) {
    for (int n : {5, 7, 11}) EXPECT_TRUE(connected(build_topology(TopologyKind::circular, n)));
    for (int n : {5, 8}) EXPECT_TRUE(connected(build_topology(TopologyKind::pyramidal, n)));
    for (int n : {6, 16}) EXPECT_TRUE(connected(build_topology(TopologyKind::two_sided, n)));
}

TEST(Topology, ParityRejected) {
    EXPECT_THROW(build_topology(TopologyKind::circular, 8), ConfigError);
    EXPECT_THROW(build_topology(TopologyKind::two_sided, 7), ConfigError);
    EXPECT_THROW(build_topology(TopologyKind::pyramidal, 2), ConfigError);
}

TEST(Topology, TwoSidedHalves) {
    // n = 16 boundary nodes split over two accessible arcs, 8 each
    const ElectrodeSet es =
        build_electrodes(16, BoundaryGeometry::two_sided({-1.2, 1.2}, {std::numbers::pi - 1.2, std::numbers::pi + 1.2}), 96);
    int first = 0;
    for (double c : es.centers) first += c < 1.2;
    EXPECT_EQ(first, 8);
}

TEST(NetworkDtn, Star) {
    const NetworkGraph star = build_topology(TopologyKind::circular, 3);
    const Eigen::MatrixXd a = network_dtn(star, ConductanceVector::Ones(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(a(i, j), i == j ? 2.0 / 3 : -1.0 / 3, 1e-15);
}

TEST(NetworkDtn, DenseOracleAndProperties) {
    for (auto [kind, n] : {std::pair{TopologyKind::circular, 5}, {TopologyKind::circular, 11},
                           {TopologyKind::pyramidal, 6}, {TopologyKind::two_sided, 8}}) {
        const NetworkGraph g = build_topology(kind, n);
        const ConductanceVector gamma = random_gamma(g.edge_count(), 11 + n);
        const Eigen::MatrixXd a = network_dtn(g, gamma);
        EXPECT_LT((a - dense_dtn(g, gamma)).norm(), 1e-12 * a.norm()) << to_string(kind) << n;
        EXPECT_LT((a - a.transpose()).norm(), 1e-13 * a.norm());
        EXPECT_LT(a.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12 * a.norm());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) EXPECT_LE(a(i, j), 0.0);
        EXPECT_LT((network_dtn(g, 4.0 * gamma) - 4.0 * a).norm(), 1e-12 * a.norm());
        EXPECT_EQ(discrete_forward(gamma, g), vec_upper(a));
    }
}

TEST(NetworkDtn, OneToOneProbe) {
    const NetworkGraph g = build_topology(TopologyKind::circular, 7);
    std::vector<DataVector> d;
    for (int t = 0; t < 20; ++t) d.push_back(discrete_forward(random_gamma(21, 300 + t), g));
    for (size_t i = 0; i < d.size(); ++i)
        for (size_t j = i + 1; j < d.size(); ++j) EXPECT_GT((d[i] - d[j]).norm(), 1e-6);
}

TEST(Peel, RoundTripCircular) {
    for (int n : {5, 7, 9, 11}) {
        const NetworkGraph g = build_topology(TopologyKind::circular, n);
        double worst = 0.0;
        for (int t = 0; t < 25; ++t) {
            const ConductanceVector gamma = random_gamma(g.edge_count(), 1000 * n + t);
            worst = std::max(worst, max_rel(layer_peel_circular(discrete_forward(gamma, g), g), gamma));
        }
        EXPECT_LT(worst, 1e-8) << "n = " << n;
    }
}

TEST(Peel, RoundTripOtherTopologies) {
    for (auto [kind, n] : {std::pair{TopologyKind::pyramidal, 5}, {TopologyKind::pyramidal, 8},
                           {TopologyKind::two_sided, 6}, {TopologyKind::two_sided, 10}}) {
        const NetworkGraph g = build_topology(kind, n);
        const ConductanceVector gamma = random_gamma(g.edge_count(), 77 + n);
        EXPECT_LT(max_rel(layer_peel(discrete_forward(gamma, g), g), gamma), 1e-8) << to_string(kind) << n;
    }
    EXPECT_THROW(layer_peel_circular(DataVector::Zero(15), build_topology(TopologyKind::pyramidal, 6)), ConfigError);
}

TEST(Peel, ContinuumDataGivesPositiveNetwork) {
    const DiskGrid grid(30, 98);
    const ElectrodeSet es = build_electrodes(7, BoundaryGeometry::full(), 98);
    const DataVector d = forward_map(NodalField::Ones(grid.node_count()), es, grid);
    const NetworkGraph g = build_topology(TopologyKind::circular, 7);
    const ConductanceVector gamma = layer_peel_circular(d, g);
    EXPECT_GT(gamma.minCoeff(), 0.0);
    EXPECT_LT((discrete_forward(gamma, g) - d).norm(), 1e-10 * d.norm());
}

TEST(Peel, UnstableUnderTenPercentNoise) {
    const NetworkGraph g = build_topology(TopologyKind::circular, 11);
    const ConductanceVector gamma = random_gamma(55, 5);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    int raised = 0, wild = 0;
    for (int t = 0; t < 10; ++t) {
        DataVector d = discrete_forward(gamma, g);
        for (Eigen::Index k = 0; k < d.size(); ++k) d[k] *= 1.0 + 0.1 * z(rng);
        try {
            const ConductanceVector r = layer_peel_circular(d, g);
            if (max_rel(r, gamma) > 1.0) ++wild;
        } catch (const InconsistentData&) {
            ++raised;
        }
    }
    EXPECT_EQ(raised + wild, 10);
}

TEST(Fit, MatchesPeelOnConsistentData) {
    const NetworkGraph g = build_topology(TopologyKind::circular, 7);
    const ConductanceVector gamma = random_gamma(21, 42);
    const DataVector d = discrete_forward(gamma, g);
    const ConductanceVector peeled = layer_peel_circular(d, g);
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(21), zero = Eigen::VectorXd::Zero(21);
    // the default 1e-4 shift damps the weak directions, so it needs many more steps than the 300 cap
    FitOptions slow;
    slow.gradient_drop = 1e-14;
    slow.max_iterations = 3000;
    FitOptions light = slow;
    light.shift = 1e-8;
    light.max_iterations = 300;
    for (const FitOptions& o : {slow, light}) {
        const FitResult fit = fit_conductances(d, c, 0.0, zero, g, zero, o);
        EXPECT_TRUE(fit.converged);
        EXPECT_LT(max_rel(fit.gamma, peeled), 1e-6);
        EXPECT_LT(fit.misfit, 1e-10 * d.norm());
    }
}

TEST(Fit, PenaltyDominance) {
    const NetworkGraph g = build_topology(TopologyKind::circular, 5);
    const DataVector d = discrete_forward(random_gamma(10, 3), g);
    const Eigen::VectorXd kref = random_gamma(10, 4).array().log().matrix();
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(10);
    double prev = INFINITY;
    for (double alpha : {1e0, 1e3, 1e6, 1e9}) {
        const FitResult fit = fit_conductances(d, c, alpha, kref, g);
        const double dist = (fit.gamma.array().log().matrix() - kref).norm();
        EXPECT_LE(dist, prev + 1e-12);
        prev = dist;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(Fit, OnePercentAdditiveNoise) {
    const DiskGrid grid(30, 98);
    const ElectrodeSet es = build_electrodes(7, BoundaryGeometry::full(), 98);
    const NetworkGraph g = build_topology(TopologyKind::circular, 7);
    const DataVector f1 = forward_map(NodalField::Ones(grid.node_count()), es, grid);
    const ConductanceVector g1 = layer_peel_circular(f1, g);
    const NoiseGenerator gen(grid, es, 2000);
    const Eigen::VectorXd c = gen.covariance(NoiseModel::additive, 0.01);
    const Eigen::VectorXd kref = g1.array().log().matrix();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const DataVector e = gen.sample({NoiseModel::additive, 0.01, seed});
        const DataVector d = f1 + e;
        const FitResult fit = fit_conductances(d, c, 1e-3, kref, g);
        EXPECT_GT(fit.gamma.minCoeff(), 0.0);
        EXPECT_LT(fit.misfit, e.norm()) << "seed " << seed;
    }
}

TEST(Jacobian, StarEntry) {
    const NetworkGraph star = build_topology(TopologyKind::circular, 3);
    const ConductanceVector gamma = (ConductanceVector(3) << 0.7, 1.3, 2.1).finished();
    const Eigen::MatrixXd j = jacobian_discrete_forward(gamma, star);
    // d(Lambda_12)/d gamma_3: data entry 0 is (0, 1); edge 2 is the spike at node 2
    const double h = 1e-5;
    ConductanceVector gp = gamma, gm = gamma;
    gp[2] += h;
    gm[2] -= h;
    const double fd = (discrete_forward(gp, star)[0] - discrete_forward(gm, star)[0]) / (2 * h);
    EXPECT_NEAR(j(0, 2), fd, 1e-7 * std::abs(fd));
    // closed form: Lambda_12 = -g1 g2 / (g1 + g2 + g3)
    const double s = gamma.sum();
    EXPECT_NEAR(j(0, 2), gamma[0] * gamma[1] / (s * s), 1e-14);
}

TEST(Jacobian, FiniteDifferencesAndRank) {
    for (auto [kind, n] : {std::pair{TopologyKind::circular, 5}, {TopologyKind::circular, 7},
                           {TopologyKind::pyramidal, 6}, {TopologyKind::two_sided, 8}}) {
        const NetworkGraph g = build_topology(kind, n);
        const ConductanceVector gamma = random_gamma(g.edge_count(), 5 + n);
        const Eigen::MatrixXd j = jacobian_discrete_forward(gamma, g);
        for (int k = 0; k < g.edge_count(); ++k) {
            const double h = 1e-6 * gamma[k];
            ConductanceVector gp = gamma, gm = gamma;
            gp[k] += h;
            gm[k] -= h;
            const Eigen::VectorXd fd = (discrete_forward(gp, g) - discrete_forward(gm, g)) / (2 * h);
            EXPECT_LT((j.col(k) - fd).norm(), 1e-6 * fd.norm()) << to_string(kind) << n << " edge " << k;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
        const Eigen::VectorXd sv = svd.singularValues();
        EXPECT_GT(sv[sv.size() - 1], 1e-10 * sv[0]) << to_string(kind) << n;
    }
}

TEST(Recovery, FallsBackToFit) {
    const NetworkGraph g = build_topology(TopologyKind::circular, 7);
    const ConductanceVector gamma = random_gamma(21, 8);
    RecoveryConfig cfg;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(21), c = Eigen::VectorXd::Ones(21);
    const RecoveryResult exact = recover_conductances(discrete_forward(gamma, g), g, cfg, zero, c);
    EXPECT_TRUE(exact.peeled);
    EXPECT_LT(max_rel(exact.gamma, gamma), 1e-8);
    DataVector bad = discrete_forward(gamma, g);
    bad[0] = 0.5;  // positive off-diagonal: no positive network has it
    const RecoveryResult fb = recover_conductances(bad, g, cfg, zero, c);
    EXPECT_FALSE(fb.peeled);
    EXPECT_GT(fb.gamma.minCoeff(), 0.0);
}
