#include "eitnet/measurement.hpp"
#include "eitnet/network.hpp"
#include "eitnet/optgrid.hpp"
#include "eitnet/phantom.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace eitnet;

namespace {

constexpr double kPi = std::numbers::pi;

NodalField bump(const DiskGrid& g, double x0, double y0, double w) {
    NodalField f(g.node_count());
    for (int k = 0; k < g.node_count(); ++k)
        f[k] = std::exp(-(std::pow(g.x(k) - x0, 2) + std::pow(g.y(k) - y0, 2)) / (2 * w * w));
    return f;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

double wrap(double t) {
    t = std::fmod(t, 2 * kPi);
    return t < 0 ? t + 2 * kPi : t;
}

}  // namespace

TEST(DsigmaForward, CenterBumpFiniteDifference) {
    const DiskGrid g(20, 42);
    const ElectrodeSet es = build_electrodes(7, BoundaryGeometry::full(), 42);
    const NodalField one = NodalField::Ones(g.node_count());
    const NodalField ds = bump(g, 0.0, 0.0, 0.2);
    const Eigen::MatrixXd j = dsigma_forward(one, es, g);
    ASSERT_EQ(j.rows(), 21);
    ASSERT_EQ(j.cols(), g.node_count());
    const double eps = 1e-4;
    const DataVector fd = (forward_map(one + eps * ds, es, g) - forward_map(one, es, g)) / eps;
    EXPECT_LT(rel(j * ds, fd), 2e-2);
}

TEST(DsigmaForward, RandomDirections) {
    const DiskGrid g(16, 35);
    const ElectrodeSet es = build_electrodes(5, BoundaryGeometry::full(), 35);
    const NodalField s = define_phantom(PhantomSpec::default_smooth(), g);
    const Eigen::MatrixXd j = dsigma_forward(s, es, g);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const double eps = 1e-4;
    for (int t = 0; t < 5; ++t) {
        const NodalField ds = bump(g, u(rng), u(rng), 0.15);
        const DataVector fd = (forward_map(s + eps * ds, es, g) - forward_map(s, es, g)) / eps;
        EXPECT_LT(rel(j * ds, fd), 2e-2) << t;
    }
}

TEST(DsigmaForward, Homogeneity) {
    // F is homogeneous of degree one in sigma, so J(sigma) sigma = F(sigma)
    const DiskGrid g(16, 40);
    const ElectrodeSet es = build_electrodes(8, BoundaryGeometry::full(), 40);
    for (const NodalField& s : {NodalField(NodalField::Ones(g.node_count())),
                                define_phantom(PhantomSpec::default_chest(), g)}) {
        const DataVector f = forward_map(s, es, g);
        EXPECT_LT(rel(dsigma_forward(s, es, g) * s, f), 1e-9);
    }
}

TEST(DsigmaForward, MatchesJointEvaluation) {
    const DiskGrid g(12, 30);
    const ElectrodeSet es = build_electrodes(6, BoundaryGeometry::full(), 30);
    const NodalField s = define_phantom(PhantomSpec::default_smooth(), g);
    const ForwardJacobian fj = forward_with_jacobian(g, s, es);
    EXPECT_LT(rel(fj.data, forward_map(s, es, g)), 1e-13);
    EXPECT_LT((fj.jacobian - dsigma_forward(s, es, g)).norm(), 1e-12 * fj.jacobian.norm());
}

TEST(DsigmaGamma, ChainRuleFiniteDifference) {
    const DiskGrid g(20, 42);
    const ElectrodeSet es = build_electrodes(7, BoundaryGeometry::full(), 42);
    const NetworkGraph net = build_topology(TopologyKind::circular, 7);
    const NodalField s = define_phantom(PhantomSpec::default_smooth(), g);
    const SensitivityField sf = dsigma_gamma(s, es, g, net);
    ASSERT_EQ(sf.nodal.rows(), net.edge_count());
    EXPECT_GT(sf.condition, 1.0);
    EXPECT_TRUE(std::isfinite(sf.condition));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const double eps = 1e-4;
    for (int t = 0; t < 5; ++t) {
        const NodalField ds = bump(g, u(rng), u(rng), 0.2);
        const ConductanceVector g0 = layer_peel_circular(forward_map(s, es, g), net);
        const ConductanceVector g1 = layer_peel_circular(forward_map(s + eps * ds, es, g), net);
        EXPECT_LT(rel(sf.nodal * ds, (g1 - g0) / eps), 2e-2) << t;
    }
}

TEST(DsigmaGamma, ScaleInvariant) {
    // gamma(c sigma) = c gamma(sigma), so the derivative does not change
    const DiskGrid g(14, 35);
    const ElectrodeSet es = build_electrodes(5, BoundaryGeometry::full(), 35);
    const NetworkGraph net = build_topology(TopologyKind::circular, 5);
    const NodalField one = NodalField::Ones(g.node_count());
    const SensitivityField a = dsigma_gamma(one, es, g, net);
    const SensitivityField b = dsigma_gamma(2.5 * one, es, g, net);
    EXPECT_LT((a.nodal - b.nodal).norm(), 1e-8 * a.nodal.norm());
    EXPECT_LT(rel(b.gamma, 2.5 * a.gamma), 1e-10);
}

TEST(DsigmaGamma, LayerRotations) {
    const int n = 7, na = 98;
    const DiskGrid g(20, na);
    const ElectrodeSet es = build_electrodes(n, BoundaryGeometry::full(), na);
    const NetworkGraph net = build_topology(TopologyKind::circular, n);
    const SensitivityField sf = dsigma_gamma(NodalField::Ones(g.node_count()), es, g, net);
    // rotating by one electrode shifts the angle index by na / n
    const int shift = na / n;
    auto rotate = [&](const Eigen::RowVectorXd& f) {
        Eigen::RowVectorXd out(f.size());
        out[0] = f[0];
        for (int ring = 1; ring <= g.n_radial(); ++ring)
            for (int j = 0; j < na; ++j) out[g.node(ring, (j + shift) % na)] = f[g.node(ring, j)];
        return out;
    };
    for (int k = 0; k < net.edge_count(); ++k) {
        const Eigen::RowVectorXd r = rotate(sf.nodal.row(k));
        double best = 1e300;
        for (int l = 0; l < net.edge_count(); ++l)
            if (net.edge_layer[l] == net.edge_layer[k])
                best = std::min(best, (r - sf.nodal.row(l)).norm() / sf.nodal.row(k).norm());
        EXPECT_LT(best, 1e-8) << "edge " << k;
    }
}

TEST(OptimalGrid, CircularSevenSymmetric) {
    const int n = 7;
    const DiskGrid g(30, 98);
    const ElectrodeSet es = build_electrodes(n, BoundaryGeometry::full(), 98);
    const NetworkGraph net = build_topology(TopologyKind::circular, n);
    const OptimalGrid og = optimal_grid(es, g, net);
    ASSERT_EQ(og.points.size(), 21u);
    EXPECT_LT(og.recovery_residual, 1e-8);
    EXPECT_GT(og.gamma1.minCoeff(), 0.0);

    std::vector<double> radii;
    for (int layer = 1; layer <= 3; ++layer) {
        std::vector<double> r, t;
        for (int k = 0; k < net.edge_count(); ++k)
            if (net.edge_layer[k] == layer) {
                r.push_back(std::hypot(og.points[k].x, og.points[k].y));
                t.push_back(wrap(std::atan2(og.points[k].y, og.points[k].x)));
            }
        ASSERT_EQ(r.size(), 7u);
        const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
        EXPECT_LT(*hi - *lo, g.dr()) << "layer " << layer;
        std::sort(t.begin(), t.end());
        for (size_t i = 0; i < t.size(); ++i) {
            const double gap = wrap(t[(i + 1) % t.size()] - t[i]);
            EXPECT_NEAR(gap, 2 * kPi / n, g.dtheta()) << "layer " << layer;
        }
        radii.push_back(r[0]);
    }
    // layers move inwards; the gap to the boundary is the finest one
    EXPECT_LE(radii[0], 1.0);
    EXPECT_GT(radii[0], radii[1]);
    EXPECT_GT(radii[1], radii[2]);
    EXPECT_LT(1.0 - radii[0], radii[0] - radii[1]);
    EXPECT_LT(1.0 - radii[0], radii[1] - radii[2]);
    EXPECT_GT(radii[2], radii[1] - radii[2]);
    for (const Point2& p : og.points) EXPECT_LE(std::hypot(p.x, p.y), 1.0 + 1e-12);
}

TEST(OptimalGrid, ReferenceConductancesPositive) {
    struct Case {
        TopologyKind kind;
        int n;
        BoundaryGeometry geom;
    };
    const std::vector<Case> cases = {
        {TopologyKind::circular, 11, BoundaryGeometry::full()},
        {TopologyKind::pyramidal, 16, BoundaryGeometry::one_sided({-1.5, 1.5})},
        {TopologyKind::two_sided, 16, BoundaryGeometry::two_sided({-1.2, 1.2}, {kPi - 1.2, kPi + 1.2})},
    };
    for (const Case& c : cases) {
        const int na = c.n == 11 ? 99 : 96;
        const DiskGrid g(24, na);
        const ElectrodeSet es = build_electrodes(c.n, c.geom, na);
        const NetworkGraph net = build_topology(c.kind, c.n);
        const OptimalGrid og = optimal_grid(es, g, net);
        EXPECT_GT(og.gamma1.minCoeff(), 0.0) << to_string(c.kind);
        EXPECT_LT(og.recovery_residual, 1e-8) << to_string(c.kind);
        EXPECT_EQ(static_cast<int>(og.points.size()), net.edge_count());
        for (const Point2& p : og.points) EXPECT_LE(std::hypot(p.x, p.y), 1.0 + 1e-12);
    }
}
