#include "eitnet/network.hpp"

#include "eitnet/error.hpp"

#include <map>
#include <sstream>

namespace eitnet {

std::string to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::circular: return "circular";
        case TopologyKind::pyramidal: return "pyramidal";
        case TopologyKind::two_sided: return "two-sided";
    }
    return "unknown";
}

TopologyKind topology_from_string(const std::string& name) {
    if (name == "circular") return TopologyKind::circular;
    if (name == "pyramidal") return TopologyKind::pyramidal;
    if (name == "two-sided" || name == "two_sided") return TopologyKind::two_sided;
    throw ConfigError("unknown topology '" + name + "'");
}

namespace {

NetworkGraph circular_graph(int n) {
    if (n < 3 || n % 2 == 0) {
        std::ostringstream msg;
        msg << "circular network needs odd n >= 3 (got " << n << ")";
        throw ConfigError(msg.str());
    }
    const int l = (n - 1) / 2;
    const int rings = (l % 2 == 1) ? (l - 1) / 2 : l / 2;
    const bool center = (l % 2 == 1);
    NetworkGraph g;
    g.kind = TopologyKind::circular;
    g.n = n;
    g.node_count = n + rings * n + (center ? 1 : 0);
    auto ring_node = [&](int ring, int j) { return ring == 0 ? j : n + (ring - 1) * n + j; };
    const int center_node = g.node_count - 1;
    for (int layer = 1; layer <= l; ++layer) {
        if (layer % 2 == 1) {
            const int from = (layer - 1) / 2;
            for (int j = 0; j < n; ++j) {
                const int to = (layer == l) ? center_node : ring_node(from + 1, j);
                g.edges.emplace_back(ring_node(from, j), to);
                g.edge_layer.push_back(layer);
            }
        } else {
            const int ring = layer / 2;
            for (int j = 0; j < n; ++j) {
                g.edges.emplace_back(ring_node(ring, j), ring_node(ring, (j + 1) % n));
                g.edge_layer.push_back(layer);
            }
        }
    }
    return g;
}

/// Relabels cell keys so that the given boundary list becomes 0..n-1.
NetworkGraph relabel(TopologyKind kind, int n, const std::vector<std::pair<int, int>>& cell_edges,
                     const std::vector<int>& boundary_cells) {
    std::map<int, int> id;
    for (int c : boundary_cells) id.emplace(c, static_cast<int>(id.size()));
    NetworkGraph g;
    g.kind = kind;
    g.n = n;
    for (const auto& [a, b] : cell_edges) {
        for (int c : {a, b})
            if (!id.count(c)) id.emplace(c, static_cast<int>(id.size()));
        g.edges.emplace_back(id.at(a), id.at(b));
    }
    g.node_count = static_cast<int>(id.size());
    return g;
}

// Medial lines of the pyramid cross once per pair; cells (i, j), j < i, with
// odd i + j are the nodes.
NetworkGraph pyramidal_graph(int n) {
    if (n < 3) throw ConfigError("pyramidal network needs n >= 3");
    auto key = [n](int i, int j) { return i * (n + 1) + j; };
    std::vector<std::pair<int, int>> edges;
    for (int a = 2; a <= n; ++a)
        for (int b = 1; b < a; ++b) {
            if ((a + b) % 2 == 1)
                edges.emplace_back(key(a - 1, b - 1), key(a, b));
            else
                edges.emplace_back(key(a - 1, b), key(a, b - 1));
        }
    std::vector<int> boundary;
    for (int i = 1; i <= n; i += 2) boundary.push_back(key(i, 0));
    for (int j = 0; j < n; ++j)
        if ((n + j) % 2 == 1 && !(j == 0 && n % 2 == 1)) boundary.push_back(key(n, j));
    if (static_cast<int>(boundary.size()) != n) throw std::logic_error("pyramidal boundary count");
    return relabel(TopologyKind::pyramidal, n, edges, boundary);
}

// Odd-even transposition network on n wires; faces of odd rows are nodes.
NetworkGraph two_sided_graph(int n) {
    if (n < 4 || n % 2 == 1) {
        std::ostringstream msg;
        msg << "two-sided network needs even n >= 4 (got " << n << ")";
        throw ConfigError(msg.str());
    }
    const int m = n / 2;
    auto key = [m](int row, int k) { return row * (m + 1) + k; };
    std::vector<std::pair<int, int>> edges;
    for (int t = 1; t <= n; ++t)
        for (int row = (t % 2 == 1) ? 1 : 2; row <= n - 1; row += 2) {
            if (row % 2 == 1) {
                const int k = (t + 1) / 2;
                edges.emplace_back(key(row, k - 1), key(row, k));
            } else {
                edges.emplace_back(key(row - 1, t / 2), key(row + 1, t / 2));
            }
        }
    std::vector<int> boundary;
    for (int row = 1; row <= n - 1; row += 2) boundary.push_back(key(row, 0));
    for (int row = n - 1; row >= 1; row -= 2) boundary.push_back(key(row, m));
    return relabel(TopologyKind::two_sided, n, edges, boundary);
}

void check_gamma(const NetworkGraph& graph, const ConductanceVector& gamma) {
    if (gamma.size() != graph.edge_count()) throw ConfigError("conductance vector has wrong length");
    for (Eigen::Index e = 0; e < gamma.size(); ++e)
        if (!(gamma[e] > 0.0)) throw ConfigError("conductances must be positive");
}

}  // namespace

NetworkGraph build_topology(TopologyKind kind, int n) {
    switch (kind) {
        case TopologyKind::circular: return circular_graph(n);
        case TopologyKind::pyramidal: return pyramidal_graph(n);
        case TopologyKind::two_sided: return two_sided_graph(n);
    }
    throw ConfigError("unknown topology");
}

Eigen::MatrixXd network_laplacian(const NetworkGraph& graph, const ConductanceVector& gamma) {
    check_gamma(graph, gamma);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(graph.node_count, graph.node_count);
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto [a, b] = graph.edges[static_cast<size_t>(e)];
        k(a, a) += gamma[e];
        k(b, b) += gamma[e];
        k(a, b) -= gamma[e];
        k(b, a) -= gamma[e];
    }
    return k;
}

Eigen::MatrixXd harmonic_extension(const NetworkGraph& graph, const ConductanceVector& gamma) {
    const Eigen::MatrixXd k = network_laplacian(graph, gamma);
    const int n = graph.n;
    const int ni = graph.interior_count();
    Eigen::MatrixXd ext(graph.node_count, n);
    ext.topRows(n).setIdentity();
    if (ni > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(k.bottomRightCorner(ni, ni));
        if (llt.info() != Eigen::Success) throw SolverError("network: singular interior block");
        ext.bottomRows(ni) = -llt.solve(k.bottomLeftCorner(ni, n));
    }
    return ext;
}

Eigen::MatrixXd network_dtn(const NetworkGraph& graph, const ConductanceVector& gamma) {
    const Eigen::MatrixXd k = network_laplacian(graph, gamma);
    const int n = graph.n;
    const int ni = graph.interior_count();
    if (ni == 0) return k;
    Eigen::LLT<Eigen::MatrixXd> llt(k.bottomRightCorner(ni, ni));
    if (llt.info() != Eigen::Success) throw SolverError("network: singular interior block");
    Eigen::MatrixXd a = k.topLeftCorner(n, n) - k.topRightCorner(n, ni) * llt.solve(k.bottomLeftCorner(ni, n));
    return a;
}

DataVector discrete_forward(const ConductanceVector& gamma, const NetworkGraph& graph) {
    return vec_upper(network_dtn(graph, gamma));
}

Eigen::MatrixXd jacobian_discrete_forward(const ConductanceVector& gamma, const NetworkGraph& graph) {
    const Eigen::MatrixXd ext = harmonic_extension(graph, gamma);
    const int n = graph.n;
    Eigen::MatrixXd jac(pair_count(n), graph.edge_count());
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto [a, b] = graph.edges[static_cast<size_t>(e)];
        const Eigen::VectorXd diff = (ext.row(a) - ext.row(b)).transpose();
        Eigen::Index p = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) jac(p++, e) = diff[i] * diff[j];
    }
    return jac;
}

}  // namespace eitnet
