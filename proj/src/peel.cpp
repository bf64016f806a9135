#include "eitnet/error.hpp"
#include "eitnet/network.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>

namespace eitnet {

namespace {

/// One elimination: remove a boundary edge or contract a boundary spike.
struct PeelStep {
    bool spike = false;
    int edge = -1;
    int slot = -1;      ///< spike: slot of v; edge: slot of the first endpoint
    int slot_b = -1;    ///< edge: slot of the second endpoint
    int new_node = -1;  ///< spike: interior endpoint, becomes boundary
    std::vector<int> p;
    std::vector<int> q;
    std::vector<int> removed;  ///< slots dropped afterwards, descending
};

struct PeelPlan {
    int n = 0;
    std::vector<PeelStep> steps;
};

/// Unit-capacity max flow counting vertex-disjoint paths P -> Q.
class DisjointPaths {
public:
    explicit DisjointPaths(int node_count) : nodes_(node_count) {}

    int count(const std::vector<std::vector<std::pair<int, int>>>& adj, const std::vector<char>& alive,
              const std::vector<char>& blocked, const std::vector<int>& p, const std::vector<int>& q,
              int skip_edge, int limit) {
        // vertex v: in = 2v, out = 2v + 1; source = 2N, sink = 2N + 1
        const int nv = 2 * nodes_ + 2;
        const int src = 2 * nodes_, snk = src + 1;
        head_.assign(static_cast<size_t>(nv), -1);
        to_.clear();
        cap_.clear();
        next_.clear();
        std::vector<char> in_p(static_cast<size_t>(nodes_), 0), in_q(static_cast<size_t>(nodes_), 0);
        for (int v : p) in_p[static_cast<size_t>(v)] = 1;
        for (int v : q) in_q[static_cast<size_t>(v)] = 1;
        for (int v = 0; v < nodes_; ++v)
            if (!blocked[static_cast<size_t>(v)]) add(2 * v, 2 * v + 1);
        for (int v : p) add(src, 2 * v + 1);
        for (int v : q) add(2 * v, snk);
        for (int u = 0; u < nodes_; ++u) {
            const bool u_out = in_p[static_cast<size_t>(u)] || !blocked[static_cast<size_t>(u)];
            if (!u_out) continue;
            for (const auto& [v, e] : adj[static_cast<size_t>(u)]) {
                if (!alive[static_cast<size_t>(e)] || e == skip_edge) continue;
                const bool v_in = in_q[static_cast<size_t>(v)] || !blocked[static_cast<size_t>(v)];
                if (v_in) add(2 * u + 1, 2 * v);
            }
        }
        int flow = 0;
        std::vector<int> prev(static_cast<size_t>(nv));
        while (flow < limit) {
            std::fill(prev.begin(), prev.end(), -2);
            std::queue<int> bfs;
            bfs.push(src);
            prev[static_cast<size_t>(src)] = -1;
            while (!bfs.empty() && prev[static_cast<size_t>(snk)] == -2) {
                const int x = bfs.front();
                bfs.pop();
                for (int a = head_[static_cast<size_t>(x)]; a != -1; a = next_[static_cast<size_t>(a)]) {
                    const int y = to_[static_cast<size_t>(a)];
                    if (cap_[static_cast<size_t>(a)] > 0 && prev[static_cast<size_t>(y)] == -2) {
                        prev[static_cast<size_t>(y)] = a;
                        bfs.push(y);
                    }
                }
            }
            if (prev[static_cast<size_t>(snk)] == -2) break;
            for (int y = snk; y != src;) {
                const int a = prev[static_cast<size_t>(y)];
                cap_[static_cast<size_t>(a)] -= 1;
                cap_[static_cast<size_t>(a ^ 1)] += 1;
                y = to_[static_cast<size_t>(a ^ 1)];
            }
            ++flow;
        }
        return flow;
    }

private:
    void add(int a, int b) {
        to_.push_back(b);
        cap_.push_back(1);
        next_.push_back(head_[static_cast<size_t>(a)]);
        head_[static_cast<size_t>(a)] = static_cast<int>(to_.size()) - 1;
        to_.push_back(a);
        cap_.push_back(0);
        next_.push_back(head_[static_cast<size_t>(b)]);
        head_[static_cast<size_t>(b)] = static_cast<int>(to_.size()) - 1;
    }

    int nodes_;
    std::vector<int> head_, to_, cap_, next_;
};

std::vector<int> arc(const std::vector<int>& slots, int start, int step, int k) {
    const int s = static_cast<int>(slots.size());
    std::vector<int> out;
    for (int i = 0; i < k; ++i) out.push_back((((start + step * i) % s) + s) % s);
    return out;
}

std::vector<int> nodes_of(const std::vector<int>& slots, const std::vector<int>& idx) {
    std::vector<int> out;
    for (int i : idx) out.push_back(slots[static_cast<size_t>(i)]);
    return out;
}

PeelPlan make_plan(const NetworkGraph& graph) {
    const int nn = graph.node_count;
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(nn));
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto [a, b] = graph.edges[static_cast<size_t>(e)];
        adj[static_cast<size_t>(a)].emplace_back(b, e);
        adj[static_cast<size_t>(b)].emplace_back(a, e);
    }
    std::vector<char> alive(static_cast<size_t>(graph.edge_count()), 1);
    std::vector<char> boundary(static_cast<size_t>(nn), 0);
    std::vector<int> slots;
    for (int v = 0; v < graph.n; ++v) {
        boundary[static_cast<size_t>(v)] = 1;
        slots.push_back(v);
    }
    auto degree = [&](int v) {
        int d = 0;
        for (const auto& [w, e] : adj[static_cast<size_t>(v)]) d += alive[static_cast<size_t>(e)] ? 1 : 0;
        (void)0;
        return d;
    };
    auto only_edge = [&](int v) {
        for (const auto& [w, e] : adj[static_cast<size_t>(v)])
            if (alive[static_cast<size_t>(e)]) return std::make_pair(w, e);
        return std::make_pair(-1, -1);
    };
    auto edge_between = [&](int u, int v) {
        for (const auto& [w, e] : adj[static_cast<size_t>(u)])
            if (w == v && alive[static_cast<size_t>(e)]) return e;
        return -1;
    };

    DisjointPaths flow(nn);
    PeelPlan plan;
    plan.n = graph.n;
    int remaining = graph.edge_count();
    while (remaining > 0) {
        const int s = static_cast<int>(slots.size());
        bool found = false;
        PeelStep step;
        for (int a = 0; a < s && !found; ++a) {
            const int u = slots[static_cast<size_t>(a)];
            const int b = (a + 1) % s;
            const int e_edge = (s >= 2) ? edge_between(u, slots[static_cast<size_t>(b)]) : -1;
            if (e_edge >= 0) {
                for (int k = 1; 2 * k <= s && !found; ++k) {
                    const std::vector<int> pi = arc(slots, a, -1, k), qi = arc(slots, b, 1, k);
                    const std::vector<int> p = nodes_of(slots, pi), q = nodes_of(slots, qi);
                    if (flow.count(adj, alive, boundary, p, q, -1, k) != k) continue;
                    if (flow.count(adj, alive, boundary, p, q, e_edge, k) >= k) continue;
                    step = PeelStep{};
                    step.spike = false;
                    step.edge = e_edge;
                    step.slot = a;
                    step.slot_b = b;
                    step.p = pi;
                    step.q = qi;
                    found = true;
                }
            }
            if (found) break;
            if (degree(u) == 1) {
                const auto [w, e] = only_edge(u);
                if (boundary[static_cast<size_t>(w)]) continue;
                for (int k = 1; 2 * k <= s - 1 && !found; ++k) {
                    const std::vector<int> pi = arc(slots, a - 1, -1, k), qi = arc(slots, a + 1, 1, k);
                    const std::vector<int> p = nodes_of(slots, pi), q = nodes_of(slots, qi);
                    if (flow.count(adj, alive, boundary, p, q, e, k) != k) continue;
                    boundary[static_cast<size_t>(w)] = 1;
                    const int cut = flow.count(adj, alive, boundary, p, q, e, k);
                    boundary[static_cast<size_t>(w)] = 0;
                    if (cut >= k) continue;
                    step = PeelStep{};
                    step.spike = true;
                    step.edge = e;
                    step.slot = a;
                    step.new_node = w;
                    step.p = pi;
                    step.q = qi;
                    found = true;
                }
            }
        }
        if (!found) {
            std::ostringstream msg;
            msg << "layer peeling: no removable element for " << to_string(graph.kind) << " n=" << graph.n
                << " with " << remaining << " edges left";
            throw std::logic_error(msg.str());
        }
        alive[static_cast<size_t>(step.edge)] = 0;
        --remaining;
        if (step.spike) {
            boundary[static_cast<size_t>(slots[static_cast<size_t>(step.slot)])] = 0;
            slots[static_cast<size_t>(step.slot)] = step.new_node;
            boundary[static_cast<size_t>(step.new_node)] = 1;
        }
        for (int i = static_cast<int>(slots.size()) - 1; i >= 0; --i) {
            if (degree(slots[static_cast<size_t>(i)]) == 0) {
                step.removed.push_back(i);
                slots.erase(slots.begin() + i);
            }
        }
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

const PeelPlan& cached_plan(const NetworkGraph& graph) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const PeelPlan>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_pair(static_cast<int>(graph.kind), graph.n);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_shared<const PeelPlan>(make_plan(graph))).first;
    return *it->second;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& a, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd m(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(rows[i], cols[j]);
    return m;
}

void drop_slot(Eigen::MatrixXd& a, int i) {
    const Eigen::Index s = a.rows();
    Eigen::MatrixXd b(s - 1, s - 1);
    for (Eigen::Index r = 0, rr = 0; r < s; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < s; ++c) {
            if (c == i) continue;
            b(rr, cc++) = a(r, c);
        }
        ++rr;
    }
    a.swap(b);
}

[[noreturn]] void inconsistent(const PeelStep& step, const char* what, double value) {
    std::ostringstream msg;
    msg << "inconsistent data: " << what << " (" << value << ") at edge " << step.edge;
    throw InconsistentData(msg.str());
}

}  // namespace

ConductanceVector layer_peel(const DataVector& d, const NetworkGraph& graph) {
    if (d.size() != pair_count(graph.n)) throw ConfigError("layer_peel: data length does not match graph");
    const PeelPlan& plan = cached_plan(graph);
    Eigen::MatrixXd lam = unvec_upper(d, graph.n);
    ConductanceVector gamma = ConductanceVector::Zero(graph.edge_count());
    for (const PeelStep& step : plan.steps) {
        const Eigen::MatrixXd m = sub(lam, step.p, step.q);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        lu.setThreshold(1e-300);
        if (!lu.isInvertible()) inconsistent(step, "singular pivot block", 0.0);
        if (!step.spike) {
            const Eigen::MatrixXd minv = lu.inverse();
            const double beta = -1.0 / minv(0, 0);
            if (!(beta > 0.0) || !std::isfinite(beta)) inconsistent(step, "nonpositive boundary edge", beta);
            gamma[step.edge] = beta;
            const int a = step.slot, b = step.slot_b;
            lam(a, a) -= beta;
            lam(b, b) -= beta;
            lam(a, b) += beta;
            lam(b, a) += beta;
        } else {
            const int v = step.slot;
            Eigen::VectorXd lpv(step.p.size()), lvq(step.q.size());
            for (size_t i = 0; i < step.p.size(); ++i) lpv[static_cast<Eigen::Index>(i)] = lam(step.p[i], v);
            for (size_t i = 0; i < step.q.size(); ++i) lvq[static_cast<Eigen::Index>(i)] = lam(v, step.q[i]);
            const double g = lam(v, v) - lvq.dot(lu.solve(lpv));
            const double dd = g - lam(v, v);
            if (!(g > 0.0) || !std::isfinite(g)) inconsistent(step, "nonpositive spike", g);
            if (!(dd > 0.0)) inconsistent(step, "spike contraction pivot", dd);
            gamma[step.edge] = g;
            const Eigen::VectorXd row = lam.row(v).transpose();
            const Eigen::Index s = lam.rows();
            for (Eigen::Index r = 0; r < s; ++r) {
                if (r == v) continue;
                for (Eigen::Index c = 0; c < s; ++c) {
                    if (c == v) continue;
                    lam(r, c) += row[r] * row[c] / dd;
                }
            }
            for (Eigen::Index r = 0; r < s; ++r) {
                if (r == v) continue;
                lam(v, r) = g / dd * row[r];
                lam(r, v) = lam(v, r);
            }
            lam(v, v) = g * g / dd - g;
        }
        for (int i : step.removed) drop_slot(lam, i);
    }
    return gamma;
}

ConductanceVector layer_peel_circular(const DataVector& d, const NetworkGraph& graph) {
    if (graph.kind != TopologyKind::circular) throw ConfigError("layer_peel_circular: graph is not circular");
    return layer_peel(d, graph);
}

}  // namespace eitnet
