#include "eitnet/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace eitnet {

namespace {

double orient(Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool in_circumcircle(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                       (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                       (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    return det > 0.0;  // a, b, c counter-clockwise
}

std::vector<int> convex_hull(const std::vector<Point2>& p) {
    std::vector<int> idx(p.size());
    for (size_t i = 0; i < p.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return p[static_cast<size_t>(a)].x < p[static_cast<size_t>(b)].x ||
               (p[static_cast<size_t>(a)].x == p[static_cast<size_t>(b)].x && p[static_cast<size_t>(a)].y < p[static_cast<size_t>(b)].y);
    });
    std::vector<int> h(2 * idx.size());
    size_t k = 0;
    auto pt = [&](int i) { return p[static_cast<size_t>(i)]; };
    for (int i : idx) {
        while (k >= 2 && orient(pt(h[k - 2]), pt(h[k - 1]), pt(i)) <= 1e-14) --k;
        h[k++] = i;
    }
    for (size_t t = idx.size() - 1, lo = k + 1; t > 0; --t) {
        const int i = idx[t - 1];
        while (k >= lo && orient(pt(h[k - 2]), pt(h[k - 1]), pt(i)) <= 1e-14) --k;
        h[k++] = i;
    }
    h.resize(k - 1);
    return h;
}

}  // namespace

Triangulation::Triangulation(std::vector<Point2> points) : points_(std::move(points)) {
    const int n = static_cast<int>(points_.size());
    if (n < 3) throw std::invalid_argument("triangulation needs at least 3 points");
    // Combinatorics on slightly perturbed copies: breaks ties between cocircular points.
    std::vector<Point2> p(points_);
    for (int i = 0; i < n; ++i) {
        const double u = std::sin(12.9898 * (i + 1)) * 43758.5453;
        const double v = std::sin(78.233 * (i + 1)) * 12345.6789;
        p[static_cast<size_t>(i)].x += 1e-9 * (u - std::floor(u) - 0.5);
        p[static_cast<size_t>(i)].y += 1e-9 * (v - std::floor(v) - 0.5);
    }
    double lo_x = p[0].x, hi_x = p[0].x, lo_y = p[0].y, hi_y = p[0].y;
    for (const Point2& q : p) {
        lo_x = std::min(lo_x, q.x);
        hi_x = std::max(hi_x, q.x);
        lo_y = std::min(lo_y, q.y);
        hi_y = std::max(hi_y, q.y);
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    p.push_back({cx - 40 * span, cy - 40 * span});
    p.push_back({cx + 40 * span, cy - 40 * span});
    p.push_back({cx, cy + 40 * span});

    std::vector<std::array<int, 3>> tris{{n, n + 1, n + 2}};
    for (int i = 0; i < n; ++i) {
        std::vector<std::array<int, 3>> keep;
        std::map<std::pair<int, int>, int> boundary;
        for (const auto& t : tris) {
            if (in_circumcircle(p[static_cast<size_t>(t[0])], p[static_cast<size_t>(t[1])], p[static_cast<size_t>(t[2])], p[static_cast<size_t>(i)])) {
                for (int e = 0; e < 3; ++e) {
                    int a = t[static_cast<size_t>(e)], b = t[static_cast<size_t>((e + 1) % 3)];
                    auto rev = boundary.find({b, a});
                    if (rev != boundary.end())
                        boundary.erase(rev);
                    else
                        boundary[{a, b}] = 1;
                }
            } else {
                keep.push_back(t);
            }
        }
        for (const auto& [edge, unused] : boundary) keep.push_back({edge.first, edge.second, i});
        tris.swap(keep);
    }
    for (const auto& t : tris) {
        if (t[0] >= n || t[1] >= n || t[2] >= n) continue;
        // drop slivers created by the perturbation on exactly collinear inputs
        const double area = orient(points_[static_cast<size_t>(t[0])], points_[static_cast<size_t>(t[1])], points_[static_cast<size_t>(t[2])]);
        if (std::abs(area) < 1e-14) continue;
        triangles_.push_back(area > 0 ? t : std::array<int, 3>{t[0], t[2], t[1]});
    }
    hull_ = convex_hull(points_);
}

int Triangulation::locate(Point2 q, std::array<double, 3>& bary) const {
    constexpr double tol = 1e-12;
    for (size_t k = 0; k < triangles_.size(); ++k) {
        const auto& t = triangles_[k];
        const Point2 a = points_[static_cast<size_t>(t[0])], b = points_[static_cast<size_t>(t[1])], c = points_[static_cast<size_t>(t[2])];
        const double area = orient(a, b, c);
        const double l0 = orient(q, b, c) / area;
        const double l1 = orient(a, q, c) / area;
        const double l2 = 1.0 - l0 - l1;
        if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
            bary = {l0, l1, l2};
            return static_cast<int>(k);
        }
    }
    return -1;
}

void Triangulation::nearest_on_hull(Point2 q, int& a, int& b, double& wa) const {
    double best = INFINITY;
    const size_t h = hull_.size();
    for (size_t k = 0; k < h; ++k) {
        const int i = hull_[k], j = hull_[(k + 1) % h];
        const Point2 u = points_[static_cast<size_t>(i)], v = points_[static_cast<size_t>(j)];
        const double dx = v.x - u.x, dy = v.y - u.y;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? ((q.x - u.x) * dx + (q.y - u.y) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double px = u.x + t * dx - q.x, py = u.y + t * dy - q.y;
        const double dist = px * px + py * py;
        if (dist < best) {
            best = dist;
            a = i;
            b = j;
            wa = 1.0 - t;
        }
    }
}

bool Triangulation::inside_hull(Point2 q) const {
    const size_t h = hull_.size();
    for (size_t k = 0; k < h; ++k)
        if (orient(points_[static_cast<size_t>(hull_[k])], points_[static_cast<size_t>(hull_[(k + 1) % h])], q) < -1e-12) return false;
    return true;
}

bool Triangulation::segment_hits_hull(Point2 p, Point2 q) const {
    // Cyrus-Beck clipping against the convex hull
    double t0 = 0.0, t1 = 1.0;
    const double dx = q.x - p.x, dy = q.y - p.y;
    const size_t h = hull_.size();
    for (size_t k = 0; k < h; ++k) {
        const Point2 u = points_[static_cast<size_t>(hull_[k])], v = points_[static_cast<size_t>(hull_[(k + 1) % h])];
        // inside: orient(u, v, x) >= 0
        const double f0 = orient(u, v, p);
        const double df = (v.x - u.x) * dy - (v.y - u.y) * dx;
        if (std::abs(df) < 1e-300) {
            if (f0 < 0) return false;
            continue;
        }
        const double t = -f0 / df;
        if (df > 0)
            t0 = std::max(t0, t);
        else
            t1 = std::min(t1, t);
        if (t0 > t1) return false;
    }
    return true;
}

LinearInterpolant build_interpolant(const Triangulation& tri, const std::vector<Point2>& queries,
                                    const std::function<bool(Point2)>& extend, double outside) {
    const int nq = static_cast<int>(queries.size());
    const int g = static_cast<int>(tri.points().size());
    std::vector<Eigen::Triplet<double>> trip;
    LinearInterpolant out;
    out.constant = Eigen::VectorXd::Zero(nq);
    for (int k = 0; k < nq; ++k) {
        std::array<double, 3> bary{};
        const int t = tri.locate(queries[static_cast<size_t>(k)], bary);
        if (t >= 0) {
            const auto& v = tri.triangles()[static_cast<size_t>(t)];
            for (int i = 0; i < 3; ++i)
                if (bary[static_cast<size_t>(i)] != 0.0) trip.emplace_back(k, v[static_cast<size_t>(i)], bary[static_cast<size_t>(i)]);
        } else if (extend(queries[static_cast<size_t>(k)])) {
            int a = 0, b = 0;
            double wa = 0.0;
            tri.nearest_on_hull(queries[static_cast<size_t>(k)], a, b, wa);
            trip.emplace_back(k, a, wa);
            if (wa < 1.0) trip.emplace_back(k, b, 1.0 - wa);
        } else {
            out.constant[k] = outside;
        }
    }
    out.weights.resize(nq, g);
    out.weights.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace eitnet
