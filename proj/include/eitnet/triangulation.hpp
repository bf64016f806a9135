#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

namespace eitnet {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Delaunay triangulation of a planar point set (Bowyer-Watson).
class Triangulation {
public:
    Triangulation() = default;
    explicit Triangulation(std::vector<Point2> points);

    const std::vector<Point2>& points() const { return points_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    /// Convex hull vertices, counter-clockwise.
    const std::vector<int>& hull() const { return hull_; }

    /// Triangle containing q with barycentric weights, or -1.
    int locate(Point2 q, std::array<double, 3>& bary) const;

    /// Closest point of the hull boundary: two vertices and the weight of the first.
    void nearest_on_hull(Point2 q, int& a, int& b, double& wa) const;

    bool inside_hull(Point2 q) const;

    /// True if the segment p-q meets the hull (closed).
    bool segment_hits_hull(Point2 p, Point2 q) const;

private:
    std::vector<Point2> points_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<int> hull_;
};

/// Affine map values -> nodal field: W v + c.
struct LinearInterpolant {
    Eigen::SparseMatrix<double> weights;  ///< node_count x g
    Eigen::VectorXd constant;             ///< node_count

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return weights * v + constant; }
};

/// Piecewise-linear interpolation on `tri` sampled at the given query points.
/// Outside the hull, `extend(q)` decides between nearest-hull extension (true)
/// and the fixed value `outside` (false).
LinearInterpolant build_interpolant(const Triangulation& tri, const std::vector<Point2>& queries,
                                    const std::function<bool(Point2)>& extend, double outside);

}  // namespace eitnet
