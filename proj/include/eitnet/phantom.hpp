#pragma once

#include "eitnet/grid.hpp"

#include <string>
#include <vector>

namespace eitnet {

struct Bump {
    double x = 0.0;
    double y = 0.0;
    double amplitude = 0.0;
    double width = 0.1;  ///< standard deviation of the Gaussian
};

struct Ellipse {
    double x = 0.0;
    double y = 0.0;
    double a = 0.1;      ///< semi-axis along the rotated x direction
    double b = 0.1;
    double angle = 0.0;  ///< radians
    double value = 1.0;
};

enum class PhantomKind { smooth, chest, custom };

std::string to_string(PhantomKind kind);
PhantomKind phantom_from_string(const std::string& name);

/// smooth/custom: background + sum of bumps; chest: background with
/// piecewise-constant ellipses (later ones painted over earlier ones).
struct PhantomSpec {
    PhantomKind kind = PhantomKind::smooth;
    double background = 1.0;
    std::vector<Bump> bumps;
    std::vector<Ellipse> ellipses;

    double value(double x, double y) const;

    static PhantomSpec default_smooth();
    static PhantomSpec default_chest();
    static PhantomSpec custom(std::vector<Bump> bumps);
};

/// Samples the phantom on the fine grid; throws ConfigError if not positive.
NodalField define_phantom(const PhantomSpec& spec, const DiskGrid& grid);

}  // namespace eitnet
