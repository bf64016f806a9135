#include "eitnet/phantom.hpp"

#include "eitnet/error.hpp"

#include <cmath>
#include <sstream>

namespace eitnet {

std::string to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::smooth: return "smooth";
        case PhantomKind::chest: return "chest";
        case PhantomKind::custom: return "custom";
    }
    return "?";
}

PhantomKind phantom_from_string(const std::string& name) {
    if (name == "smooth") return PhantomKind::smooth;
    if (name == "chest") return PhantomKind::chest;
    if (name == "custom") return PhantomKind::custom;
    throw ConfigError("unknown phantom '" + name + "'");
}

double PhantomSpec::value(double x, double y) const {
    if (kind == PhantomKind::chest) {
        double v = background;
        for (const Ellipse& e : ellipses) {
            const double c = std::cos(e.angle), s = std::sin(e.angle);
            const double u = (c * (x - e.x) + s * (y - e.y)) / e.a;
            const double w = (-s * (x - e.x) + c * (y - e.y)) / e.b;
            if (u * u + w * w <= 1.0) v = e.value;
        }
        return v;
    }
    double v = background;
    for (const Bump& b : bumps) {
        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        v += b.amplitude * std::exp(-0.5 * d2 / (b.width * b.width));
    }
    return v;
}

PhantomSpec PhantomSpec::default_smooth() {
    PhantomSpec p;
    p.kind = PhantomKind::smooth;
    p.bumps = {{0.35, 0.25, 1.0, 0.25}, {-0.35, -0.3, -0.5, 0.3}, {-0.2, 0.5, 0.5, 0.2}};
    return p;
}

PhantomSpec PhantomSpec::default_chest() {
    PhantomSpec p;
    p.kind = PhantomKind::chest;
    // two lungs and the heart between them, slightly below
    p.ellipses = {{-0.42, 0.08, 0.22, 0.48, 0.12, 0.5}, {0.42, 0.08, 0.22, 0.48, -0.12, 0.5},
                  {0.0, -0.3, 0.2, 0.16, 0.0, 2.0}};
    return p;
}

PhantomSpec PhantomSpec::custom(std::vector<Bump> bumps) {
    PhantomSpec p;
    p.kind = PhantomKind::custom;
    p.bumps = std::move(bumps);
    return p;
}

NodalField define_phantom(const PhantomSpec& spec, const DiskGrid& grid) {
    if (spec.kind == PhantomKind::chest) {
        if (!(spec.background > 0.0)) throw ConfigError("phantom: background must be positive");
        for (const Ellipse& e : spec.ellipses) {
            if (!(e.value > 0.0)) throw ConfigError("phantom: region values must be positive");
            if (!(e.a > 0.0 && e.b > 0.0)) throw ConfigError("phantom: ellipse axes must be positive");
        }
    }
    for (const Bump& b : spec.bumps)
        if (!(b.width > 0.0)) throw ConfigError("phantom: bump width must be positive");
    NodalField f(grid.node_count());
    for (int k = 0; k < grid.node_count(); ++k) {
        f[k] = spec.value(grid.x(k), grid.y(k));
        if (!(f[k] > 0.0)) {
            std::ostringstream msg;
            msg << "phantom: nonpositive value " << f[k] << " at (" << grid.x(k) << ", " << grid.y(k) << ")";
            throw ConfigError(msg.str());
        }
    }
    return f;
}

}  // namespace eitnet
