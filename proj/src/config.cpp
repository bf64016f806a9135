#include "eitnet/config.hpp"

#include "eitnet/error.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

namespace eitnet {

using nlohmann::json;

std::string to_string(StudyKind kind) {
    switch (kind) {
        case StudyKind::single: return "single";
        case StudyKind::monte_carlo: return "monte-carlo";
        case StudyKind::lcurve: return "lcurve";
        case StudyKind::crb: return "crb";
        case StudyKind::condition_study: return "condition-study";
        case StudyKind::linearized: return "linearized";
    }
    return "?";
}

std::vector<std::string> study_names() {
    return {"single", "monte-carlo", "lcurve", "crb", "condition-study", "linearized"};
}

StudyKind study_from_string(const std::string& name) {
    for (StudyKind k : {StudyKind::single, StudyKind::monte_carlo, StudyKind::lcurve, StudyKind::crb,
                        StudyKind::condition_study, StudyKind::linearized})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown study '" + name + "'");
}

namespace {

std::string access_name(BoundaryAccess a) {
    switch (a) {
        case BoundaryAccess::full: return "full";
        case BoundaryAccess::one_sided: return "one-sided";
        case BoundaryAccess::two_sided: return "two-sided";
    }
    return "?";
}

BoundaryAccess access_from(const std::string& s) {
    if (s == "full") return BoundaryAccess::full;
    if (s == "one-sided") return BoundaryAccess::one_sided;
    if (s == "two-sided") return BoundaryAccess::two_sided;
    throw ConfigError("unknown boundary access '" + s + "'");
}

std::string noise_name(NoiseModel m) { return m == NoiseModel::additive ? "additive" : "multiplicative"; }

NoiseModel noise_from(const std::string& s) {
    if (s == "additive") return NoiseModel::additive;
    if (s == "multiplicative") return NoiseModel::multiplicative;
    throw ConfigError("unknown noise model '" + s + "'");
}

// Reads one JSON object, tracking the key path for error messages.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + e.what());
        }
    }

    template <class F>
    void with(const char* key, F&& f) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            f(j_.at(key), where(key));
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + e.what());
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            const std::string at = where(key);
            if (msg.rfind(at.substr(0, at.size() - 2), 0) == 0) throw;
            throw ConfigError(at + msg);
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + "unknown key");
    }

private:
    std::string where(const std::string& key) const {
        std::string p = path_;
        if (!key.empty()) p += (p.empty() ? "" : ".") + key;
        return p.empty() ? "" : p + ": ";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json bump_json(const Bump& b) { return {{"x", b.x}, {"y", b.y}, {"amplitude", b.amplitude}, {"width", b.width}}; }

json ellipse_json(const Ellipse& e) {
    return {{"x", e.x}, {"y", e.y}, {"a", e.a}, {"b", e.b}, {"angle", e.angle}, {"value", e.value}};
}

Bump read_bump(const json& j, const std::string& path) {
    Bump b;
    Reader r(j, path);
    r.get("x", b.x);
    r.get("y", b.y);
    r.get("amplitude", b.amplitude);
    r.get("width", b.width);
    r.finish();
    return b;
}

Ellipse read_ellipse(const json& j, const std::string& path) {
    Ellipse e;
    Reader r(j, path);
    r.get("x", e.x);
    r.get("y", e.y);
    r.get("a", e.a);
    r.get("b", e.b);
    r.get("angle", e.angle);
    r.get("value", e.value);
    r.finish();
    return e;
}

void read_phantom(const json& j, const std::string& path, PhantomSpec& p) {
    Reader r(j, path);
    std::string kind = to_string(p.kind);
    r.get("kind", kind);
    const PhantomKind k = phantom_from_string(kind);
    // presets first, then explicit keys replace parts of them
    if (k != p.kind) {
        if (k == PhantomKind::smooth) p = PhantomSpec::default_smooth();
        if (k == PhantomKind::chest) p = PhantomSpec::default_chest();
        if (k == PhantomKind::custom) p = PhantomSpec::custom({});
    }
    r.get("background", p.background);
    r.with("bumps", [&](const json& a, const std::string& where) {
        if (!a.is_array()) throw ConfigError(where + ": expected an array");
        p.bumps.clear();
        for (size_t i = 0; i < a.size(); ++i) p.bumps.push_back(read_bump(a[i], where + "[" + std::to_string(i) + "]"));
    });
    r.with("ellipses", [&](const json& a, const std::string& where) {
        if (!a.is_array()) throw ConfigError(where + ": expected an array");
        p.ellipses.clear();
        for (size_t i = 0; i < a.size(); ++i)
            p.ellipses.push_back(read_ellipse(a[i], where + "[" + std::to_string(i) + "]"));
    });
    r.finish();
}

}  // namespace

void to_json(json& j, const ExperimentConfig& c) {
    json bumps = json::array(), ellipses = json::array(), arcs = json::array();
    for (const Bump& b : c.phantom.bumps) bumps.push_back(bump_json(b));
    for (const Ellipse& e : c.phantom.ellipses) ellipses.push_back(ellipse_json(e));
    for (const Arc& a : c.geometry.arcs) arcs.push_back(json::array({a.begin, a.end}));
    json kinds = json::array();
    for (ParamKind k : c.study.parametrizations) kinds.push_back(to_string(k));
    j = json{
        {"phantom",
         {{"kind", to_string(c.phantom.kind)},
          {"background", c.phantom.background},
          {"bumps", bumps},
          {"ellipses", ellipses}}},
        {"topology", {{"kind", to_string(c.topology.kind)}, {"n", c.topology.n}}},
        {"geometry", {{"access", access_name(c.geometry.access)}, {"arcs", arcs}, {"coverage", c.geometry.coverage}}},
        {"grid", {{"n_radial", c.grid.n_radial}, {"n_angular", c.grid.n_angular}}},
        {"noise", {{"model", noise_name(c.noise.model)}, {"level", c.noise.level}, {"seed", c.noise.seed}}},
        {"estimator",
         {{"parametrization", to_string(c.estimator.parametrization)},
          {"kind", to_string(c.estimator.kind)},
          {"prior", c.estimator.prior},
          {"alpha", c.estimator.alpha},
          {"sigma_max", c.estimator.sigma_max},
          {"max_gn_steps", c.estimator.max_gn_steps}}},
        {"study",
         {{"kind", to_string(c.study.kind)},
          {"m", c.study.m},
          {"alphas", c.study.alphas},
          {"bias_samples", c.study.bias_samples},
          {"ns", c.study.ns},
          {"parametrizations", kinds}}},
    };
}

void from_json(const json& j, ExperimentConfig& c) {
    c = ExperimentConfig{};
    Reader r(j, "");
    r.with("phantom", [&](const json& p, const std::string&) { read_phantom(p, "phantom", c.phantom); });
    r.with("topology", [&](const json& t, const std::string&) {
        Reader s(t, "topology");
        std::string kind = to_string(c.topology.kind);
        s.get("kind", kind);
        c.topology.kind = topology_from_string(kind);
        s.get("n", c.topology.n);
        s.finish();
    });
    r.with("geometry", [&](const json& g, const std::string&) {
        Reader s(g, "geometry");
        std::string access = access_name(c.geometry.access);
        s.get("access", access);
        c.geometry.access = access_from(access);
        std::vector<std::array<double, 2>> arcs;
        s.get("arcs", arcs);
        c.geometry.arcs.clear();
        for (const auto& a : arcs) c.geometry.arcs.push_back({a[0], a[1]});
        s.get("coverage", c.geometry.coverage);
        s.finish();
    });
    r.with("grid", [&](const json& g, const std::string&) {
        Reader s(g, "grid");
        s.get("n_radial", c.grid.n_radial);
        s.get("n_angular", c.grid.n_angular);
        s.finish();
    });
    r.with("noise", [&](const json& g, const std::string&) {
        Reader s(g, "noise");
        std::string model = noise_name(c.noise.model);
        s.get("model", model);
        c.noise.model = noise_from(model);
        s.get("level", c.noise.level);
        s.get("seed", c.noise.seed);
        s.finish();
    });
    r.with("estimator", [&](const json& g, const std::string&) {
        Reader s(g, "estimator");
        std::string param = to_string(c.estimator.parametrization), kind = to_string(c.estimator.kind);
        s.get("parametrization", param);
        c.estimator.parametrization = param_from_string(param);
        s.get("kind", kind);
        c.estimator.kind = estimator_from_string(kind);
        s.get("prior", c.estimator.prior);
        s.get("alpha", c.estimator.alpha);
        s.get("sigma_max", c.estimator.sigma_max);
        s.get("max_gn_steps", c.estimator.max_gn_steps);
        s.finish();
    });
    r.with("study", [&](const json& g, const std::string&) {
        Reader s(g, "study");
        std::string kind = to_string(c.study.kind);
        s.get("kind", kind);
        c.study.kind = study_from_string(kind);
        s.get("m", c.study.m);
        s.get("alphas", c.study.alphas);
        s.get("bias_samples", c.study.bias_samples);
        s.get("ns", c.study.ns);
        std::vector<std::string> kinds;
        s.get("parametrizations", kinds);
        c.study.parametrizations.clear();
        for (const auto& k : kinds) c.study.parametrizations.push_back(param_from_string(k));
        s.finish();
    });
    r.finish();
}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> err;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) err.push_back(msg);
    };
    check(phantom.background > 0.0, "phantom.background: must be positive");
    for (size_t i = 0; i < phantom.bumps.size(); ++i)
        check(phantom.bumps[i].width > 0.0, "phantom.bumps[" + std::to_string(i) + "].width: must be positive");
    for (size_t i = 0; i < phantom.ellipses.size(); ++i) {
        const Ellipse& e = phantom.ellipses[i];
        const std::string at = "phantom.ellipses[" + std::to_string(i) + "]";
        check(e.a > 0.0 && e.b > 0.0, at + ": semi-axes must be positive");
        check(e.value > 0.0, at + ".value: must be positive");
    }
    try {
        (void)build_topology(topology.kind, topology.n);
    } catch (const ConfigError& e) {
        err.push_back(std::string("topology.n: ") + e.what());
    }
    check(grid.n_radial >= 2, "grid.n_radial: must be at least 2");
    check(grid.n_angular >= 0, "grid.n_angular: must be nonnegative");
    check(geometry.coverage > 0.0 && geometry.coverage < 1.0, "geometry.coverage: must lie in (0, 1)");
    if (geometry.access == BoundaryAccess::full)
        check(geometry.arcs.empty(), "geometry.arcs: full access takes no arcs");
    if (geometry.access == BoundaryAccess::one_sided)
        check(geometry.arcs.size() == 1, "geometry.arcs: one-sided access needs exactly one arc");
    if (geometry.access == BoundaryAccess::two_sided)
        check(geometry.arcs.size() == 2, "geometry.arcs: two-sided access needs exactly two arcs");
    if (err.empty() && topology.n >= 2) {
        try {
            const PipelineSpec ps = pipeline_spec();
            const int nb = ps.n_angular > 0 ? ps.n_angular : default_angular(ps.n);
            (void)build_electrodes(ps.n, ps.geometry, nb);
        } catch (const ConfigError& e) {
            err.push_back(std::string("geometry: ") + e.what());
        }
    }
    check(noise.level >= 0.0, "noise.level: must be nonnegative");
    check(estimator.alpha >= 0.0, "estimator.alpha: must be nonnegative");
    check(estimator.sigma_max > 0.0, "estimator.sigma_max: must be positive");
    check(estimator.max_gn_steps >= 0, "estimator.max_gn_steps: must be nonnegative");
    const std::string& pr = estimator.prior;
    const bool network = estimator.parametrization == ParamKind::network;
    if (pr != "auto") {
        try {
            const PriorKind k = prior_from_string(pr);
            if (network)
                check(k != PriorKind::gaussian_conductivity,
                      "estimator.prior: the network parametrization takes upper-lower or gaussian-parameters");
            else
                check(k != PriorKind::gaussian_parameters,
                      "estimator.prior: pw-linear parametrizations take upper-lower or gaussian-conductivity");
        } catch (const ConfigError& e) {
            err.push_back(std::string("estimator.prior: ") + e.what());
        }
    }
    if (estimator.kind == EstimatorKind::layer_peeling)
        check(network, "estimator.kind: layer-peeling needs the resistor-network parametrization");
    const bool sampled = study.kind == StudyKind::monte_carlo || study.kind == StudyKind::lcurve ||
                         study.kind == StudyKind::crb || study.kind == StudyKind::linearized;
    if (sampled) check(study.m >= 1, "study.m: must be at least 1");
    if (study.kind == StudyKind::crb) check(study.m >= 2, "study.m: crb needs at least 2 samples");
    check(study.bias_samples >= 0, "study.bias_samples: must be nonnegative");
    for (size_t i = 0; i < study.alphas.size(); ++i)
        check(study.alphas[i] >= 0.0, "study.alphas[" + std::to_string(i) + "]: must be nonnegative");
    for (size_t i = 0; i < study.ns.size(); ++i)
        check(study.ns[i] >= 3, "study.ns[" + std::to_string(i) + "]: must be at least 3");
    if (study.kind == StudyKind::lcurve)
        check(estimator.kind == EstimatorKind::nonlinear_map, "estimator.kind: lcurve needs nonlinear-map");
    return err;
}

PipelineSpec ExperimentConfig::pipeline_spec() const {
    PipelineSpec ps;
    ps.kind = topology.kind;
    ps.n = topology.n;
    if (geometry.access == BoundaryAccess::full) ps.geometry = BoundaryGeometry::full(geometry.coverage);
    if (geometry.access == BoundaryAccess::one_sided && geometry.arcs.size() == 1)
        ps.geometry = BoundaryGeometry::one_sided(geometry.arcs[0], geometry.coverage);
    if (geometry.access == BoundaryAccess::two_sided && geometry.arcs.size() == 2)
        ps.geometry = BoundaryGeometry::two_sided(geometry.arcs[0], geometry.arcs[1], geometry.coverage);
    ps.n_radial = grid.n_radial;
    ps.n_angular = grid.n_angular;
    return ps;
}

Prior ExperimentConfig::prior() const {
    Prior p;
    if (estimator.prior == "auto")
        p.kind = estimator.parametrization == ParamKind::network ? PriorKind::gaussian_parameters
                                                                 : PriorKind::gaussian_conductivity;
    else
        p.kind = prior_from_string(estimator.prior);
    p.alpha = estimator.alpha;
    p.sigma_max = estimator.sigma_max;
    return p;
}

EstimatorConfig ExperimentConfig::estimator_config() const {
    EstimatorConfig e;
    e.kind = estimator.kind;
    e.prior = prior();
    return e;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("artifacts")) j = j.at("config");
    return j.get<ExperimentConfig>();
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace eitnet
