#include "eitnet/study.hpp"

#include "eitnet/error.hpp"

#include <chrono>
#include <sstream>

#ifndef EITNET_VERSION
#define EITNET_VERSION "0.0.0"
#endif

namespace eitnet {

using nlohmann::json;

std::string software_version() { return EITNET_VERSION; }

std::vector<std::pair<std::string, std::string>> study_catalog() {
    return {
        {"single", "one noisy data set: sigma0 and Gauss-Newton reconstruction (sigma.csv, conductances.csv)"},
        {"monte-carlo", "M noisy samples through the estimator: mean, std and bias maps (maps.csv, parameters.csv)"},
        {"lcurve", "TrueBias against RelStd over an alpha list (lcurve.csv)"},
        {"crb", "sample variance against the Cramer-Rao bound, optional bias factor (crb.csv, bias_factor.csv)"},
        {"condition-study", "condition numbers of D_sigma F(1) D_s S(1) over n (condition.csv)"},
        {"linearized", "constrained linearized MAP at sigma = 1: active rates and std maps (maps.csv)"},
    };
}

namespace {

class Stopwatch {
public:
    explicit Stopwatch(json& timings) : timings_(timings), t0_(clock::now()) {}
    void lap(const std::string& stage) {
        const auto t = clock::now();
        timings_[stage] = std::chrono::duration<double>(t - t0_).count();
        t0_ = t;
    }

private:
    using clock = std::chrono::steady_clock;
    json& timings_;
    clock::time_point t0_;
};

struct Context {
    const ExperimentConfig& config;
    const RunOptions& options;
    ArtifactWriter& out;
    json& manifest;
    Stopwatch& clock;
    std::uint64_t seed;
    int failures = 0;
};

struct Scale {
    double lo = 0.0;
    double hi = 1.0;
};

Scale truth_scale(const NodalField& truth) { return {truth.minCoeff(), truth.maxCoeff()}; }

void raster(Context& c, const std::string& name, const NodalField& f, const DiskGrid& grid, Scale s) {
    c.out.write(name, pgm_raster(f, grid, s.lo, s.hi));
}

CsvTable parameter_table(const Parametrization& p, const std::vector<std::string>& names,
                         const std::vector<const Eigen::VectorXd*>& cols) {
    std::vector<std::string> header = {"k", "x", "y"};
    header.insert(header.end(), names.begin(), names.end());
    CsvTable t(header);
    for (int k = 0; k < p.size(); ++k) {
        const Point2 q = p.points()[static_cast<size_t>(k)];
        std::vector<std::string> cells = {std::to_string(k), format_double(q.x), format_double(q.y)};
        for (const Eigen::VectorXd* v : cols) cells.push_back(format_double((*v)[k]));
        t.add(cells);
    }
    return t;
}

void write_stats(Context& c, const McStats& st, const Experiment& e) {
    const DiskGrid& grid = e.pipeline().grid();
    const NodalField& truth = e.sigma_true();
    const NodalField sd = st.var_sigma.cwiseSqrt();
    const NodalField rel = sd.cwiseQuotient(st.mean_sigma.cwiseAbs());
    c.out.write("maps.csv", nodal_table(grid, {"truth", "sigma_star", "mean", "std", "rel_std", "bias"},
                                        {&truth, &e.sigma_star(), &st.mean_sigma, &sd, &rel, &st.bias_sigma})
                                .text());
    const Eigen::VectorXd sds = st.var_s.cwiseSqrt();
    c.out.write("parameters.csv", parameter_table(e.parametrization(), {"s_star", "mean", "std", "bias"},
                                                  {&e.s_star(), &st.mean_s, &sds, &st.bias_s})
                                      .text());
    CsvTable sum({"requested", "samples", "failures", "active", "active_rate", "clamped", "max_std", "max_rel_std",
                  "max_abs_bias"});
    sum.add({std::to_string(st.requested), std::to_string(st.samples), std::to_string(st.failures),
             std::to_string(st.active_count), format_double(st.active_rate()), std::to_string(st.clamped_count),
             format_double(sd.maxCoeff()), format_double(rel.maxCoeff()),
             format_double(st.bias_sigma.cwiseAbs().maxCoeff())});
    c.out.write("summary.csv", sum.text());
    const Scale ts = truth_scale(truth);
    raster(c, "truth.pgm", truth, grid, ts);
    raster(c, "mean.pgm", st.mean_sigma, grid, ts);
    raster(c, "std.pgm", sd, grid, {0.0, sd.maxCoeff()});
    const double b = st.bias_sigma.cwiseAbs().maxCoeff();
    raster(c, "bias.pgm", st.bias_sigma, grid, {-b, b});
    c.failures += st.failures;
    c.manifest["failures"]["samples"] = st.failures;
    c.manifest["active_rate"] = st.active_rate();
}

void run_single(Context& c, const std::shared_ptr<const Pipeline>& pl, const NodalField& truth) {
    DataVector d = pl->forward(truth);
    if (c.config.noise.level > 0.0) {
        const NoiseSpec ns{c.config.noise.model, c.config.noise.level, c.seed};
        d += pl->noise().sample(ns);
    }
    c.clock.lap("data");
    const QResult q = recon_Q(d, *pl);
    const NodalField sigma0 = interpolate_sigma0(q.q.cwiseMax(kRatioFloor), *pl);
    c.clock.lap("sigma0");
    GnOptions gn;
    gn.max_steps = c.config.estimator.max_gn_steps;
    const ReconState st = gauss_newton_target(q.log(), sigma0.array().log().matrix(), *pl, gn);
    const NodalField rec = st.sigma();
    c.clock.lap("reconstruction");

    const DiskGrid& grid = pl->grid();
    c.out.write("sigma.csv", nodal_table(grid, {"truth", "sigma0", "reconstruction"}, {&truth, &sigma0, &rec}).text());
    const OptimalGrid& og = pl->optimal();
    CsvTable ct({"k", "a", "b", "x", "y", "gamma1", "q"});
    for (int k = 0; k < pl->parameter_count(); ++k) {
        const Point2 pt = og.points[static_cast<size_t>(k)];
        const auto [a, b] = pl->graph().edges[static_cast<size_t>(k)];
        ct.add({std::to_string(k), std::to_string(a), std::to_string(b), format_double(pt.x), format_double(pt.y),
                format_double(og.gamma1[k]), format_double(q.q[k])});
    }
    c.out.write("conductances.csv", ct.text());
    CsvTable rt({"step", "residual"});
    for (size_t j = 0; j < st.residuals.size(); ++j) rt.add({static_cast<double>(j), st.residuals[j]});
    c.out.write("residuals.csv", rt.text());
    const Scale ts = truth_scale(truth);
    raster(c, "truth.pgm", truth, grid, ts);
    raster(c, "sigma0.pgm", sigma0, grid, ts);
    raster(c, "reconstruction.pgm", rec, grid, ts);
    c.manifest["flags"] = {{"peeled", q.peeled}, {"clamped", q.clamped || st.clamped}, {"converged", st.converged}};
}

std::shared_ptr<const Parametrization> make_param(const ExperimentConfig& cfg, const std::shared_ptr<const Pipeline>& pl) {
    return std::make_shared<const Parametrization>(cfg.estimator.parametrization, pl);
}

void run_monte_carlo(Context& c, const std::shared_ptr<const Pipeline>& pl, const NodalField& truth) {
    const auto par = make_param(c.config, pl);
    const Experiment e(par, truth, c.config.noise.model, c.config.noise.level, c.config.estimator_config());
    c.clock.lap("setup");
    (void)e.s_star();
    c.clock.lap("star");
    const McStats st = monte_carlo(e, c.config.study.m, c.seed, c.options.threads);
    c.clock.lap("samples");
    write_stats(c, st, e);
}

void run_linearized(Context& c, const std::shared_ptr<const Pipeline>& pl) {
    const auto par = make_param(c.config, pl);
    EstimatorConfig ec = c.config.estimator_config();
    ec.kind = EstimatorKind::linearized_map;
    // the linearization point is also the truth
    const NodalField ones = NodalField::Ones(pl->grid().node_count());
    const Experiment e(par, ones, c.config.noise.model, c.config.noise.level, ec);
    c.clock.lap("setup");
    const McStats st = monte_carlo(e, c.config.study.m, c.seed, c.options.threads);
    c.clock.lap("samples");
    write_stats(c, st, e);
}

void run_lcurve(Context& c, const std::shared_ptr<const Pipeline>& pl, const NodalField& truth) {
    const auto par = make_param(c.config, pl);
    const Experiment e(par, truth, c.config.noise.model, c.config.noise.level, c.config.estimator_config());
    std::vector<double> alphas = c.config.study.alphas;
    if (alphas.empty()) alphas = alpha_sweep(par->is_linear() ? 6 : 12);
    c.clock.lap("setup");
    const std::vector<LCurvePoint> pts = lcurve(e, alphas, c.config.study.m, c.seed, c.options.threads);
    c.clock.lap("samples");
    CsvTable t({"alpha", "true_bias_percent", "rel_std_percent", "failures"});
    int failed = 0;
    for (const LCurvePoint& p : pts) {
        t.add({format_double(p.alpha), format_double(p.true_bias), format_double(p.rel_std), std::to_string(p.failures)});
        failed += p.failures;
    }
    c.out.write("lcurve.csv", t.text());
    c.failures += failed;
    c.manifest["failures"]["samples"] = failed;
}

void run_crb(Context& c, const std::shared_ptr<const Pipeline>& pl, const NodalField& truth) {
    const auto par = make_param(c.config, pl);
    const Experiment e(par, truth, c.config.noise.model, c.config.noise.level, c.config.estimator_config());
    c.clock.lap("setup");
    const CrbReport rep = crb_report(e, c.config.study.m, c.seed, c.options.threads, c.config.study.bias_samples);
    c.clock.lap("samples");
    c.out.write("crb.csv", parameter_table(*par, {"s_star", "crb", "variance", "relative"},
                                           {&e.s_star(), &rep.crb, &rep.variance, &rep.relative})
                               .text());
    if (rep.bias.size() > 0) {
        std::vector<std::string> header = {"k"};
        for (Eigen::Index j = 0; j < rep.bias.cols(); ++j) header.push_back("d" + std::to_string(j));
        CsvTable bt(header);
        for (Eigen::Index i = 0; i < rep.bias.rows(); ++i) {
            std::vector<std::string> cells = {std::to_string(i)};
            for (Eigen::Index j = 0; j < rep.bias.cols(); ++j) cells.push_back(format_double(rep.bias(i, j)));
            bt.add(cells);
        }
        c.out.write("bias_factor.csv", bt.text());
    }
    CsvTable sum({"fisher_condition", "max_abs_relative", "failures"});
    sum.add({rep.fisher_condition, rep.relative.cwiseAbs().maxCoeff(), static_cast<double>(rep.failures)});
    c.out.write("summary.csv", sum.text());
    c.failures += rep.failures;
    c.manifest["failures"]["samples"] = rep.failures;
}

void run_condition(Context& c) {
    std::vector<int> ns = c.config.study.ns;
    if (ns.empty()) ns = {5, 7, 9, 11};
    std::vector<ParamKind> kinds = c.config.study.parametrizations;
    if (kinds.empty()) kinds = {ParamKind::pw_linear_uniform, ParamKind::pw_linear_optimal, ParamKind::network};
    const std::vector<ConditionRow> rows = condition_study(ns, kinds, c.config.grid.n_radial, c.config.geometry.coverage);
    c.clock.lap("conditions");
    CsvTable t({"n", "parametrization", "condition"});
    for (const ConditionRow& r : rows) t.add({std::to_string(r.n), r.parametrization, format_double(r.condition)});
    c.out.write("condition.csv", t.text());
}

}  // namespace

RunOutcome run_study(ExperimentConfig config, const RunOptions& options) {
    if (options.seed) config.noise.seed = *options.seed;
    const std::vector<std::string> errors = config.validate();
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "invalid config:";
        for (const auto& e : errors) msg << "\n  " << e;
        throw ConfigError(msg.str());
    }
    if (options.threads < 1) throw ConfigError("threads: must be at least 1");

    json manifest;
    manifest["config"] = config;
    manifest["software"] = {{"name", "eitnet"}, {"version", software_version()}};
    manifest["seeds"] = {{"master", config.noise.seed}};
    manifest["timings"] = json::object();
    manifest["failures"] = {{"samples", 0}};
    ArtifactWriter out(options.output_dir);
    Stopwatch clock(manifest["timings"]);
    Context c{config, options, out, manifest, clock, config.noise.seed};

    const StudyKind kind = config.study.kind;
    if (kind == StudyKind::condition_study) {
        run_condition(c);
    } else {
        const auto pl = make_pipeline(config.pipeline_spec());
        const NodalField truth = define_phantom(config.phantom, pl->grid());
        manifest["network"] = {{"edges", pl->parameter_count()},
                               {"gamma1_residual", pl->optimal().recovery_residual}};
        clock.lap("pipeline");
        switch (kind) {
            case StudyKind::single: run_single(c, pl, truth); break;
            case StudyKind::monte_carlo: run_monte_carlo(c, pl, truth); break;
            case StudyKind::lcurve: run_lcurve(c, pl, truth); break;
            case StudyKind::crb: run_crb(c, pl, truth); break;
            case StudyKind::linearized: run_linearized(c, pl); break;
            case StudyKind::condition_study: break;
        }
    }

    json artifacts = json::array();
    for (const auto& e : out.entries()) artifacts.push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    manifest["artifacts"] = artifacts;
    out.write("manifest.json", manifest.dump(2) + "\n");
    return {manifest, c.failures};
}

}  // namespace eitnet
