#include "eitnet/estimate.hpp"

#include "eitnet/error.hpp"

#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace eitnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd or_ones(const Eigen::VectorXd& v, Eigen::Index n) {
    return v.size() == n ? v : Eigen::VectorXd::Ones(n);
}

bool within_bounds(const NodalField& sigma, double sigma_max) {
    for (Eigen::Index k = 0; k < sigma.size(); ++k)
        if (!(sigma[k] > 0.0 && sigma[k] < sigma_max)) return false;
    return true;
}

double l2_squared(const NodalField& f, const DiskGrid& grid) { return grid.integrate(f.cwiseProduct(f)); }

/// Runs body(i) for i in [0, count), spread over threads.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int t = std::min(threads, count);
    for (int k = 0; k < t; ++k)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) body(i);
        });
    for (std::thread& th : pool) th.join();
}

}  // namespace

std::string to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::upper_lower: return "upper-lower";
        case PriorKind::gaussian_conductivity: return "gaussian-conductivity";
        case PriorKind::gaussian_parameters: return "gaussian-parameters";
    }
    return "?";
}

PriorKind prior_from_string(const std::string& name) {
    if (name == "upper-lower") return PriorKind::upper_lower;
    if (name == "gaussian-conductivity") return PriorKind::gaussian_conductivity;
    if (name == "gaussian-parameters") return PriorKind::gaussian_parameters;
    throw ConfigError("unknown prior '" + name + "'");
}

void Prior::validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("prior: alpha must be nonnegative");
    if (!(sigma_max > 0.0)) throw ConfigError("prior: sigma_max must be positive");
    for (Eigen::Index k = 0; k < sigma_ref.size(); ++k)
        if (!(sigma_ref[k] > 0.0)) throw ConfigError("prior: sigma_ref must be positive");
    for (Eigen::Index k = 0; k < s_ref.size(); ++k)
        if (!(s_ref[k] > 0.0)) throw ConfigError("prior: s_ref must be positive");
}

PriorValue log_prior(const Prior& prior, const Eigen::VectorXd& s, const Parametrization& p) {
    prior.validate();
    PriorValue out;
    if (prior.kind == PriorKind::gaussian_parameters) {
        if ((s.array() <= 0.0).any()) return {-kInf, false};
        const Eigen::VectorXd ref = or_ones(prior.s_ref, s.size());
        out.value = -0.5 * prior.alpha * (s.array().log() - ref.array().log()).matrix().squaredNorm();
        return out;
    }
    NodalField sigma;
    try {
        sigma = p.apply(s);
    } catch (const InconsistentData&) {
        return {-kInf, false};
    }
    if (!within_bounds(sigma, prior.sigma_max)) return {-kInf, false};
    if (prior.kind == PriorKind::gaussian_conductivity) {
        const DiskGrid& grid = p.pipeline().grid();
        const NodalField ref = or_ones(prior.sigma_ref, grid.node_count());
        out.value = -0.5 * prior.alpha * l2_squared(sigma - ref, grid);
    }
    return out;
}

// ---------------------------------------------------------------- MAP

namespace {

MapResult map_network(const DataVector& d, const Eigen::VectorXd& c, const Parametrization& p, const Prior& prior,
                      bool want_sigma) {
    const Pipeline& pl = p.pipeline();
    const Eigen::VectorXd& g1 = pl.optimal().gamma1;
    double alpha = 0.0;
    if (prior.kind == PriorKind::gaussian_parameters)
        alpha = prior.alpha;
    else if (prior.kind != PriorKind::upper_lower)
        throw ConfigError("map_estimate_nonlinear: the network parametrization takes an upper-lower or "
                          "gaussian-parameters prior");
    const Eigen::VectorXd kref = (g1.array().log() + or_ones(prior.s_ref, g1.size()).array().log()).matrix();
    MapResult out;
    if (alpha == 0.0) {
        RecoveryConfig rc;
        rc.method = RecoveryMethod::peel_then_fit;
        const RecoveryResult rec = recover_conductances(d, pl.graph(), rc, kref, c);
        out.s = rec.gamma.cwiseQuotient(g1);
        out.converged = rec.converged;
    } else {
        const FitResult fit = fit_conductances(d, c, alpha, kref, pl.graph(), kref);
        out.s = fit.gamma.cwiseQuotient(g1);
        out.converged = fit.converged;
        out.iterations = fit.iterations;
        out.objective = fit.objective;
    }
    if (want_sigma) {
        out.sigma = p.apply(out.s);
        out.feasible = within_bounds(out.sigma, prior.sigma_max);
    }
    return out;
}

MapResult map_linear_kind(const DataVector& d, const Eigen::VectorXd& c, const Parametrization& p,
                          const Prior& prior, const MapOptions& options) {
    if (prior.kind == PriorKind::gaussian_parameters)
        throw ConfigError("map_estimate_nonlinear: pw-linear parametrizations take an upper-lower or "
                          "gaussian-conductivity prior");
    const Pipeline& pl = p.pipeline();
    const DiskGrid& grid = pl.grid();
    const LinearInterpolant& phi = p.interpolant();
    const double alpha = prior.kind == PriorKind::gaussian_conductivity ? prior.alpha : 0.0;
    const NodalField ref = or_ones(prior.sigma_ref, grid.node_count());
    const Eigen::VectorXd w = c.cwiseInverse();
    const double shift = options.shift / c[0];
    const Eigen::SparseMatrix<double> phit = phi.weights.transpose();
    const Eigen::MatrixXd prior_h = alpha * Eigen::MatrixXd(phit * grid.areas().asDiagonal() * phi.weights);

    auto objective = [&](const NodalField& sigma, const DataVector& r) {
        return r.cwiseProduct(w).dot(r) + alpha * l2_squared(sigma - ref, grid);
    };

    MapResult out;
    out.s = Eigen::VectorXd::Ones(p.size());
    NodalField sigma = phi.apply(out.s);
    if (!within_bounds(sigma, prior.sigma_max)) throw SolverError("map_estimate_nonlinear: infeasible start");
    double grad0 = -1.0;
    out.converged = false;
    for (int it = 0;; ++it) {
        const ForwardJacobian fj = forward_with_jacobian(grid, sigma, pl.electrodes());
        const DataVector r = fj.data - d;
        out.objective = objective(sigma, r);
        const Eigen::MatrixXd j = fj.jacobian * phi.weights;
        const Eigen::VectorXd grad =
            j.transpose() * w.cwiseProduct(r) + alpha * (phit * grid.areas().cwiseProduct(sigma - ref));
        const double gn = grad.norm();
        if (grad0 < 0.0) grad0 = gn;
        out.iterations = it;
        if (gn <= options.gradient_drop * grad0 || gn == 0.0) {
            out.converged = true;
            break;
        }
        if (it == options.max_iterations) break;
        Eigen::MatrixXd h = j.transpose() * w.asDiagonal() * j + prior_h;
        h.diagonal().array() += shift;
        const Eigen::VectorXd step = -h.ldlt().solve(grad);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40 && !accepted; ++ls, t *= 0.5) {
            const Eigen::VectorXd trial = out.s + t * step;
            const NodalField ts = phi.apply(trial);
            if (!within_bounds(ts, prior.sigma_max)) continue;
            const DataVector tr = forward_map(ts, pl.electrodes(), grid) - d;
            if (objective(ts, tr) <= out.objective) {
                out.s = trial;
                sigma = ts;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
    out.sigma = sigma;
    return out;
}

}  // namespace

MapResult map_estimate_nonlinear(const DataVector& d, const Eigen::VectorXd& covariance, const Parametrization& p,
                                 const Prior& prior, const MapOptions& options, bool want_sigma) {
    prior.validate();
    if (d.size() != p.size() || covariance.size() != p.size())
        throw ConfigError("map_estimate_nonlinear: size mismatch");
    if ((covariance.array() <= 0.0).any()) throw ConfigError("map_estimate_nonlinear: covariance must be positive");
    if (p.kind() == ParamKind::network) return map_network(d, covariance, p, prior, want_sigma);
    MapResult out = map_linear_kind(d, covariance, p, prior, options);
    if (!want_sigma) out.sigma.resize(0);
    return out;
}

LinearizedModel::LinearizedModel(const Parametrization& p, const Eigen::VectorXd& covariance) {
    const Pipeline& pl = p.pipeline();
    if (covariance.size() != p.size()) throw ConfigError("LinearizedModel: covariance size mismatch");
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(p.size());
    basis_ = p.jacobian(one);
    const ForwardJacobian fj = forward_with_jacobian(pl.grid(), NodalField::Ones(pl.grid().node_count()),
                                                     pl.electrodes());
    f1_ = fj.data;
    j_ = fj.jacobian * basis_;
    inv_sqrt_c_ = covariance.cwiseSqrt().cwiseInverse();
    m_ = inv_sqrt_c_.asDiagonal() * j_;
}

MapResult LinearizedModel::solve(const DataVector& d) const {
    const Eigen::VectorXd y = inv_sqrt_c_.cwiseProduct(d - f1_);
    // sigma = 1 + B ds >= 0 on every fine node
    const Eigen::VectorXd b = -Eigen::VectorXd::Ones(basis_.rows());
    const QpResult qp = solve_constrained_lsq(m_, y, basis_, b, Eigen::VectorXd::Zero(j_.cols()));
    MapResult out;
    out.s = Eigen::VectorXd::Ones(j_.cols()) + qp.x;
    out.sigma = (basis_ * qp.x).array() + 1.0;
    out.active = out.sigma.minCoeff() <= kActiveTolerance;
    out.converged = !qp.stalled;
    out.iterations = qp.iterations;
    out.objective = (m_ * qp.x - y).squaredNorm();
    return out;
}

Eigen::VectorXd LinearizedModel::unconstrained(const DataVector& d) const {
    const Eigen::VectorXd y = inv_sqrt_c_.cwiseProduct(d - f1_);
    return Eigen::VectorXd::Ones(j_.cols()) + m_.colPivHouseholderQr().solve(y);
}

MapResult map_estimate_linearized(const DataVector& d, const Eigen::VectorXd& covariance, const Parametrization& p) {
    return LinearizedModel(p, covariance).solve(d);
}

// ---------------------------------------------------------------- Monte Carlo

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t sample_seed(std::uint64_t master, std::uint64_t k) {
    std::uint64_t state = master ^ (0xd1b54a32d192ed03ULL * (k + 1));
    return splitmix64(state);
}

McStats monte_carlo(const Sampler& sampler, int m, std::uint64_t master_seed, int threads,
                    const Eigen::VectorXd* s_ref, const NodalField* sigma_ref) {
    if (m < 1) throw ConfigError("monte_carlo: need at least one sample");
    std::vector<std::optional<SampleOutcome>> results(static_cast<size_t>(m));
    parallel_for(m, threads, [&](int i) {
        try {
            results[static_cast<size_t>(i)] = sampler(sample_seed(master_seed, static_cast<std::uint64_t>(i)));
        } catch (const std::exception&) {
            results[static_cast<size_t>(i)].reset();
        }
    });
    McStats st;
    st.requested = m;
    st.master_seed = master_seed;
    bool with_sigma = true;
    for (const auto& r : results) {
        if (!r) {
            ++st.failures;
            continue;
        }
        if (st.samples == 0) {
            st.mean_s = Eigen::VectorXd::Zero(r->s.size());
            st.mean_sigma = NodalField::Zero(r->sigma.size());
        }
        ++st.samples;
        if (r->active) ++st.active_count;
        if (r->clamped) ++st.clamped_count;
        st.mean_s += r->s;
        if (r->sigma.size() == 0 || r->sigma.size() != st.mean_sigma.size())
            with_sigma = false;
        else
            st.mean_sigma += r->sigma;
    }
    if (st.samples == 0) throw SolverError("monte_carlo: every sample failed");
    st.mean_s /= st.samples;
    if (!with_sigma || st.mean_sigma.size() == 0) {
        with_sigma = false;
        st.mean_sigma.resize(0);
    } else {
        st.mean_sigma /= st.samples;
    }
    st.var_s = Eigen::VectorXd::Zero(st.mean_s.size());
    if (with_sigma) st.var_sigma = NodalField::Zero(st.mean_sigma.size());
    for (const auto& r : results) {
        if (!r) continue;
        st.var_s += (r->s - st.mean_s).array().square().matrix();
        if (with_sigma) st.var_sigma += (r->sigma - st.mean_sigma).array().square().matrix();
    }
    const double denom = st.samples > 1 ? st.samples - 1.0 : 1.0;
    st.var_s /= denom;
    if (with_sigma) st.var_sigma /= denom;
    if (s_ref != nullptr && s_ref->size() == st.mean_s.size()) st.bias_s = *s_ref - st.mean_s;
    if (with_sigma && sigma_ref != nullptr && sigma_ref->size() == st.mean_sigma.size())
        st.bias_sigma = *sigma_ref - st.mean_sigma;
    return st;
}

// ---------------------------------------------------------------- experiments

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::layer_peeling: return "layer-peeling";
        case EstimatorKind::nonlinear_map: return "nonlinear-map";
        case EstimatorKind::linearized_map: return "linearized-map";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "layer-peeling") return EstimatorKind::layer_peeling;
    if (name == "nonlinear-map") return EstimatorKind::nonlinear_map;
    if (name == "linearized-map") return EstimatorKind::linearized_map;
    throw ConfigError("unknown estimator '" + name + "'");
}

Experiment::Experiment(std::shared_ptr<const Parametrization> param, const NodalField& sigma_true, NoiseModel model,
                       double level, EstimatorConfig estimator)
    : param_(std::move(param)),
      sigma_true_(sigma_true),
      model_(model),
      level_(level),
      estimator_(std::move(estimator)),
      star_(std::make_shared<std::optional<Star>>()),
      star_mutex_(std::make_shared<std::mutex>()) {
    if (!param_) throw ConfigError("Experiment: missing parametrization");
    if (!(level_ >= 0.0)) throw ConfigError("Experiment: noise level must be nonnegative");
    estimator_.prior.validate();
    const Pipeline& pl = pipeline();
    if (sigma_true_.size() != pl.grid().node_count()) throw ConfigError("Experiment: truth has wrong size");
    if (estimator_.kind == EstimatorKind::layer_peeling && param_->kind() != ParamKind::network)
        throw ConfigError("Experiment: the layer-peeling estimator needs the network parametrization");
    data_true_ = pl.forward(sigma_true_);
    covariance_ = pl.noise().covariance(model_, level_);
    if (estimator_.kind == EstimatorKind::linearized_map)
        linear_ = std::make_shared<const LinearizedModel>(*param_, covariance_);
}

Experiment Experiment::with_alpha(double alpha) const {
    Experiment e = *this;
    e.estimator_.prior.alpha = alpha;
    e.estimator_.prior.validate();
    return e;
}

DataVector Experiment::noise(std::uint64_t seed) const {
    if (level_ == 0.0) return DataVector::Zero(data_true_.size());
    return pipeline().noise().sample({model_, level_, seed});
}

DataVector Experiment::model_data(const Eigen::VectorXd& s) const {
    // F(S(s)) = F_net(s o gamma1) is the defining identity of the network kind
    if (param_->kind() == ParamKind::network)
        return discrete_forward(s.cwiseProduct(pipeline().optimal().gamma1), pipeline().graph());
    return pipeline().forward(param_->apply(s));
}

MapResult Experiment::estimate(const DataVector& d, bool want_sigma) const {
    switch (estimator_.kind) {
        case EstimatorKind::layer_peeling: {
            const QResult q = recon_Q(d, pipeline());
            MapResult out;
            out.s = q.q;
            out.clamped = q.clamped;
            out.converged = q.converged;
            if (want_sigma) out.sigma = param_->apply(q.q.cwiseMax(kRatioFloor));
            return out;
        }
        case EstimatorKind::nonlinear_map:
            return map_estimate_nonlinear(d, covariance_, *param_, estimator_.prior, estimator_.map, want_sigma);
        case EstimatorKind::linearized_map: return linear_->solve(d);
    }
    throw ConfigError("Experiment: unknown estimator");
}

SampleOutcome Experiment::sample(std::uint64_t seed) const {
    const MapResult r = estimate(data_true_ + noise(seed), estimator_.sigma_maps);
    SampleOutcome out;
    out.s = r.s;
    if (estimator_.sigma_maps) out.sigma = r.sigma;
    out.active = r.active;
    out.clamped = r.clamped;
    return out;
}

Sampler Experiment::sampler() const {
    return [this](std::uint64_t seed) { return sample(seed); };
}

const Experiment::Star& Experiment::star() const {
    std::lock_guard<std::mutex> lock(*star_mutex_);
    if (!*star_) {
        Star st;
        if (estimator_.kind == EstimatorKind::nonlinear_map) {
            Prior ul;
            ul.kind = PriorKind::upper_lower;
            ul.sigma_max = estimator_.prior.sigma_max;
            const MapResult r = map_estimate_nonlinear(data_true_, covariance_, *param_, ul, estimator_.map, true);
            st.s = r.s;
            st.sigma = r.sigma;
        } else {
            const MapResult r = estimate(data_true_, true);
            st.s = r.s;
            st.sigma = r.sigma;
        }
        *star_ = std::move(st);
    }
    return **star_;
}

const Eigen::VectorXd& Experiment::s_star() const { return star().s; }

const NodalField& Experiment::sigma_star() const { return star().sigma; }

McStats monte_carlo(const Experiment& experiment, int m, std::uint64_t master_seed, int threads) {
    const Eigen::VectorXd& s = experiment.s_star();
    const NodalField& sigma = experiment.sigma_star();
    return monte_carlo(experiment.sampler(), m, master_seed, threads, &s, &sigma);
}

// ---------------------------------------------------------------- Fisher, CRB, bias

Eigen::MatrixXd parameter_jacobian(const Eigen::VectorXd& s, const Parametrization& p) {
    const Pipeline& pl = p.pipeline();
    if (p.kind() == ParamKind::network) {
        // D_sigma F D_s S = D_gamma F_net diag(gamma1) by the defining identity of S
        const Eigen::VectorXd& g1 = pl.optimal().gamma1;
        return jacobian_discrete_forward(s.cwiseProduct(g1), pl.graph()) * g1.asDiagonal();
    }
    const NodalField sigma = p.apply(s);
    return dsigma_forward(sigma, pl.electrodes(), pl.grid()) * p.interpolant().weights;
}

Eigen::MatrixXd fisher(const Eigen::VectorXd& s, const Parametrization& p, const Eigen::VectorXd& covariance) {
    const Eigen::MatrixXd j = parameter_jacobian(s, p);
    if (covariance.size() != j.rows()) throw ConfigError("fisher: covariance size mismatch");
    Eigen::MatrixXd f = j.transpose() * covariance.cwiseInverse().asDiagonal() * j;
    return 0.5 * (f + f.transpose());
}

Eigen::MatrixXd bias_factor(const ParamEstimator& estimator, const Eigen::VectorXd& s_star, int m, double h,
                            std::uint64_t master_seed, int threads, int* failures) {
    if (m < 1 || !(h > 0.0)) throw ConfigError("bias_factor: need m >= 1 and a positive step");
    const Eigen::Index g = s_star.size();
    Eigen::MatrixXd b(g, g);
    int failed = 0;
    for (Eigen::Index k = 0; k < g; ++k) {
        Eigen::VectorXd sp = s_star, sm = s_star;
        sp[k] += h;
        sm[k] -= h;
        std::vector<std::optional<Eigen::VectorXd>> diff(static_cast<size_t>(m));
        parallel_for(m, threads, [&](int i) {
            const std::uint64_t seed = sample_seed(master_seed, static_cast<std::uint64_t>(i));
            try {
                diff[static_cast<size_t>(i)] = estimator(sp, seed) - estimator(sm, seed);
            } catch (const std::exception&) {
                diff[static_cast<size_t>(i)].reset();
            }
        });
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(g);
        int ok = 0;
        for (const auto& dv : diff) {
            if (!dv) {
                ++failed;
                continue;
            }
            acc += *dv;
            ++ok;
        }
        if (ok == 0) throw SolverError("bias_factor: every sample failed");
        b.col(k) = acc / (2.0 * h * ok);
    }
    if (failures != nullptr) *failures = failed;
    return b;
}

CrbReport crb_report(const Experiment& experiment, int m, std::uint64_t master_seed, int threads, int bias_samples,
                     double bias_step) {
    CrbReport rep;
    const Eigen::VectorXd& s_star = experiment.s_star();
    rep.fisher = fisher(s_star, experiment.parametrization(), experiment.covariance());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rep.fisher);
    const Eigen::VectorXd sv = svd.singularValues();
    rep.fisher_condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : kInf;
    if (!std::isfinite(rep.fisher_condition) || rep.fisher_condition > 1e16) {
        std::ostringstream msg;
        msg << "crb_report: singular Fisher matrix (condition " << rep.fisher_condition << ")";
        throw SolverError(msg.str());
    }
    // bias factor taken as the identity
    rep.crb = rep.fisher.ldlt().solve(Eigen::MatrixXd::Identity(s_star.size(), s_star.size())).diagonal();
    const Sampler sampler = [&](std::uint64_t seed) {
        SampleOutcome o;
        o.s = experiment.estimate(experiment.data_true() + experiment.noise(seed), false).s;
        return o;
    };
    const McStats st = monte_carlo(sampler, m, master_seed, threads, &s_star);
    rep.failures = st.failures;
    rep.variance = st.var_s;
    rep.relative = (rep.variance - rep.crb).cwiseQuotient(rep.crb);
    if (bias_samples > 0) {
        const ParamEstimator est = [&](const Eigen::VectorXd& s, std::uint64_t seed) {
            return experiment.estimate(experiment.model_data(s) + experiment.noise(seed), false).s;
        };
        int failed = 0;
        rep.bias = bias_factor(est, s_star, bias_samples, bias_step, master_seed ^ 0xb1a5ULL, threads, &failed);
        rep.failures += failed;
    }
    return rep;
}

// ---------------------------------------------------------------- studies

std::vector<ConditionRow> condition_study(const std::vector<int>& ns, const std::vector<ParamKind>& kinds,
                                          int n_radial, double coverage) {
    std::vector<ConditionRow> rows;
    auto cond = [](const Eigen::MatrixXd& a) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        const Eigen::VectorXd sv = svd.singularValues();
        const Eigen::Index k = std::min(a.rows(), a.cols()) - 1;
        return sv[k] > 0.0 ? sv[0] / sv[k] : kInf;
    };
    for (int n : ns) {
        PipelineSpec spec;
        spec.n = n;
        spec.n_radial = n_radial;
        spec.geometry = BoundaryGeometry::full(coverage);
        const auto pl = make_pipeline(spec);
        const DiskGrid& grid = pl->grid();
        const Eigen::MatrixXd dsf =
            dsigma_forward(NodalField::Ones(grid.node_count()), pl->electrodes(), grid);
        rows.push_back({n, "fine-grid", cond(dsf * grid.areas().cwiseSqrt().cwiseInverse().asDiagonal())});
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(pl->parameter_count());
        for (ParamKind k : kinds) {
            const Parametrization p(k, pl);
            rows.push_back({n, to_string(k), cond(dsf * p.jacobian(one))});
        }
    }
    return rows;
}

LCurvePoint lcurve_metrics(const McStats& stats, const NodalField& sigma_true, const DiskGrid& grid, double alpha) {
    if (stats.mean_sigma.size() != sigma_true.size()) throw ConfigError("lcurve: statistics carry no sigma maps");
    LCurvePoint pt;
    pt.alpha = alpha;
    pt.failures = stats.failures;
    pt.true_bias = 100.0 * std::sqrt(l2_squared(sigma_true - stats.mean_sigma, grid) / l2_squared(sigma_true, grid));
    pt.rel_std = 100.0 * std::sqrt(grid.integrate(stats.var_sigma) / l2_squared(stats.mean_sigma, grid));
    return pt;
}

std::vector<LCurvePoint> lcurve(const Experiment& experiment, const std::vector<double>& alphas, int m,
                                std::uint64_t master_seed, int threads) {
    std::vector<LCurvePoint> out;
    for (double a : alphas) {
        const Experiment e = experiment.with_alpha(a);
        const McStats st = monte_carlo(e.sampler(), m, master_seed, threads);
        out.push_back(lcurve_metrics(st, e.sigma_true(), e.pipeline().grid(), a));
    }
    return out;
}

std::vector<double> alpha_sweep(int count) {
    std::vector<double> a;
    for (int j = 1; j <= count; ++j) a.push_back(std::pow(10.0, -0.5 * j));
    return a;
}

}  // namespace eitnet
