#include "eitnet/reconstruct.hpp"

#include "eitnet/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace eitnet {

int default_angular(int n) {
    if (n < 1) throw ConfigError("default_angular: n must be positive");
    int m = n;
    while (m < 96) m += n;
    return m;
}

Pipeline::Pipeline(const PipelineSpec& spec)
    : spec_(spec),
      grid_(spec.n_radial, spec.n_angular > 0 ? spec.n_angular : default_angular(spec.n)),
      electrodes_(build_electrodes(spec.n, spec.geometry, grid_.n_angular())),
      graph_(build_topology(spec.kind, spec.n)),
      optimal_(optimal_grid(electrodes_, grid_, graph_)),
      noise_(std::make_unique<NoiseGenerator>(grid_, electrodes_)) {
    if (spec_.n_angular <= 0) spec_.n_angular = grid_.n_angular();
}

std::shared_ptr<const Pipeline> make_pipeline(const PipelineSpec& spec) { return std::make_shared<const Pipeline>(spec); }

Eigen::VectorXd QResult::log() const { return q.cwiseMax(kRatioFloor).array().log().matrix(); }

QResult recon_Q(const DataVector& d, const Pipeline& pipeline, const Eigen::VectorXd& kappa_start) {
    const Eigen::VectorXd& g1 = pipeline.optimal().gamma1;
    if (d.size() != g1.size()) throw ConfigError("recon_Q: data length does not match the network");
    Eigen::VectorXd ref = g1.array().log().matrix();
    if (kappa_start.size() == g1.size()) ref = kappa_start;
    const Eigen::VectorXd cov = Eigen::VectorXd::Ones(g1.size());
    const RecoveryResult rec = recover_conductances(d, pipeline.graph(), pipeline.recovery(), ref, cov);
    QResult out;
    out.q = rec.gamma.cwiseQuotient(g1);
    out.peeled = rec.peeled;
    out.converged = rec.converged;
    for (Eigen::Index k = 0; k < out.q.size(); ++k)
        if (!(out.q[k] > kRatioFloor)) out.clamped = true;
    return out;
}

NodalField interpolate_sigma0(const Eigen::VectorXd& q, const Pipeline& pipeline) {
    return pipeline.optimal().interpolant.apply(q);
}

Eigen::VectorXd map_G(const NodalField& kappa, const Pipeline& pipeline) {
    const NodalField sigma = kappa.array().exp().matrix();
    return recon_Q(pipeline.forward(sigma), pipeline).log();
}

GJacobian map_G_jacobian(const NodalField& kappa, const Pipeline& pipeline, const Eigen::VectorXd& kappa_start) {
    const NodalField sigma = kappa.array().exp().matrix();
    const Eigen::VectorXd& g1 = pipeline.optimal().gamma1;
    const Eigen::VectorXd ref = kappa_start.size() == g1.size() ? kappa_start : Eigen::VectorXd(g1.array().log());
    const SensitivityField sens = dsigma_gamma(sigma, pipeline.electrodes(), pipeline.grid(), pipeline.graph(),
                                               pipeline.recovery(), ref);
    GJacobian out;
    out.gamma = sens.gamma;
    out.value = sens.gamma.cwiseQuotient(pipeline.optimal().gamma1).cwiseMax(kRatioFloor).array().log().matrix();
    out.jacobian = sens.gamma.cwiseInverse().asDiagonal() * sens.nodal * sigma.asDiagonal();
    return out;
}

TruncatedPinv::TruncatedPinv(const Eigen::MatrixXd& j, double threshold) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv[0] : 0.0;
    rank_ = 0;
    while (rank_ < sv.size() && sv[rank_] > threshold * top) ++rank_;
    v_ = svd.matrixV().leftCols(rank_);
    ut_ = sv.head(rank_).cwiseInverse().asDiagonal() * svd.matrixU().leftCols(rank_).transpose();
    condition_ = rank_ > 0 ? top / sv[rank_ - 1] : INFINITY;
}

Eigen::VectorXd TruncatedPinv::apply(const Eigen::VectorXd& r) const { return v_ * (ut_ * r); }

Eigen::MatrixXd TruncatedPinv::apply(const Eigen::MatrixXd& r) const { return v_ * (ut_ * r); }

Eigen::MatrixXd TruncatedPinv::matrix() const { return v_ * ut_; }

ReconState gauss_newton_target(const Eigen::VectorXd& target, const NodalField& kappa0, const Pipeline& pipeline,
                               const GnOptions& options) {
    if (options.max_steps < 0) throw ConfigError("gauss_newton: max_steps must be nonnegative");
    ReconState st;
    st.kappa = kappa0;
    for (int step = 0; step < options.max_steps; ++step) {
        const GJacobian gj = map_G_jacobian(st.kappa, pipeline);
        const Eigen::VectorXd r = target - gj.value;
        st.residuals.push_back(r.norm());
        if (r.norm() == 0.0) break;
        const TruncatedPinv pinv(gj.jacobian, options.pinv_threshold);
        const NodalField next = st.kappa + pinv.apply(r);
        // a step leaving the representable range ends the iteration at the last good iterate
        const NodalField e = next.array().exp().matrix();
        if (!e.allFinite() || e.minCoeff() <= 0.0) {
            st.converged = false;
            return st;
        }
        st.kappa = next;
        ++st.iterations;
    }
    const NodalField sigma = st.sigma();
    const QResult q = recon_Q(pipeline.forward(sigma), pipeline);
    st.clamped = q.clamped;
    st.residuals.push_back((target - q.log()).norm());
    st.converged = st.residuals.back() == 0.0 || st.residuals.back() < st.residuals.front() ||
                   (st.residuals.size() == 1);
    return st;
}

ReconState gauss_newton_reconstruct(const DataVector& d, const Pipeline& pipeline, const GnOptions& options) {
    const QResult q = recon_Q(d, pipeline);
    const NodalField sigma0 = interpolate_sigma0(q.q.cwiseMax(kRatioFloor), pipeline);
    ReconState st = gauss_newton_target(q.log(), sigma0.array().log().matrix(), pipeline, options);
    st.clamped = st.clamped || q.clamped;
    return st;
}

std::string to_string(ParamKind kind) {
    switch (kind) {
        case ParamKind::pw_linear_uniform: return "pw-linear-uniform";
        case ParamKind::pw_linear_optimal: return "pw-linear-optimal";
        case ParamKind::network: return "resistor-network";
    }
    return "?";
}

ParamKind param_from_string(const std::string& name) {
    if (name == "pw-linear-uniform") return ParamKind::pw_linear_uniform;
    if (name == "pw-linear-optimal") return ParamKind::pw_linear_optimal;
    if (name == "resistor-network" || name == "network") return ParamKind::network;
    throw ConfigError("unknown parametrization '" + name + "'");
}

std::vector<Point2> uniform_points(int n) {
    if (n < 3) throw ConfigError("uniform_points: n must be at least 3");
    // g = n(n-1)/2 split into rings of equal size
    const int rings = n % 2 ? (n - 1) / 2 : n / 2;
    const int per_ring = n % 2 ? n : n - 1;
    std::vector<Point2> pts;
    for (int k = 1; k <= rings; ++k) {
        const double r = static_cast<double>(k) / rings;
        for (int j = 0; j < per_ring; ++j) {
            const double t = 2.0 * std::numbers::pi * j / per_ring;
            pts.push_back({r * std::cos(t), r * std::sin(t)});
        }
    }
    return pts;
}

Parametrization::Parametrization(ParamKind kind, std::shared_ptr<const Pipeline> pipeline, GnOptions gn)
    : kind_(kind), pipeline_(std::move(pipeline)), gn_(gn) {
    if (!pipeline_) throw ConfigError("Parametrization: missing pipeline");
    const OptimalGrid& og = pipeline_->optimal();
    if (kind_ == ParamKind::pw_linear_uniform) {
        points_ = uniform_points(pipeline_->spec().n);
        const Triangulation tri(points_);
        interp_ = std::make_shared<const LinearInterpolant>(
            fine_interpolant(tri, pipeline_->grid(), pipeline_->electrodes().geometry));
    } else {
        points_ = og.points;
        interp_ = std::shared_ptr<const LinearInterpolant>(pipeline_, &og.interpolant);
    }
}

namespace {

void require_positive(const NodalField& f, const char* what) {
    for (Eigen::Index k = 0; k < f.size(); ++k)
        if (!(f[k] > 0.0)) throw InconsistentData(std::string(what) + ": conductivity not positive");
}

void require_size(const Eigen::VectorXd& s, int g) {
    if (s.size() != g) throw ConfigError("parametrization: parameter vector has wrong length");
}

}  // namespace

NodalField Parametrization::apply(const Eigen::VectorXd& s) const {
    require_size(s, size());
    if (is_linear()) {
        NodalField f = interp_->apply(s);
        require_positive(f, "parametrize");
        return f;
    }
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (!(s[k] > 0.0)) throw InconsistentData("parametrize: network parameters must be positive");
    const NodalField sigma0 = interp_->apply(s);
    require_positive(sigma0, "parametrize");
    // Q(F(S(s))) = s, solved directly for the target ln s
    const ReconState st = gauss_newton_target(s.array().log().matrix(), sigma0.array().log().matrix(), *pipeline_, gn_);
    return st.sigma();
}

Eigen::MatrixXd Parametrization::jacobian(const Eigen::VectorXd& s) const {
    require_size(s, size());
    const Eigen::MatrixXd phi = Eigen::MatrixXd(interp_->weights);
    if (is_linear()) return phi;
    const NodalField sigma0 = interp_->apply(s);
    const NodalField sigma = apply(s);
    const GJacobian gj = map_G_jacobian(sigma.array().log().matrix(), *pipeline_);
    const TruncatedPinv pinv(gj.jacobian, gn_.pinv_threshold);
    // limit of the iteration: range part fixed by s, null-space part inherited from the start
    const Eigen::MatrixXd dk0 = sigma0.cwiseInverse().asDiagonal() * phi;
    Eigen::MatrixXd dk = pinv.apply(Eigen::MatrixXd(s.cwiseInverse().asDiagonal()));
    dk += dk0 - pinv.apply(Eigen::MatrixXd(gj.jacobian * dk0));
    return sigma.asDiagonal() * dk;
}

NodalField parametrize(const Parametrization& p, const Eigen::VectorXd& s) { return p.apply(s); }

Eigen::MatrixXd sensitivity_basis(const Parametrization& p, const Eigen::VectorXd& s_bar) { return p.jacobian(s_bar); }

}  // namespace eitnet
