#include "eitnet/error.hpp"
#include "eitnet/network.hpp"

#include <cmath>

namespace eitnet {

namespace {

constexpr double kPeelPolish = 1e-9;

struct Eval {
    DataVector residual;
    double objective = 0.0;
};

Eval evaluate(const Eigen::VectorXd& kappa, const DataVector& d, const Eigen::VectorXd& weight, double alpha,
              const Eigen::VectorXd& kappa_ref, const NetworkGraph& graph) {
    Eval ev;
    ev.residual = discrete_forward(kappa.array().exp().matrix(), graph) - d;
    ev.objective = ev.residual.cwiseProduct(weight).dot(ev.residual) + alpha * (kappa - kappa_ref).squaredNorm();
    return ev;
}

}  // namespace

FitResult fit_conductances(const DataVector& d, const Eigen::VectorXd& covariance, double alpha,
                           const Eigen::VectorXd& kappa_ref, const NetworkGraph& graph,
                           const Eigen::VectorXd& kappa_start, const FitOptions& options) {
    const int g = graph.edge_count();
    if (d.size() != g || covariance.size() != g || kappa_ref.size() != g || kappa_start.size() != g)
        throw ConfigError("fit_conductances: size mismatch");
    if (alpha < 0.0) throw ConfigError("fit_conductances: alpha must be nonnegative");
    for (Eigen::Index p = 0; p < g; ++p)
        if (!(covariance[p] > 0.0)) throw ConfigError("fit_conductances: covariance must be positive");
    const Eigen::VectorXd weight = covariance.cwiseInverse();
    const double shift = options.shift / covariance[0];

    Eigen::VectorXd kappa = kappa_start;
    Eval ev = evaluate(kappa, d, weight, alpha, kappa_ref, graph);
    FitResult out;
    double grad0 = -1.0;
    for (int it = 0; it <= options.max_iterations; ++it) {
        const Eigen::VectorXd gamma = kappa.array().exp().matrix();
        const Eigen::MatrixXd jk = jacobian_discrete_forward(gamma, graph) * gamma.asDiagonal();
        const Eigen::VectorXd grad = jk.transpose() * weight.cwiseProduct(ev.residual) + alpha * (kappa - kappa_ref);
        const double gnorm = grad.norm();
        if (grad0 < 0.0) grad0 = gnorm;
        out.iterations = it;
        if (gnorm <= options.gradient_drop * grad0 || gnorm == 0.0) {
            out.converged = true;
            break;
        }
        if (it == options.max_iterations) break;
        Eigen::MatrixXd h = jk.transpose() * weight.asDiagonal() * jk;
        h.diagonal().array() += alpha + shift;
        const Eigen::VectorXd step = -h.ldlt().solve(grad);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Eigen::VectorXd trial = kappa + t * step;
            Eval tv;
            try {
                tv = evaluate(trial, d, weight, alpha, kappa_ref, graph);
            } catch (const SolverError&) {
                // conductances out of floating range: shorten the step
                t *= 0.5;
                continue;
            }
            if (std::isfinite(tv.objective) && tv.objective <= ev.objective) {
                kappa = trial;
                ev = std::move(tv);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    out.gamma = kappa.array().exp().matrix();
    out.objective = ev.objective;
    out.misfit = ev.residual.norm();
    return out;
}

FitResult fit_conductances(const DataVector& d, const Eigen::VectorXd& covariance, double alpha,
                           const Eigen::VectorXd& kappa_ref, const NetworkGraph& graph) {
    return fit_conductances(d, covariance, alpha, kappa_ref, graph, kappa_ref);
}

RecoveryResult recover_conductances(const DataVector& d, const NetworkGraph& graph, const RecoveryConfig& config,
                                    const Eigen::VectorXd& kappa_ref, const Eigen::VectorXd& covariance) {
    RecoveryResult out;
    if (config.method == RecoveryMethod::peel_then_fit) {
        try {
            out.gamma = layer_peel(d, graph);
            out.peeled = true;
            // peeling loses digits with depth; polish with the unregularized fit
            const double rel = (discrete_forward(out.gamma, graph) - d).norm() / d.norm();
            if (rel > kPeelPolish && config.alpha == 0.0) {
                const Eigen::VectorXd k0 = out.gamma.array().log().matrix();
                const FitResult fit = fit_conductances(d, covariance, 0.0, kappa_ref, graph, k0, config.fit);
                out.gamma = fit.gamma;
                out.converged = fit.converged;
            }
            return out;
        } catch (const InconsistentData&) {
        }
    }
    // F is homogeneous of degree one: rescale the reference to the data first
    Eigen::VectorXd start = kappa_ref;
    const DataVector f = discrete_forward(kappa_ref.array().exp().matrix(), graph);
    const double c = f.dot(d) / f.squaredNorm();
    if (config.alpha == 0.0 && c > 0.0 && std::isfinite(c)) start.array() += std::log(c);
    const FitResult fit = fit_conductances(d, covariance, config.alpha, kappa_ref, graph, start, config.fit);
    out.gamma = fit.gamma;
    out.converged = fit.converged;
    return out;
}

}  // namespace eitnet
