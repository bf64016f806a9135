#include "eitnet/error.hpp"
#include "eitnet/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace eitnet {

namespace {

Eigen::MatrixXd working_rows(const Eigen::MatrixXd& a, const std::vector<int>& w) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(w.size()), a.cols());
    for (size_t k = 0; k < w.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = a.row(w[k]);
    return out;
}

}  // namespace

QpResult solve_constrained_lsq(const Eigen::MatrixXd& m, const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& b, const Eigen::VectorXd& x0, int max_iterations) {
    const Eigen::Index g = m.cols();
    if (m.rows() != y.size() || a.cols() != g || a.rows() != b.size() || x0.size() != g)
        throw ConfigError("solve_constrained_lsq: size mismatch");
    const double feas_tol = 1e-12 * (1.0 + b.cwiseAbs().maxCoeff());
    if (a.rows() > 0 && ((a * x0 - b).array() < -feas_tol).any())
        throw ConfigError("solve_constrained_lsq: start is infeasible");

    QpResult out;
    out.x = x0;
    std::vector<int> w;
    std::vector<char> in_w(static_cast<size_t>(a.rows()), 0);
    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        Eigen::MatrixXd z;
        int rank = 0;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
        if (w.empty()) {
            z = Eigen::MatrixXd::Identity(g, g);
        } else {
            qr.compute(working_rows(a, w).transpose());
            rank = static_cast<int>(qr.rank());
            const Eigen::MatrixXd q = qr.householderQ();
            z = q.rightCols(g - rank);
        }
        Eigen::VectorXd p = Eigen::VectorXd::Zero(g);
        if (z.cols() > 0) {
            const Eigen::VectorXd zz = (m * z).colPivHouseholderQr().solve(y - m * out.x);
            p = z * zz;
        }
        if (p.norm() <= 1e-13 * (1.0 + out.x.norm())) {
            if (w.empty()) return out;
            const Eigen::VectorXd grad = m.transpose() * (m * out.x - y);
            const Eigen::VectorXd lambda = qr.solve(grad);
            Eigen::Index worst = 0;
            const double lmin = lambda.minCoeff(&worst);
            if (lmin >= -1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff())) {
                out.active = w;
                return out;
            }
            in_w[static_cast<size_t>(w[static_cast<size_t>(worst)])] = 0;
            w.erase(w.begin() + worst);
            continue;
        }
        const Eigen::VectorXd ap = a * p;
        const Eigen::VectorXd slack = a * out.x - b;
        double step = 1.0;
        int blocking = -1;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (in_w[static_cast<size_t>(i)] || ap[i] >= 0.0) continue;
            const double t = std::max(0.0, slack[i]) / -ap[i];
            if (t < step) {
                step = t;
                blocking = static_cast<int>(i);
            }
        }
        out.x += step * p;
        if (blocking >= 0) {
            w.push_back(blocking);
            in_w[static_cast<size_t>(blocking)] = 1;
        }
    }
    out.stalled = true;
    out.active = w;
    return out;
}

}  // namespace eitnet
