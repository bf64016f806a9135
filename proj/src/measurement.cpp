#include "eitnet/measurement.hpp"

#include "eitnet/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace eitnet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Signed angular difference wrapped to (-pi, pi].
double wrap(double t) {
    t = std::fmod(t, kTwoPi);
    if (t <= -std::numbers::pi) t += kTwoPi;
    if (t > std::numbers::pi) t -= kTwoPi;
    return t;
}

}  // namespace

BoundaryGeometry BoundaryGeometry::full(double coverage) {
    return {BoundaryAccess::full, {}, coverage};
}

BoundaryGeometry BoundaryGeometry::one_sided(Arc arc, double coverage) {
    return {BoundaryAccess::one_sided, {arc}, coverage};
}

BoundaryGeometry BoundaryGeometry::two_sided(Arc first, Arc second, double coverage) {
    return {BoundaryAccess::two_sided, {first, second}, coverage};
}

bool BoundaryGeometry::accessible(double t) const {
    if (access == BoundaryAccess::full) return true;
    for (const Arc& a : arcs) {
        const double mid = 0.5 * (a.begin + a.end);
        if (std::abs(wrap(t - mid)) <= 0.5 * a.length() + 1e-12) return true;
    }
    return false;
}

ElectrodeSet build_electrodes(int n, const BoundaryGeometry& geometry, int n_boundary) {
    if (n < 2) throw ConfigError("build_electrodes: need at least 2 electrodes");
    if (!(geometry.coverage > 0.0) || geometry.coverage >= 1.0)
        throw ConfigError("build_electrodes: coverage must lie in (0, 1); supports would overlap");
    ElectrodeSet es;
    es.n = n;
    es.n_boundary = n_boundary;
    es.geometry = geometry;

    std::vector<Arc> arcs = geometry.arcs;
    if (geometry.access == BoundaryAccess::full) arcs = {Arc{0.0, kTwoPi}};
    if (geometry.access == BoundaryAccess::one_sided && arcs.size() != 1)
        throw ConfigError("build_electrodes: one-sided access needs exactly one arc");
    if (geometry.access == BoundaryAccess::two_sided && arcs.size() != 2)
        throw ConfigError("build_electrodes: two-sided access needs exactly two arcs");
    double total = 0.0;
    for (const Arc& a : arcs) {
        if (!(a.length() > 0.0)) throw ConfigError("build_electrodes: empty accessible arc");
        total += a.length();
    }
    if (total > kTwoPi + 1e-12) throw ConfigError("build_electrodes: accessible arcs overlap");
    if (n % static_cast<int>(arcs.size()) != 0)
        throw ConfigError("build_electrodes: electrode count must split evenly over the arcs");
    const int per_arc = n / static_cast<int>(arcs.size());

    for (const Arc& a : arcs) {
        const double spacing = a.length() / per_arc;
        for (int k = 0; k < per_arc; ++k) {
            const double c = (geometry.access == BoundaryAccess::full) ? k * spacing
                                                                       : a.begin + (k + 0.5) * spacing;
            es.centers.push_back(c);
            es.half_widths.push_back(0.5 * geometry.coverage * spacing);
        }
    }

    const double w = kTwoPi / n_boundary;
    es.profiles = Eigen::MatrixXd::Zero(n_boundary, n);
    for (int e = 0; e < n; ++e) {
        for (int k = 0; k < n_boundary; ++k) {
            const double dist = std::abs(wrap(k * w - es.centers[static_cast<size_t>(e)]));
            const double v = 1.0 - dist / es.half_widths[static_cast<size_t>(e)];
            if (v > 0.0) es.profiles(k, e) = v;
        }
        const double mass = w * es.profiles.col(e).sum();
        if (!(mass > 0.0)) {
            std::ostringstream msg;
            msg << "build_electrodes: electrode " << e << " covers no boundary node (N=" << n_boundary
                << ")";
            throw ConfigError(msg.str());
        }
        es.profiles.col(e) /= mass;
    }
    for (int k = 0; k < n_boundary; ++k) {
        int touched = 0;
        for (int e = 0; e < n; ++e) touched += es.profiles(k, e) > 0.0 ? 1 : 0;
        if (touched > 1) throw ConfigError("build_electrodes: electrode supports overlap");
    }
    return es;
}

Eigen::MatrixXd measure(const Eigen::MatrixXd& dtn, const ElectrodeSet& electrodes) {
    if (dtn.rows() != electrodes.n_boundary || dtn.cols() != electrodes.n_boundary)
        throw ConfigError("measure: DtN size does not match electrode profiles");
    Eigen::MatrixXd m = electrodes.profiles.transpose() * dtn * electrodes.profiles;
    for (int i = 0; i < m.rows(); ++i) {
        m(i, i) = 0.0;
        m(i, i) = -m.row(i).sum();
    }
    return m;
}

DataVector vec_upper(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    DataVector d(pair_count(n));
    Eigen::Index p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d[p++] = m(i, j);
    return d;
}

int electrodes_from_length(Eigen::Index g) {
    const int n = static_cast<int>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(g))) / 2.0));
    if (static_cast<Eigen::Index>(pair_count(n)) != g || n < 2) {
        std::ostringstream msg;
        msg << "length " << g << " is not of the form n(n-1)/2";
        throw ConfigError(msg.str());
    }
    return n;
}

Eigen::MatrixXd unvec_upper(const DataVector& d, int n) {
    if (d.size() != pair_count(n)) throw ConfigError("unvec_upper: length does not match n(n-1)/2");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            m(i, j) = d[p];
            m(j, i) = d[p];
            ++p;
        }
    for (int i = 0; i < n; ++i) m(i, i) = -m.row(i).sum();
    return m;
}

ElectrodeResponse electrode_response(const FvSystem& system, const ElectrodeSet& electrodes) {
    ElectrodeResponse out;
    out.potentials = system.solve(electrodes.profiles);
    const Eigen::MatrixXd m = electrodes.profiles.transpose() * system.boundary_flux(out.potentials);
    DataVector d(pair_count(electrodes.n));
    Eigen::Index p = 0;
    for (int i = 0; i < electrodes.n; ++i)
        for (int j = i + 1; j < electrodes.n; ++j) d[p++] = 0.5 * (m(i, j) + m(j, i));
    out.data = d;
    return out;
}

DataVector forward_map(const NodalField& sigma, const ElectrodeSet& electrodes, const DiskGrid& grid) {
    if (electrodes.n_boundary != grid.n_angular())
        throw ConfigError("forward_map: electrodes built for a different boundary resolution");
    return electrode_response(FvSystem(grid, sigma), electrodes).data;
}

SobolevNorm::SobolevNorm(const Eigen::MatrixXd& reference_dtn) : n_(static_cast<int>(reference_dtn.rows())) {
    const double scale = n_ / kTwoPi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scale * reference_dtn);
    if (es.info() != Eigen::Success) throw SolverError("SobolevNorm: eigendecomposition failed");
    const Eigen::VectorXd s = es.eigenvalues();
    Eigen::VectorXd d(n_);
    for (int k = 0; k < n_; ++k) d[k] = std::pow(1.0 + s[k] * s[k], -0.25);
    w_ = es.eigenvectors() * d.asDiagonal();
    reference_raw_ = 1.0;
    reference_raw_ = raw(reference_dtn);
}

double SobolevNorm::raw(const Eigen::MatrixXd& a) const {
    if (a.rows() != n_ || a.cols() != n_) throw ConfigError("sobolev_norm: matrix size mismatch");
    const double scale = n_ / kTwoPi;
    const Eigen::MatrixXd t = scale * (w_.transpose() * a * w_);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t);
    return svd.singularValues()[0];
}

double sobolev_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& reference_dtn) {
    return SobolevNorm(reference_dtn)(a);
}

Eigen::MatrixXd sample_noise(const NoiseSpec& spec, const Eigen::MatrixXd& reference_dtn,
                             const SobolevNorm* norm) {
    const int n = static_cast<int>(reference_dtn.rows());
    if (spec.level < 0.0) throw ConfigError("sample_noise: negative noise level");
    if (spec.level == 0.0) return Eigen::MatrixXd::Zero(n, n);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd eta(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            eta(i, j) = normal(rng);
            eta(j, i) = eta(i, j);
        }
    if (spec.model == NoiseModel::multiplicative) return spec.level * reference_dtn.cwiseProduct(eta);
    if (norm != nullptr) return (spec.level / (*norm)(eta)) * eta;
    return (spec.level / SobolevNorm(reference_dtn)(eta)) * eta;
}

DataVector lump_noise(const Eigen::MatrixXd& noise, const ElectrodeSet& electrodes) {
    return vec_upper(electrodes.profiles.transpose() * noise * electrodes.profiles);
}

NoiseGenerator::NoiseGenerator(const DiskGrid& grid, const ElectrodeSet& electrodes, int covariance_draws)
    : electrodes_(&electrodes),
      reference_(continuum_dtn(grid, NodalField::Ones(grid.node_count()))),
      norm_(reference_),
      draws_(covariance_draws),
      mutex_(std::make_shared<std::mutex>()) {}

DataVector NoiseGenerator::sample(const NoiseSpec& spec) const {
    return lump_noise(sample_noise(spec, reference_, &norm_), *electrodes_);
}

Eigen::VectorXd NoiseGenerator::covariance(NoiseModel model, double level) const {
    const Eigen::MatrixXd& chi = electrodes_->profiles;
    const int n = electrodes_->n;
    Eigen::VectorXd c(pair_count(n));
    if (model == NoiseModel::multiplicative) {
        // var(sum_kl chi_i(k) chi_j(l) B_kl eta_kl) with eta symmetric
        const Eigen::MatrixXd b2 = reference_.cwiseProduct(reference_);
        Eigen::Index p = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                // disjoint supports: k in supp i and l in supp j never coincide
                const Eigen::VectorXd ci = chi.col(i).cwiseProduct(chi.col(i));
                const Eigen::VectorXd cj = chi.col(j).cwiseProduct(chi.col(j));
                c[p++] = level * level * ci.dot(b2 * cj);
            }
    } else {
        std::lock_guard<std::mutex> lock(*mutex_);
        if (!unit_additive_) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(pair_count(n));
            for (int k = 0; k < draws_; ++k) {
                NoiseSpec unit{NoiseModel::additive, 1.0, kCovarianceSeed + static_cast<std::uint64_t>(k)};
                const DataVector e = sample(unit);
                acc += e.cwiseProduct(e);
            }
            unit_additive_ = acc / draws_;
        }
        c = level * level * (*unit_additive_);
    }
    for (Eigen::Index p = 0; p < c.size(); ++p) c[p] = std::max(c[p], kCovarianceFloor);
    return c;
}

NoisyData noisy_data(const NodalField& sigma_true, const ElectrodeSet& electrodes, const DiskGrid& grid,
                     const NoiseSpec& spec) {
    NoiseGenerator gen(grid, electrodes);
    NoisyData out;
    out.d = forward_map(sigma_true, electrodes, grid) + gen.sample(spec);
    out.covariance = gen.covariance(spec.model, spec.level);
    return out;
}

}  // namespace eitnet
