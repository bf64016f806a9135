#pragma once

#include "eitnet/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace eitnet {

/// Angular interval [begin, end] with begin < end (radians, any branch).
struct Arc {
    double begin = 0.0;
    double end = 0.0;
    double length() const { return end - begin; }
};

enum class BoundaryAccess { full, one_sided, two_sided };

struct BoundaryGeometry {
    BoundaryAccess access = BoundaryAccess::full;
    std::vector<Arc> arcs;  ///< accessible arcs in circular order (empty for full)
    double coverage = 0.8;  ///< electrode width as a fraction of the spacing

    static BoundaryGeometry full(double coverage = 0.8);
    static BoundaryGeometry one_sided(Arc arc, double coverage = 0.8);
    static BoundaryGeometry two_sided(Arc first, Arc second, double coverage = 0.8);

    /// True if angle t lies on the accessible boundary.
    bool accessible(double t) const;
};

/// Tent electrodes discretized on the N fine boundary nodes.
struct ElectrodeSet {
    int n = 0;
    int n_boundary = 0;
    BoundaryGeometry geometry;
    std::vector<double> centers;
    std::vector<double> half_widths;
    Eigen::MatrixXd profiles;  ///< N x n, column k is chi_k
};

ElectrodeSet build_electrodes(int n, const BoundaryGeometry& geometry, int n_boundary);

using DataVector = Eigen::VectorXd;

/// Lumped n x n matrix; diagonal rebuilt from zero row sums.
Eigen::MatrixXd measure(const Eigen::MatrixXd& dtn, const ElectrodeSet& electrodes);

/// Strict upper triangle, row-major over i < j.
DataVector vec_upper(const Eigen::MatrixXd& m);
Eigen::MatrixXd unvec_upper(const DataVector& d, int n);
int electrodes_from_length(Eigen::Index g);
inline int pair_count(int n) { return n * (n - 1) / 2; }

DataVector forward_map(const NodalField& sigma, const ElectrodeSet& electrodes,
                       const DiskGrid& grid);

/// Harmonic extensions of the electrode profiles and the measured data.
struct ElectrodeResponse {
    Eigen::MatrixXd potentials;  ///< node_count x n
    DataVector data;
};

ElectrodeResponse electrode_response(const FvSystem& system, const ElectrodeSet& electrodes);

/// Discrete H^{1/2} -> H^{-1/2} norm built from the fine DtN for sigma = 1.
class SobolevNorm {
public:
    explicit SobolevNorm(const Eigen::MatrixXd& reference_dtn);

    /// Value normalized so that the reference has norm one.
    double operator()(const Eigen::MatrixXd& a) const { return raw(a) / reference_raw_; }

    /// Literal discrete formula (slightly below one on the reference).
    double raw(const Eigen::MatrixXd& a) const;

    double reference_raw() const { return reference_raw_; }

private:
    int n_ = 0;
    Eigen::MatrixXd w_;  ///< U (I + Sigma^2)^{-1/4}
    double reference_raw_ = 1.0;
};

double sobolev_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& reference_dtn);

enum class NoiseModel { multiplicative, additive };

struct NoiseSpec {
    NoiseModel model = NoiseModel::additive;
    double level = 0.0;
    std::uint64_t seed = 0;
};

/// Symmetric noise matrix in the units of the fine DtN.
Eigen::MatrixXd sample_noise(const NoiseSpec& spec, const Eigen::MatrixXd& reference_dtn,
                             const SobolevNorm* norm = nullptr);

/// Lumping of an N x N noise matrix into a data vector.
DataVector lump_noise(const Eigen::MatrixXd& noise, const ElectrodeSet& electrodes);

inline constexpr double kCovarianceFloor = 1e-30;
inline constexpr int kCovarianceDraws = 10000;
inline constexpr std::uint64_t kCovarianceSeed = 0x5eed0c0fULL;

/// Per-experiment noise machinery with cached covariances.
class NoiseGenerator {
public:
    NoiseGenerator(const DiskGrid& grid, const ElectrodeSet& electrodes,
                   int covariance_draws = kCovarianceDraws);

    const Eigen::MatrixXd& reference_dtn() const { return reference_; }
    const SobolevNorm& norm() const { return norm_; }

    DataVector sample(const NoiseSpec& spec) const;

    /// Diagonal covariance of the lumped noise (floored).
    Eigen::VectorXd covariance(NoiseModel model, double level) const;

private:
    const ElectrodeSet* electrodes_;
    Eigen::MatrixXd reference_;
    SobolevNorm norm_;
    int draws_;
    std::shared_ptr<std::mutex> mutex_;
    mutable std::optional<Eigen::VectorXd> unit_additive_;
};

struct NoisyData {
    DataVector d;
    Eigen::VectorXd covariance;
};

NoisyData noisy_data(const NodalField& sigma_true, const ElectrodeSet& electrodes,
                     const DiskGrid& grid, const NoiseSpec& spec);

}  // namespace eitnet
