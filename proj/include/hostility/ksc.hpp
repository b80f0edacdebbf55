#pragma once

#include "hostility/corpus.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hostility {

inline constexpr int kSeriesHours = 240;

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Hourly hostile-comment counts of one post.
struct HostilitySeries {
    std::size_t post = 0;
    std::string post_id;
    Eigen::VectorXd values;
    bool smoothed = false;
};

/// Bin h counts hostile comments with t in [3600h, 3600(h+1)). Throws
/// DataError when the post has no hostile comment inside the window.
HostilitySeries build_series(const Corpus& corpus, std::size_t post, int hours = kSeriesHours);

/// Zero-padded shift: out[i] = y[i - q].
template <typename Derived>
Series<typename Derived::Scalar> shift_series(const Eigen::MatrixBase<Derived>& y, int q)
{
    const Eigen::Index n = y.size();
    Series<typename Derived::Scalar> out = Series<typename Derived::Scalar>::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = i - q;
        if (j >= 0 && j < n) {
            out(i) = y(j);
        }
    }
    return out;
}

/// Gaussian kernel of odd `width`, normalized to sum 1. Near the edges the
/// truncated kernel is renormalized.
template <typename Derived>
Series<typename Derived::Scalar> smooth(const Eigen::MatrixBase<Derived>& x, int width = 5, double sigma = 1.0)
{
    using Scalar = typename Derived::Scalar;
    const int half = width / 2;
    std::vector<Scalar> kernel;
    for (int k = -half; k <= half; ++k) {
        kernel.push_back(static_cast<Scalar>(std::exp(-0.5 * k * k / (sigma * sigma))));
    }
    const Eigen::Index n = x.size();
    Series<Scalar> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar acc = 0;
        Scalar weight = 0;
        for (int k = -half; k <= half; ++k) {
            const Eigen::Index j = i + k;
            if (j >= 0 && j < n) {
                acc += kernel[static_cast<std::size_t>(k + half)] * x(j);
                weight += kernel[static_cast<std::size_t>(k + half)];
            }
        }
        out(i) = acc / weight;
    }
    return out;
}

template <typename Scalar>
struct ShiftScale {
    Scalar distance = 0;
    int shift = 0;
    Scalar alpha = 0;
};

/// min over |q| <= max_shift and alpha of ||x - alpha shift(y, q)|| / ||x||.
/// Smaller |q| wins ties, then negative q. Throws std::invalid_argument for
/// zero-norm x.
template <typename DX, typename DY>
ShiftScale<typename DX::Scalar> ksc_distance(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                                             int max_shift)
{
    using Scalar = typename DX::Scalar;
    const Scalar xx = x.squaredNorm();
    if (!(xx > 0)) {
        throw std::invalid_argument("ksc_distance: zero-norm series");
    }
    ShiftScale<Scalar> best;
    Scalar best_gain = -1;
    for (int m = 0; m <= max_shift; ++m) {
        for (int sign : {-1, 1}) {
            if (m == 0 && sign > 0) {
                continue;
            }
            const int q = sign * m;
            const auto s = shift_series(y, q);
            const Scalar ss = s.squaredNorm();
            const Scalar xs = x.dot(s);
            const Scalar gain = ss > 0 ? xs * xs / ss : Scalar(0);
            if (gain > best_gain) {
                best_gain = gain;
                best.shift = q;
                best.alpha = ss > 0 ? xs / ss : Scalar(0);
            }
        }
    }
    const auto s = shift_series(y, best.shift);
    best.distance = (x - best.alpha * s).norm() / std::sqrt(xx);
    return best;
}

struct KscOptions {
    int k = 4;
    int max_shift = 24;
    int max_iter = 100;
    std::uint64_t seed = 1;
    double eig_tol = 1e-10;
    int eig_max_iter = 10000;
};

struct ClusterResult {
    int k = 0;
    std::vector<int> assignment;
    std::vector<int> shift;        ///< best shift of the centroid against each series
    std::vector<double> distance;  ///< distance to the assigned centroid
    std::vector<Eigen::VectorXd> centroids; ///< unit norm, non-negative entry sum
    std::vector<double> cluster_objective;  ///< sum of squared member distances
    std::vector<double> objective_history;  ///< total objective after each step
    int iterations = 0;
    bool converged = false;
};

/// Unit vector maximizing sum_i (x_i . mu)^2 / ||x_i||^2 over the aligned
/// members, i.e. the smallest-eigenvalue eigenvector of
/// M = sum_i (I - x_i x_i^T / ||x_i||^2). Power iteration warm-started at `start`.
Eigen::VectorXd ksc_centroid(std::span<const Eigen::VectorXd> aligned, const Eigen::VectorXd& start,
                             double tol = 1e-10, int max_iter = 10000);

/// Sum of squared distances of each series to its assigned centroid.
double ksc_objective(std::span<const Eigen::VectorXd> series, std::span<const int> assignment,
                     std::span<const Eigen::VectorXd> centroids, int max_shift);

/// Throws ConfigError when k exceeds the input count, DataError for a zero series.
ClusterResult ksc_cluster(std::span<const Eigen::VectorXd> series, const KscOptions& options = {});

/// cluster_<c>.csv (`id,h0..`, member series and a final centroid row, each
/// divided by its max), summary.csv (`cluster,size,mean_volume,mean_onset_hour`
/// from the raw counts) and objective.csv.
void export_clusters(const ClusterResult& result, std::span<const HostilitySeries> raw,
                     std::span<const HostilitySeries> smoothed, const std::filesystem::path& dir);

} // namespace hostility
