#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cgs/error.hpp"

namespace cgs {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Sample autocorrelation at lags 0..max_lag,
///   r(k) = sum_t (s_t - m)(s_{t+k} - m) / sum_t (s_t - m)^2.
template <typename Derived>
Vector<typename Derived::Scalar> acf(const Eigen::MatrixBase<Derived>& series, Eigen::Index max_lag) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = series.size();
  if (max_lag < 0 || max_lag >= n) throw InvalidArgument("acf: max_lag must lie in [0, length)");
  const Vector<Scalar> c = series.derived().array() - series.mean();
  const Scalar denom = c.squaredNorm();
  if (!(denom > Scalar(0))) throw InvalidArgument("acf: series has zero variance");
  Vector<Scalar> r(max_lag + 1);
  r[0] = Scalar(1);
  for (Eigen::Index k = 1; k <= max_lag; ++k) {
    r[k] = c.head(n - k).dot(c.tail(n - k)) / denom;
  }
  return r;
}

/// Default histogram resolution for ami: ceil(sqrt(n)) clamped to [8, 64].
int default_ami_bins(Eigen::Index n);

/// Average mutual information in bits between s_t and s_{t+k} for
/// k = 0..max_lag, from an equal-width bins x bins histogram over the series
/// range. Marginals come from the joint histogram at each lag.
template <typename Derived>
Vector<typename Derived::Scalar> ami(const Eigen::MatrixBase<Derived>& series, Eigen::Index max_lag, int bins) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = series.size();
  if (bins < 2) throw InvalidArgument("ami: bins must be at least 2");
  if (max_lag < 0 || max_lag >= n) throw InvalidArgument("ami: max_lag must lie in [0, length)");
  const Scalar lo = series.minCoeff(), hi = series.maxCoeff();
  if (!(hi > lo)) throw InvalidArgument("ami: series is constant");

  Eigen::VectorXi bin(n);
  const Scalar scale = Scalar(bins) / (hi - lo);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int b = static_cast<int>((series[i] - lo) * scale);
    bin[i] = b < 0 ? 0 : (b >= bins ? bins - 1 : b);
  }

  Vector<Scalar> out(max_lag + 1);
  Eigen::MatrixXd joint(bins, bins);
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    joint.setZero();
    const Eigen::Index pairs = n - k;
    for (Eigen::Index i = 0; i < pairs; ++i) joint(bin[i], bin[i + k]) += 1.0;
    joint /= static_cast<double>(pairs);
    const Eigen::VectorXd px = joint.rowwise().sum();
    const Eigen::VectorXd py = joint.colwise().sum().transpose();
    double info = 0.0;
    for (int b = 0; b < bins; ++b) {
      for (int a = 0; a < bins; ++a) {
        const double p = joint(a, b);
        if (p > 0.0) info += p * std::log2(p / (px[a] * py[b]));
      }
    }
    out[k] = Scalar(info);
  }
  return out;
}

enum class LagMethod { Acf, Ami };

const char* to_string(LagMethod m);

/// (lag, value) pairs in increasing lag order.
using LagCurve = std::vector<std::pair<int, double>>;

/// Pairs values[i] with lag first_lag + i.
template <typename Derived>
LagCurve lag_curve(const Eigen::MatrixBase<Derived>& values, int first_lag = 0) {
  LagCurve c;
  c.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) c.emplace_back(first_lag + static_cast<int>(i), double(values[i]));
  return c;
}

struct LagEstimate {
  int lag = 0;
  LagMethod method = LagMethod::Acf;
  LagCurve curve;
};

/// Smallest positive lag whose value is strictly negative.
LagEstimate lag_from_acf(LagCurve curve);

/// First strict local minimum: c(t-1) > c(t) < c(t+1). A flat run after a
/// descent counts if the first change after it is a rise; the first lag of
/// the run is returned.
LagEstimate lag_from_ami(LagCurve curve);

/// Delay vectors as rows: row i is (s_i, s_{i+lag}, ..., s_{i+(dim-1)lag}).
template <typename Derived>
Matrix<typename Derived::Scalar> delay_embed(const Eigen::MatrixBase<Derived>& series, int lag, int dim) {
  if (lag < 1 || dim < 1) throw InvalidArgument("delay_embed: lag and dim must be positive");
  const Eigen::Index n = series.size();
  const Eigen::Index span = static_cast<Eigen::Index>(dim - 1) * lag;
  if (n <= span) throw InvalidArgument("delay_embed: series too short for lag " + std::to_string(lag) +
                                       " and dimension " + std::to_string(dim));
  const Eigen::Index rows = n - span;
  Matrix<typename Derived::Scalar> out(rows, dim);
  for (int j = 0; j < dim; ++j) out.col(j) = series.segment(static_cast<Eigen::Index>(j) * lag, rows);
  return out;
}

using Coords = std::array<int, 3>;

/// Columns (i, j, k) of an embedding, rows in order.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 3> project_coords(const Eigen::MatrixBase<Derived>& embedding,
                                                                          const Coords& c) {
  const Eigen::Index dim = embedding.cols();
  for (int a = 0; a < 3; ++a) {
    if (c[a] < 0 || c[a] >= dim) throw InvalidArgument("project_coords: coordinate index out of range");
    for (int b = 0; b < a; ++b) {
      if (c[a] == c[b]) throw InvalidArgument("project_coords: duplicate coordinate index");
    }
  }
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 3> out(embedding.rows(), 3);
  for (int a = 0; a < 3; ++a) out.col(a) = embedding.col(c[a]);
  return out;
}

struct FnnOptions {
  double rtol = 10.0;
  double atol = 2.0;
};

struct FnnProfile {
  /// fractions[d-1] is the false-neighbour fraction in dimension d.
  std::vector<double> fractions;
  double rtol = 10.0;
  double atol = 2.0;
  int lag = 1;
  int chosen_dim = 0;
  /// Set when no dimension reached the threshold and chosen_dim is max_dim.
  bool saturated = false;
};

/// False nearest neighbours for d = 1..max_dim. A neighbour in dimension d
/// is false when the added coordinate separates the pair by more than rtol
/// times their distance, or the distance in d+1 exceeds atol times the series
/// standard deviation. Nearest neighbours are exact; ties go to the lower
/// index.
FnnProfile fnn_fractions(const Eigen::Ref<const Eigen::VectorXd>& series, int lag, int max_dim,
                         const FnnOptions& opt = {});

/// Same, with the neighbour search forced to brute force (kd-tree off).
FnnProfile fnn_fractions_brute(const Eigen::Ref<const Eigen::VectorXd>& series, int lag, int max_dim,
                               const FnnOptions& opt = {});

struct DimChoice {
  int dim = 0;
  bool saturated = false;
};

/// Smallest d with fraction <= threshold, or max_dim flagged as saturated.
DimChoice dim_from_fnn(std::span<const double> fractions, double threshold);

/// Fills chosen_dim and saturated in place.
void choose_dim(FnnProfile& profile, double threshold);

/// Index and squared distance of the nearest other row of `points` for each
/// row, ties broken by index. Exposed for testing the accelerated search.
struct Neighbour {
  Eigen::Index index = -1;
  double dist2 = 0.0;
};
std::vector<Neighbour> nearest_neighbours(const Eigen::Ref<const Eigen::MatrixXd>& points, bool allow_tree = true);

}  // namespace cgs
