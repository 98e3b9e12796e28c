#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cgs/error.hpp"
#include "cgs/series.hpp"

namespace cgs {

/// Normalized cross-correlation at lag tau,
///   sum_t (x_{t-tau} - mx)(y_t - my) / sqrt(sum (x - mx)^2 sum (y - my)^2),
/// with full-series means and sums over the overlapping range. Summation runs
/// in increasing t, so ccf_at(x, y, tau) == ccf_at(y, x, -tau) bit for bit.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar ccf_at(const Eigen::MatrixBase<DerivedX>& xc, const Eigen::MatrixBase<DerivedY>& yc,
                                 typename DerivedX::Scalar denom, Eigen::Index tau) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = xc.size();
  Scalar s(0);
  if (tau >= 0) {
    for (Eigen::Index t = tau; t < n; ++t) s += xc[t - tau] * yc[t];
  } else {
    for (Eigen::Index t = 0; t < n + tau; ++t) s += xc[t - tau] * yc[t];
  }
  return s / denom;
}

struct CcfCurve {
  std::vector<int> lags;
  std::vector<double> values;
};

/// Lags [1, max_lag] when positive_only, otherwise [-max_lag, max_lag].
CcfCurve ccf(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y, int max_lag,
             bool positive_only = false);

enum class CcfVariant { MaxAbs, OneMinusMaxAbs, Mean };

const char* to_string(CcfVariant v);
CcfVariant ccf_variant_from_string(const std::string& s);

double ccf_distance(const CcfCurve& curve, CcfVariant variant);

struct CcfOptions {
  /// 0 selects ceil(n / 10) capped at 200.
  int max_lag = 0;
  CcfVariant variant = CcfVariant::MaxAbs;
  bool positive_only = false;
  /// Cut each pair to the shorter length instead of failing.
  bool truncate = false;
};

int default_ccf_max_lag(Eigen::Index n);

double ccf_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    const CcfOptions& opt);

struct DistanceMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd entries;
  CcfVariant variant = CcfVariant::MaxAbs;
  int max_lag = 0;
  bool positive_only = false;
};

/// Entry (i, j) is the distance between rows[i] and cols[j]. Entries are
/// evaluated in parallel; the result does not depend on the thread count.
DistanceMatrix distance_matrix(const std::vector<TimeSeries>& rows, const std::vector<TimeSeries>& cols,
                               const CcfOptions& opt);

}  // namespace cgs
