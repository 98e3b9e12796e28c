#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgs/embedding.hpp"
#include "cgs/geometry.hpp"
#include "cgs/series.hpp"

namespace cgs {

struct EstimationOptions {
  /// 0 selects a quarter of the series length.
  int max_lag = 0;
  int max_dim = 12;
  double fnn_threshold = 0.01;
  FnnOptions fnn;
  /// 0 selects default_ami_bins.
  int ami_bins = 0;
  /// Estimator that supplies each member's lag.
  LagMethod lag_method = LagMethod::Acf;
};

/// Per-member estimates. Dimensions are estimated at both the ACF and the AMI
/// lag when available; the member dimension is the smaller of the two.
struct MemberParams {
  std::string label;
  std::optional<LagEstimate> acf_lag;
  std::optional<LagEstimate> ami_lag;
  std::optional<FnnProfile> fnn_acf;
  std::optional<FnnProfile> fnn_ami;
  int m = 0;
  int lag = 0;
  /// No FNN fraction reached the threshold.
  bool saturated = false;
};

struct GroupEmbeddingParams {
  int m = 0;
  int lag = 0;
  std::vector<MemberParams> per_member;
};

MemberParams estimate_member(const TimeSeries& s, const EstimationOptions& opt);

/// Group m and lag are the minima over members. Throws EstimationError listing
/// every member whose lag could not be estimated.
GroupEmbeddingParams group_embedding_params(const SeriesGroup& g, const EstimationOptions& opt = {});

/// Fixed parameters without estimation.
GroupEmbeddingParams fixed_params(int m, int lag);

inline constexpr Coords kDefaultCoords{0, 1, 2};

struct CgsResult {
  double volume = 0.0;
  double surface_area = 0.0;
  double alpha = 0.0;
  int m = 0;
  int lag = 0;
  Coords coords = kDefaultCoords;
  /// Points before deduplication.
  std::size_t n_points = 0;
  std::size_t duplicates_merged = 0;
  /// "pooled" or the member label.
  std::string source;
  std::string group;
  bool degenerate = false;
  bool trimmed = false;
};

/// Every member embedded at (m, lag) and projected to `coords`, concatenated
/// in member order.
PointCloud pooled_cloud(const SeriesGroup& g, int m, int lag, const Coords& coords = kDefaultCoords);
PointCloud series_cloud(const TimeSeries& s, int m, int lag, const Coords& coords = kDefaultCoords);

/// Requires m >= 3. Throws DegenerateInput when the pooled cloud has no volume.
CgsResult cgs_pooled(const SeriesGroup& g, const GroupEmbeddingParams& p, double alpha,
                     const Coords& coords = kDefaultCoords);

/// One result per member, in member order. Degenerate members are flagged
/// with zero volume instead of failing the batch.
std::vector<CgsResult> cgs_per_series(const SeriesGroup& g, const GroupEmbeddingParams& p, double alpha,
                                      const Coords& coords = kDefaultCoords);

/// Flags non-degenerate results whose volume exceeds the given upper quantile.
void trim_upper(std::vector<CgsResult>& results, double quantile);

struct CommonAlpha {
  double alpha = 0.0;
  std::vector<std::string> groups;
  std::vector<double> optima;
  std::vector<VolumeCurve> curves;
};

/// Per-group optimal alpha of the pooled cloud; the common alpha is the
/// largest. An empty grid selects each group's default_alpha_grid.
CommonAlpha common_alpha(std::span<const SeriesGroup> groups, std::span<const GroupEmbeddingParams> params,
                         std::span<const double> grid = {}, const Coords& coords = kDefaultCoords,
                         double rel_tol = 1e-3);

/// Pooled volume for each sorted coordinate triple out of m, C(m, 3) entries.
std::map<Coords, double> coord_combination_volumes(const SeriesGroup& g, const GroupEmbeddingParams& p, double alpha);

}  // namespace cgs
