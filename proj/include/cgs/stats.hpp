#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cgs {

/// Density sampled on an increasing grid, normalized to unit trapezoid integral.
struct Density {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

/// Silverman's rule: 0.9 min(sd, IQR/1.34) n^(-1/5), falling back to sd when
/// the IQR is zero.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE on 512 points spanning [min - 3h, max + 3h].
Density kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt);

double trapezoid(std::span<const double> x, std::span<const double> y);

/// Linear interpolation, zero outside the grid.
double density_at(const Density& d, double x);

/// KL(f || g) in nats on the union of both grids, densities floored at 1e-12.
double kl_divergence(const Density& f, const Density& g);

/// min(KL(f||g), KL(g||f)).
double intrinsic_discrepancy(const Density& f, const Density& g);

enum class TestMethod { Wilcoxon, KruskalWallis };
enum class Correction { None, Bonferroni };

struct TestReport {
  TestMethod method = TestMethod::Wilcoxon;
  /// Mann-Whitney U (rank sum of the first sample minus n1(n1+1)/2) or H.
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<std::size_t> n;
  Correction correction = Correction::None;
  bool exact = false;
  /// Chi-square degrees of freedom for Kruskal-Wallis.
  int df = 0;
};

/// Midranks (1-based) of the pooled values.
std::vector<double> midranks(std::span<const double> values);

/// Two-sided rank-sum test. Exact enumeration when n1 + n2 <= 12 without
/// ties, otherwise the normal approximation with tie and continuity correction.
TestReport wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y);

/// H with tie correction; p from chi-square with k - 1 degrees of freedom.
TestReport kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Symmetric matrix of Bonferroni-adjusted pairwise Wilcoxon p-values,
/// unit diagonal.
Eigen::MatrixXd pairwise_wilcoxon_bonferroni(const std::vector<std::vector<double>>& groups);

struct KMeansResult {
  std::vector<int> labels;
  /// One centroid per row.
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  /// Inertia after every assignment step.
  std::vector<double> history;
  int iterations = 0;
};

/// Lloyd iterations from a k-means++ start drawn with std::mt19937_64(seed).
/// Rows are observations. Ties go to the lower cluster index.
KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& rows, int k, std::uint64_t seed, int max_iter = 300);

}  // namespace cgs
