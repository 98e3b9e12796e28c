#include "cgs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "cgs/error.hpp"
#include "cgs/series.hpp"

namespace cgs {

namespace {

constexpr int kGridPoints = 512;
constexpr double kDensityFloor = 1e-12;

void check_finite(std::span<const double> v, const char* who) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(who) + ": non-finite value");
  }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Sum of t^3 - t over tie groups of sorted values.
double tie_term(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double t = static_cast<double>(j - i);
    s += t * t * t - t;
    i = j;
  }
  return s;
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  const auto s = summary_stats(values);
  const double iqr = s.q3 - s.q1;
  const double spread = iqr > 0.0 ? std::min(s.sd, iqr / 1.34) : s.sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

Density kde(std::span<const double> values, std::optional<double> bandwidth) {
  check_finite(values, "kde");
  if (values.size() < 2) throw InvalidArgument("kde: need at least 2 values");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (!(*hi_it > *lo_it)) throw InvalidArgument("kde: all values are identical");

  Density d;
  d.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(values);
  if (!(d.bandwidth > 0.0) || !std::isfinite(d.bandwidth)) throw InvalidArgument("kde: bandwidth must be positive");
  const double h = d.bandwidth;
  const double lo = *lo_it - 3.0 * h, hi = *hi_it + 3.0 * h;
  d.grid.resize(kGridPoints);
  d.values.assign(kGridPoints, 0.0);
  for (int i = 0; i < kGridPoints; ++i) d.grid[i] = lo + (hi - lo) * i / (kGridPoints - 1);
  d.grid.back() = hi;

  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (int i = 0; i < kGridPoints; ++i) {
    double s = 0.0;
    for (double v : values) {
      const double u = (d.grid[i] - v) / h;
      s += std::exp(-0.5 * u * u);
    }
    d.values[i] = s * norm;
  }
  const double area = trapezoid(d.grid, d.values);
  for (double& v : d.values) v /= area;
  return d;
}

double density_at(const Density& d, double x) {
  if (d.grid.empty() || x < d.grid.front() || x > d.grid.back()) return 0.0;
  const auto it = std::upper_bound(d.grid.begin(), d.grid.end(), x);
  if (it == d.grid.end()) return d.values.back();
  const auto i = static_cast<std::size_t>(it - d.grid.begin());
  const double x0 = d.grid[i - 1], x1 = d.grid[i];
  const double w = (x - x0) / (x1 - x0);
  return d.values[i - 1] + w * (d.values[i] - d.values[i - 1]);
}

double kl_divergence(const Density& f, const Density& g) {
  if (f.grid.size() < 2 || g.grid.size() < 2) throw InvalidArgument("kl_divergence: density grid too small");
  std::vector<double> x;
  x.reserve(f.grid.size() + g.grid.size());
  std::merge(f.grid.begin(), f.grid.end(), g.grid.begin(), g.grid.end(), std::back_inserter(x));
  x.erase(std::unique(x.begin(), x.end()), x.end());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fv = std::max(density_at(f, x[i]), kDensityFloor);
    const double gv = std::max(density_at(g, x[i]), kDensityFloor);
    y[i] = fv * std::log(fv / gv);
  }
  return trapezoid(x, y);
}

double intrinsic_discrepancy(const Density& f, const Density& g) {
  return std::min(kl_divergence(f, g), kl_divergence(g, f));
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> rank(values.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && values[idx[j]] == values[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) rank[idx[k]] = r;
    i = j;
  }
  return rank;
}

TestReport wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw InvalidArgument("wilcoxon_rank_sum: empty sample");
  check_finite(x, "wilcoxon_rank_sum");
  check_finite(y, "wilcoxon_rank_sum");
  const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto rank = midranks(pooled);
  const double w = std::accumulate(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
  const double n1d = static_cast<double>(n1), n2d = static_cast<double>(n2), nd = static_cast<double>(n);

  TestReport rep;
  rep.method = TestMethod::Wilcoxon;
  rep.statistic = w - n1d * (n1d + 1.0) / 2.0;
  rep.n = {n1, n2};
  const double ties = tie_term(pooled);

  if (n <= 12 && ties == 0.0) {
    // count[c][s]: subsets of {1..i} with c elements summing to s.
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<std::vector<double>> count(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    count[0][0] = 1.0;
    for (std::size_t r = 1; r <= n; ++r) {
      for (std::size_t c = std::min(r, n1); c >= 1; --c) {
        for (std::size_t s = max_sum; s >= r; --s) count[c][s] += count[c - 1][s - r];
      }
    }
    const double total = std::accumulate(count[n1].begin(), count[n1].end(), 0.0);
    const auto ws = static_cast<std::size_t>(std::llround(w));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= ws) lower += count[n1][s];
      if (s >= ws) upper += count[n1][s];
    }
    rep.exact = true;
    rep.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    return rep;
  }

  const double z0 = rep.statistic - n1d * n2d / 2.0;
  const double sigma = std::sqrt(n1d * n2d / 12.0 * ((nd + 1.0) - ties / (nd * (nd - 1.0))));
  if (!(sigma > 0.0)) {
    rep.p_value = 1.0;
    return rep;
  }
  const double corr = z0 > 0 ? 0.5 : (z0 < 0 ? -0.5 : 0.0);
  const double z = (z0 - corr) / sigma;
  rep.p_value = std::min(1.0, 2.0 * std::min(normal_cdf(z), normal_cdf(-z)));
  return rep;
}

TestReport kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw InvalidArgument("kruskal_wallis: need at least 2 groups");
  std::vector<double> pooled;
  TestReport rep;
  rep.method = TestMethod::KruskalWallis;
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidArgument("kruskal_wallis: empty group");
    check_finite(g, "kruskal_wallis");
    pooled.insert(pooled.end(), g.begin(), g.end());
    rep.n.push_back(g.size());
  }
  const auto rank = midranks(pooled);
  const double nd = static_cast<double>(pooled.size());
  double sum = 0.0;
  std::size_t at = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += rank[at + i];
    at += g.size();
    sum += r * r / static_cast<double>(g.size());
  }
  rep.df = static_cast<int>(groups.size()) - 1;
  const double correction = 1.0 - tie_term(pooled) / (nd * nd * nd - nd);
  if (!(correction > 0.0)) {
    rep.statistic = 0.0;
    rep.p_value = 1.0;
    return rep;
  }
  const double h = (12.0 / (nd * (nd + 1.0)) * sum - 3.0 * (nd + 1.0)) / correction;
  rep.statistic = std::max(h, 0.0);
  rep.p_value = boost::math::gamma_q(0.5 * rep.df, 0.5 * rep.statistic);
  return rep;
}

Eigen::MatrixXd pairwise_wilcoxon_bonferroni(const std::vector<std::vector<double>>& groups) {
  const auto k = static_cast<Eigen::Index>(groups.size());
  if (k < 2) throw InvalidArgument("pairwise_wilcoxon_bonferroni: need at least 2 groups");
  const double pairs = static_cast<double>(k * (k - 1) / 2);
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double adj = std::min(1.0, pairs * wilcoxon_rank_sum(groups[i], groups[j]).p_value);
      p(i, j) = p(j, i) = adj;
    }
  }
  return p;
}

namespace {

double assign(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& centroids, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    int best = 0;
    double best_d = (rows.row(i) - centroids.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double d = (rows.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    inertia += best_d;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& input, int k, std::uint64_t seed, int max_iter) {
  const Eigen::Index n = input.rows();
  if (k < 1 || k > n) throw InvalidArgument("kmeans: k must lie in [1, number of rows]");
  if (max_iter < 1) throw InvalidArgument("kmeans: max_iter must be positive");
  if (!input.allFinite()) throw InvalidArgument("kmeans: non-finite input");
  const Eigen::MatrixXd rows = input;

  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  KMeansResult res;
  res.centroids.resize(k, rows.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  auto pick = [&](int c, Eigen::Index i) {
    res.centroids.row(c) = rows.row(i);
    chosen[i] = 1;
  };
  pick(0, std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform() * static_cast<double>(n)), n - 1));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (rows.row(i) - res.centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index next = -1;
    if (total > 0.0) {
      const double target = uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          next = i;
          break;
        }
      }
      if (next < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[i] > 0.0) {
            next = i;
            break;
          }
        }
      }
    } else {
      for (Eigen::Index i = 0; i < n && next < 0; ++i) {
        if (!chosen[i]) next = i;
      }
    }
    pick(c, next);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (rows.row(i) - res.centroids.row(c)).squaredNorm());
  }

  res.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> prev;
  for (int it = 0; it < max_iter; ++it) {
    prev = res.labels;
    res.history.push_back(assign(rows, res.centroids, res.labels));
    res.iterations = it + 1;
    if (res.labels == prev) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, rows.cols());
    std::vector<Eigen::Index> count(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(res.labels[i]) += rows.row(i);
      ++count[res.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) res.centroids.row(c) = sum.row(c) / static_cast<double>(count[c]);
    }
  }
  res.inertia = res.history.back();
  return res;
}

}  // namespace cgs
