#include "cgs/embedding.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace cgs {

int default_ami_bins(Eigen::Index n) {
  const int b = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  return std::clamp(b, 8, 64);
}

const char* to_string(LagMethod m) { return m == LagMethod::Acf ? "acf" : "ami"; }

LagEstimate lag_from_acf(LagCurve curve) {
  if (curve.empty()) throw InvalidArgument("lag_from_acf: empty curve");
  for (const auto& [lag, value] : curve) {
    if (lag > 0 && value < 0.0) return {lag, LagMethod::Acf, std::move(curve)};
  }
  throw EstimationError("ACF stays nonnegative up to lag " + std::to_string(curve.back().first) +
                        "; increase max_lag");
}

LagEstimate lag_from_ami(LagCurve curve) {
  const std::size_t n = curve.size();
  if (n < 3) throw InvalidArgument("lag_from_ami: curve needs at least 3 values");
  for (std::size_t t = 1; t + 1 < n; ++t) {
    const double v = curve[t].second;
    if (!(curve[t - 1].second > v)) continue;
    std::size_t j = t;
    while (j + 1 < n && curve[j + 1].second == v) ++j;
    if (j + 1 < n && curve[j + 1].second > v) return {curve[t].first, LagMethod::Ami, std::move(curve)};
  }
  throw EstimationError("AMI has no local minimum up to lag " + std::to_string(curve.back().first) +
                        "; increase max_lag");
}

namespace {

// Points are columns of a dim x n matrix so each one is contiguous.
inline double dist2(const double* a, const double* b, Eigen::Index dim) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

inline bool better(double d2, Eigen::Index j, const Neighbour& best) {
  return d2 < best.dist2 || (d2 == best.dist2 && j < best.index);
}

class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& pts) : pts_(pts), dim_(pts.rows()) {
    order_.resize(static_cast<std::size_t>(pts.cols()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    nodes_.reserve(2 * order_.size() / kLeaf + 2);
    build(0, order_.size());
  }

  Neighbour nearest(Eigen::Index q) const {
    Neighbour best{-1, std::numeric_limits<double>::infinity()};
    search(0, q, pts_.col(q).data(), best);
    return best;
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  struct Node {
    std::size_t begin, end;
    int axis = -1;  // -1 for a leaf
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) return id;

    int axis = 0;
    double widest = -1.0;
    for (Eigen::Index k = 0; k < dim_; ++k) {
      double lo = pts_(k, order_[begin]), hi = lo;
      for (std::size_t i = begin; i < end; ++i) {
        lo = std::min(lo, pts_(k, order_[i]));
        hi = std::max(hi, pts_(k, order_[i]));
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = static_cast<int>(k);
      }
    }
    if (!(widest > 0.0)) return id;  // all coincident

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](Eigen::Index a, Eigen::Index b) {
                       const double va = pts_(axis, a), vb = pts_(axis, b);
                       return va < vb || (va == vb && a < b);
                     });
    const double split = pts_(axis, order_[mid]);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Left subtree holds coordinates <= split, right holds >= split.
  void search(int id, Eigen::Index q, const double* qp, Neighbour& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Eigen::Index j = order_[i];
        if (j == q) continue;
        const double d2 = dist2(qp, pts_.col(j).data(), dim_);
        if (better(d2, j, best)) best = {j, d2};
      }
      return;
    }
    const double diff = qp[node.axis] - node.split;
    const int near = diff <= 0.0 ? node.left : node.right;
    const int far = diff <= 0.0 ? node.right : node.left;
    search(near, q, qp, best);
    // A single squared term never exceeds the rounded full sum, so this bound is safe.
    if (diff * diff <= best.dist2) search(far, q, qp, best);
  }

  const Eigen::MatrixXd& pts_;
  Eigen::Index dim_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

constexpr Eigen::Index kBruteForceLimit = 5000;

FnnProfile fnn_impl(const Eigen::Ref<const Eigen::VectorXd>& series, int lag, int max_dim, const FnnOptions& opt,
                    bool allow_tree) {
  if (lag < 1 || max_dim < 1) throw InvalidArgument("fnn: lag and max_dim must be positive");
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw InvalidArgument("fnn: rtol and atol must be positive");
  const Eigen::Index n = series.size();
  if (n - static_cast<Eigen::Index>(max_dim) * lag < 2) {
    throw InvalidArgument("fnn: series too short for dimension " + std::to_string(max_dim + 1) + " at lag " +
                          std::to_string(lag));
  }
  const double mean = series.mean();
  const double ra = std::sqrt((series.array() - mean).square().sum() / static_cast<double>(n));

  FnnProfile prof;
  prof.rtol = opt.rtol;
  prof.atol = opt.atol;
  prof.lag = lag;
  for (int d = 1; d <= max_dim; ++d) {
    const Eigen::Index m = n - static_cast<Eigen::Index>(d) * lag;
    Eigen::MatrixXd pts(d, m);
    for (int k = 0; k < d; ++k) pts.row(k) = series.segment(static_cast<Eigen::Index>(k) * lag, m).transpose();
    const auto nn = nearest_neighbours(pts.transpose(), allow_tree);
    const auto extra = series.segment(static_cast<Eigen::Index>(d) * lag, m);
    Eigen::Index falses = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double rd = std::sqrt(nn[i].dist2);
      const double gap = std::abs(extra[i] - extra[nn[i].index]);
      const bool rel = gap > opt.rtol * rd;
      const bool abs = std::sqrt(nn[i].dist2 + gap * gap) > opt.atol * ra;
      falses += (rel || abs) ? 1 : 0;
    }
    prof.fractions.push_back(static_cast<double>(falses) / static_cast<double>(m));
  }
  return prof;
}

}  // namespace

std::vector<Neighbour> nearest_neighbours(const Eigen::Ref<const Eigen::MatrixXd>& points, bool allow_tree) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (n < 2) throw InvalidArgument("nearest_neighbours: need at least 2 points");
  const Eigen::MatrixXd pts = points.transpose();
  std::vector<Neighbour> out(static_cast<std::size_t>(n));
  if (allow_tree && n >= kBruteForceLimit) {
    const KdTree tree(pts);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = tree.nearest(i);
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Neighbour best{-1, std::numeric_limits<double>::infinity()};
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = dist2(pts.col(i).data(), pts.col(j).data(), dim);
      if (better(d2, j, best)) best = {j, d2};
    }
    out[i] = best;
  }
  return out;
}

FnnProfile fnn_fractions(const Eigen::Ref<const Eigen::VectorXd>& series, int lag, int max_dim, const FnnOptions& opt) {
  return fnn_impl(series, lag, max_dim, opt, true);
}

FnnProfile fnn_fractions_brute(const Eigen::Ref<const Eigen::VectorXd>& series, int lag, int max_dim,
                               const FnnOptions& opt) {
  return fnn_impl(series, lag, max_dim, opt, false);
}

DimChoice dim_from_fnn(std::span<const double> fractions, double threshold) {
  if (fractions.empty()) throw InvalidArgument("dim_from_fnn: empty profile");
  for (std::size_t d = 0; d < fractions.size(); ++d) {
    if (fractions[d] <= threshold) return {static_cast<int>(d) + 1, false};
  }
  return {static_cast<int>(fractions.size()), true};
}

void choose_dim(FnnProfile& profile, double threshold) {
  const auto c = dim_from_fnn(profile.fractions, threshold);
  profile.chosen_dim = c.dim;
  profile.saturated = c.saturated;
}

}  // namespace cgs
