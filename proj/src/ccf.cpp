#include "cgs/ccf.hpp"

#include <algorithm>
#include <cmath>

#include "cgs/parallel.hpp"

namespace cgs {

namespace {

struct Centered {
  Eigen::VectorXd values;
  double ss = 0.0;
};

Centered center(const Eigen::Ref<const Eigen::VectorXd>& x, const char* name) {
  Centered c;
  c.values = x.array() - x.mean();
  c.ss = c.values.squaredNorm();
  if (!(c.ss > 0.0)) throw InvalidArgument(std::string("ccf: series ") + name + " is constant");
  return c;
}

CcfCurve ccf_centered(const Centered& x, const Centered& y, int max_lag, bool positive_only) {
  const Eigen::Index n = x.values.size();
  if (max_lag < 1 || max_lag >= n) throw InvalidArgument("ccf: max_lag must lie in [1, length)");
  const double denom = std::sqrt(x.ss * y.ss);
  CcfCurve c;
  for (int tau = positive_only ? 1 : -max_lag; tau <= max_lag; ++tau) {
    c.lags.push_back(tau);
    c.values.push_back(ccf_at(x.values, y.values, denom, tau));
  }
  return c;
}

}  // namespace

CcfCurve ccf(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y, int max_lag,
             bool positive_only) {
  if (x.size() != y.size()) throw InvalidArgument("ccf: series lengths differ");
  return ccf_centered(center(x, "x"), center(y, "y"), max_lag, positive_only);
}

const char* to_string(CcfVariant v) {
  switch (v) {
    case CcfVariant::MaxAbs:
      return "max-abs";
    case CcfVariant::OneMinusMaxAbs:
      return "one-minus-max-abs";
    case CcfVariant::Mean:
      return "mean";
  }
  return "?";
}

CcfVariant ccf_variant_from_string(const std::string& s) {
  if (s == "max-abs") return CcfVariant::MaxAbs;
  if (s == "one-minus-max-abs") return CcfVariant::OneMinusMaxAbs;
  if (s == "mean") return CcfVariant::Mean;
  throw InvalidArgument("unknown CCF variant '" + s + "'");
}

double ccf_distance(const CcfCurve& curve, CcfVariant variant) {
  if (curve.values.empty()) throw InvalidArgument("ccf_distance: empty curve");
  if (variant == CcfVariant::Mean) {
    double s = 0.0;
    for (double v : curve.values) s += v;
    return s / static_cast<double>(curve.values.size());
  }
  double m = 0.0;
  for (double v : curve.values) m = std::max(m, std::abs(v));
  return variant == CcfVariant::MaxAbs ? m : 1.0 - m;
}

int default_ccf_max_lag(Eigen::Index n) {
  const auto m = static_cast<int>((n + 9) / 10);
  return std::clamp(m, 1, 200);
}

double ccf_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    const CcfOptions& opt) {
  Eigen::Index n = x.size();
  if (y.size() != n) {
    if (!opt.truncate) throw InvalidArgument("ccf_distance: series lengths differ");
    n = std::min(n, y.size());
  }
  const int m = opt.max_lag > 0 ? opt.max_lag : default_ccf_max_lag(n);
  return ccf_distance(ccf(x.head(n), y.head(n), m, opt.positive_only), opt.variant);
}

DistanceMatrix distance_matrix(const std::vector<TimeSeries>& rows, const std::vector<TimeSeries>& cols,
                               const CcfOptions& opt) {
  if (rows.empty() || cols.empty()) throw InvalidArgument("distance_matrix: empty series list");
  Eigen::Index n = rows.front().size();
  for (const auto* list : {&rows, &cols}) {
    for (const auto& s : *list) {
      if (s.size() != n) {
        if (!opt.truncate) {
          throw InvalidArgument("distance_matrix: '" + s.label + "' has " + std::to_string(s.size()) +
                                " samples but '" + rows.front().label + "' has " + std::to_string(n));
        }
        n = std::min(n, s.size());
      }
    }
  }
  DistanceMatrix dm;
  dm.variant = opt.variant;
  dm.positive_only = opt.positive_only;
  dm.max_lag = opt.max_lag > 0 ? opt.max_lag : default_ccf_max_lag(n);
  for (const auto& s : rows) dm.row_labels.push_back(s.label);
  for (const auto& s : cols) dm.col_labels.push_back(s.label);

  auto centered = [&](const std::vector<TimeSeries>& list) {
    std::vector<Centered> out;
    for (const auto& s : list) {
      try {
        out.push_back(center(s.samples.head(n), s.label.c_str()));
      } catch (const Error& e) {
        throw InvalidArgument(std::string("distance_matrix: ") + e.what());
      }
    }
    return out;
  };
  const auto cr = centered(rows);
  const auto cc = centered(cols);
  const auto nr = static_cast<Eigen::Index>(rows.size()), nc = static_cast<Eigen::Index>(cols.size());
  dm.entries.resize(nr, nc);
  parallel_for(static_cast<std::size_t>(nr * nc), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k) / nc, j = static_cast<Eigen::Index>(k) % nc;
    dm.entries(i, j) = ccf_distance(ccf_centered(cr[i], cc[j], dm.max_lag, opt.positive_only), opt.variant);
  });
  return dm;
}

}  // namespace cgs
