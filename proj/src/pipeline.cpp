#include "cgs/pipeline.hpp"

#include <algorithm>

#include "cgs/error.hpp"
#include "cgs/parallel.hpp"

namespace cgs {

namespace {

Eigen::Index resolve_max_lag(const EstimationOptions& opt, Eigen::Index n) {
  const Eigen::Index cap = n - 1;
  if (opt.max_lag > 0) return std::min<Eigen::Index>(opt.max_lag, cap);
  return std::min<Eigen::Index>(std::max<Eigen::Index>(2, n / 4), cap);
}

std::string describe(const Coords& c) {
  return "(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
}

}  // namespace

MemberParams estimate_member(const TimeSeries& s, const EstimationOptions& opt) {
  validate(s);
  if (opt.max_dim < 1) throw InvalidArgument("max_dim must be positive");
  MemberParams mp;
  mp.label = s.label;
  const Eigen::Index max_lag = resolve_max_lag(opt, s.size());
  std::string acf_error, ami_error;

  try {
    mp.acf_lag = lag_from_acf(lag_curve(acf(s.samples, max_lag)));
  } catch (const EstimationError& e) {
    acf_error = e.what();
  }
  const int bins = opt.ami_bins > 0 ? opt.ami_bins : default_ami_bins(s.size());
  if (max_lag >= 2) {
    try {
      mp.ami_lag = lag_from_ami(lag_curve(ami(s.samples, max_lag, bins)));
    } catch (const EstimationError& e) {
      ami_error = e.what();
    }
  } else {
    ami_error = "series too short for AMI";
  }

  const bool use_acf = opt.lag_method == LagMethod::Acf;
  const auto& primary = use_acf ? mp.acf_lag : mp.ami_lag;
  if (!primary) throw EstimationError(s.label + ": " + (use_acf ? acf_error : ami_error));
  mp.lag = primary->lag;

  auto profile = [&](const std::optional<LagEstimate>& lag, bool required) -> std::optional<FnnProfile> {
    if (!lag) return std::nullopt;
    // Long lags leave too few rows for the deepest dimensions; search only what fits.
    const int fits = static_cast<int>((s.size() - 2) / lag->lag);
    try {
      auto p = fnn_fractions(s.samples, lag->lag, std::max(1, std::min(opt.max_dim, fits)), opt.fnn);
      choose_dim(p, opt.fnn_threshold);
      return p;
    } catch (const InvalidArgument& e) {
      if (required) throw InvalidArgument(s.label + ": " + e.what());
      return std::nullopt;
    }
  };
  mp.fnn_acf = profile(mp.acf_lag, use_acf);
  mp.fnn_ami = profile(mp.ami_lag, !use_acf);

  mp.m = opt.max_dim;
  mp.saturated = true;
  for (const auto* p : {&mp.fnn_acf, &mp.fnn_ami}) {
    if (!*p) continue;
    mp.m = std::min(mp.m, (*p)->chosen_dim);
    mp.saturated = mp.saturated && (*p)->saturated;
  }
  return mp;
}

GroupEmbeddingParams group_embedding_params(const SeriesGroup& g, const EstimationOptions& opt) {
  validate(g);
  GroupEmbeddingParams out;
  out.per_member.resize(g.members.size());
  std::vector<std::string> failures(g.members.size());
  parallel_for(g.members.size(), [&](std::size_t i) {
    try {
      out.per_member[i] = estimate_member(g.members[i], opt);
    } catch (const EstimationError& e) {
      failures[i] = e.what();
    }
  });
  std::string msg;
  for (const auto& f : failures) {
    if (!f.empty()) msg += (msg.empty() ? "" : "; ") + f;
  }
  if (!msg.empty()) throw EstimationError("group " + g.name + ": lag estimation failed: " + msg);
  out.m = out.per_member.front().m;
  out.lag = out.per_member.front().lag;
  for (const auto& mp : out.per_member) {
    out.m = std::min(out.m, mp.m);
    out.lag = std::min(out.lag, mp.lag);
  }
  return out;
}

GroupEmbeddingParams fixed_params(int m, int lag) {
  if (m < 1 || lag < 1) throw InvalidArgument("embedding dimension and lag must be positive");
  GroupEmbeddingParams p;
  p.m = m;
  p.lag = lag;
  return p;
}

PointCloud series_cloud(const TimeSeries& s, int m, int lag, const Coords& coords) {
  const Eigen::MatrixXd emb = delay_embed(s.samples, lag, m);
  const Eigen::Matrix<double, Eigen::Dynamic, 3> xyz = project_coords(emb, coords);
  PointCloud pts(static_cast<std::size_t>(xyz.rows()));
  for (Eigen::Index i = 0; i < xyz.rows(); ++i) pts[i] = xyz.row(i).transpose();
  return pts;
}

PointCloud pooled_cloud(const SeriesGroup& g, int m, int lag, const Coords& coords) {
  PointCloud pts;
  for (const auto& s : g.members) {
    auto part = series_cloud(s, m, lag, coords);
    pts.insert(pts.end(), part.begin(), part.end());
  }
  return pts;
}

namespace {

void check_m(int m) {
  if (m < 3) throw InvalidArgument("embedding dimension " + std::to_string(m) + " < 3; no 3D structure");
}

CgsResult measure(const PointCloud& cloud, double alpha) {
  const auto tri = delaunay3(cloud);
  CgsResult r;
  r.alpha = alpha;
  r.n_points = cloud.size();
  r.duplicates_merged = tri.duplicates_merged;
  r.degenerate = tri.degenerate;
  if (!tri.degenerate) {
    const auto shape = alpha_complex(tri, alpha);
    r.volume = shape_volume(shape);
    r.surface_area = shape_surface_area(shape);
  }
  return r;
}

}  // namespace

CgsResult cgs_pooled(const SeriesGroup& g, const GroupEmbeddingParams& p, double alpha, const Coords& coords) {
  check_m(p.m);
  if (g.members.empty()) throw InvalidArgument("group '" + g.name + "' is empty");
  CgsResult r = measure(pooled_cloud(g, p.m, p.lag, coords), alpha);
  if (r.degenerate) {
    throw DegenerateInput("group " + g.name + ": pooled cloud " + describe(coords) + " spans no volume");
  }
  r.m = p.m;
  r.lag = p.lag;
  r.coords = coords;
  r.source = "pooled";
  r.group = g.name;
  return r;
}

std::vector<CgsResult> cgs_per_series(const SeriesGroup& g, const GroupEmbeddingParams& p, double alpha,
                                      const Coords& coords) {
  check_m(p.m);
  std::vector<CgsResult> out(g.members.size());
  parallel_for(g.members.size(), [&](std::size_t i) {
    const auto& s = g.members[i];
    CgsResult r = measure(series_cloud(s, p.m, p.lag, coords), alpha);
    r.m = p.m;
    r.lag = p.lag;
    r.coords = coords;
    r.source = s.label;
    r.group = g.name;
    out[i] = std::move(r);
  });
  return out;
}

void trim_upper(std::vector<CgsResult>& results, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) throw InvalidArgument("trim quantile must lie in (0, 1]");
  std::vector<double> v;
  for (const auto& r : results) {
    if (!r.degenerate) v.push_back(r.volume);
  }
  if (v.empty()) return;
  std::sort(v.begin(), v.end());
  const double cut = quantile_sorted(v, quantile);
  for (auto& r : results) r.trimmed = !r.degenerate && r.volume > cut;
}

CommonAlpha common_alpha(std::span<const SeriesGroup> groups, std::span<const GroupEmbeddingParams> params,
                         std::span<const double> grid, const Coords& coords, double rel_tol) {
  if (groups.empty()) throw InvalidArgument("common_alpha: no groups");
  if (groups.size() != params.size()) throw InvalidArgument("common_alpha: one parameter set per group required");
  CommonAlpha out;
  out.optima.resize(groups.size());
  out.curves.resize(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    check_m(params[i].m);
    out.groups.push_back(groups[i].name);
    const auto tri = delaunay3(pooled_cloud(groups[i], params[i].m, params[i].lag, coords));
    if (tri.degenerate) throw DegenerateInput("common_alpha: pooled cloud of group " + groups[i].name + " is degenerate");
    const std::vector<double> g = grid.empty() ? default_alpha_grid(tri) : std::vector<double>(grid.begin(), grid.end());
    out.curves[i] = alpha_sweep(tri, g);
    out.optima[i] = optimal_alpha(out.curves[i], rel_tol);
  }
  out.alpha = *std::max_element(out.optima.begin(), out.optima.end());
  return out;
}

std::map<Coords, double> coord_combination_volumes(const SeriesGroup& g, const GroupEmbeddingParams& p, double alpha) {
  check_m(p.m);
  std::vector<Coords> triples;
  for (int i = 0; i < p.m; ++i)
    for (int j = i + 1; j < p.m; ++j)
      for (int k = j + 1; k < p.m; ++k) triples.push_back({i, j, k});
  std::vector<double> vol(triples.size());
  parallel_for(triples.size(), [&](std::size_t t) { vol[t] = cgs_pooled(g, p, alpha, triples[t]).volume; });
  std::map<Coords, double> out;
  for (std::size_t t = 0; t < triples.size(); ++t) out.emplace(triples[t], vol[t]);
  return out;
}

}  // namespace cgs
