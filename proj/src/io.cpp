#include "cgs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "cgs/error.hpp"

namespace cgs::io {

std::string fmt9(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return fmt9(v);
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw InvalidArgument("expected a number, got " + j.dump());
}

const char* to_string(TestMethod m) { return m == TestMethod::Wilcoxon ? "wilcoxon" : "kruskal-wallis"; }
const char* to_string(Correction c) { return c == Correction::None ? "none" : "bonferroni"; }

json to_json(const SummaryStats& s) {
  return {{"n", s.n},           {"min", s.min},   {"q1", s.q1}, {"median", s.median}, {"q3", s.q3},
          {"max", s.max},       {"mean", s.mean}, {"sd", s.sd}};
}

json to_json(const LagEstimate& e, bool with_curve) {
  json j = {{"lag", e.lag}, {"method", to_string(e.method)}};
  if (with_curve) {
    json c = json::array();
    for (const auto& [lag, v] : e.curve) c.push_back({lag, v});
    j["curve"] = std::move(c);
  }
  return j;
}

json to_json(const FnnProfile& p) {
  return {{"lag", p.lag},           {"rtol", number(p.rtol)},    {"atol", number(p.atol)},
          {"fractions", p.fractions}, {"chosen_dim", p.chosen_dim}, {"saturated", p.saturated}};
}

json to_json(const MemberParams& m, bool with_curves) {
  json j = {{"label", m.label}, {"m", m.m}, {"lag", m.lag}, {"saturated", m.saturated}};
  j["acf"] = m.acf_lag ? to_json(*m.acf_lag, with_curves) : json(nullptr);
  j["ami"] = m.ami_lag ? to_json(*m.ami_lag, with_curves) : json(nullptr);
  j["fnn_at_acf_lag"] = m.fnn_acf ? to_json(*m.fnn_acf) : json(nullptr);
  j["fnn_at_ami_lag"] = m.fnn_ami ? to_json(*m.fnn_ami) : json(nullptr);
  return j;
}

json to_json(const GroupEmbeddingParams& g, bool with_curves) {
  json members = json::array();
  for (const auto& m : g.per_member) members.push_back(to_json(m, with_curves));
  return {{"m", g.m}, {"lag", g.lag}, {"members", std::move(members)}};
}

json to_json(const CgsResult& r) {
  return {{"group", r.group},
          {"source", r.source},
          {"volume", r.volume},
          {"surface_area", r.surface_area},
          {"alpha", number(r.alpha)},
          {"m", r.m},
          {"lag", r.lag},
          {"coords", r.coords},
          {"n_points", r.n_points},
          {"duplicates_merged", r.duplicates_merged},
          {"degenerate", r.degenerate},
          {"trimmed", r.trimmed}};
}

json to_json(const VolumeCurve& c) {
  json a = json::array();
  for (double x : c.alphas) a.push_back(number(x));
  return {{"alphas", std::move(a)}, {"volumes", c.volumes}, {"hull_volume", c.hull_volume}};
}

json to_json(const CommonAlpha& c) {
  json per = json::array();
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    per.push_back({{"group", c.groups[i]}, {"optimal_alpha", number(c.optima[i])}});
  }
  return {{"alpha", number(c.alpha)}, {"per_group", std::move(per)}};
}

json to_json(const Density& d) {
  return {{"bandwidth", d.bandwidth}, {"grid", d.grid}, {"values", d.values}};
}

json to_json(const TestReport& r) {
  json j = {{"method", to_string(r.method)},
            {"statistic", r.statistic},
            {"p_value", r.p_value},
            {"n", r.n},
            {"correction", to_string(r.correction)}};
  if (r.method == TestMethod::Wilcoxon) j["exact"] = r.exact;
  if (r.method == TestMethod::KruskalWallis) j["df"] = r.df;
  return j;
}

json to_json(const DistanceMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j) row.push_back(m.entries(i, j));
    rows.push_back(std::move(row));
  }
  return {{"variant", to_string(m.variant)},       {"max_lag", m.max_lag},
          {"lags_positive_only", m.positive_only}, {"row_labels", m.row_labels},
          {"col_labels", m.col_labels},            {"entries", std::move(rows)}};
}

json to_json(const KMeansResult& k) {
  json centroids = json::array();
  for (Eigen::Index i = 0; i < k.centroids.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < k.centroids.cols(); ++j) row.push_back(k.centroids(i, j));
    centroids.push_back(std::move(row));
  }
  return {{"labels", k.labels},
          {"inertia", k.inertia},
          {"iterations", k.iterations},
          {"history", k.history},
          {"centroids", std::move(centroids)}};
}

void write_results_csv(std::ostream& out, const std::vector<CgsResult>& results) {
  out << "group,source,volume,surface_area,alpha,m,lag,i,j,k,n_points,duplicates_merged,degenerate,trimmed\n";
  for (const auto& r : results) {
    out << r.group << ',' << r.source << ',' << fmt9(r.volume) << ',' << fmt9(r.surface_area) << ',' << fmt9(r.alpha)
        << ',' << r.m << ',' << r.lag << ',' << r.coords[0] << ',' << r.coords[1] << ',' << r.coords[2] << ','
        << r.n_points << ',' << r.duplicates_merged << ',' << (r.degenerate ? 1 : 0) << ',' << (r.trimmed ? 1 : 0)
        << '\n';
  }
}

void write_curve_csv(std::ostream& out, const VolumeCurve& c) {
  out << "alpha,volume\n";
  for (std::size_t i = 0; i < c.alphas.size(); ++i) out << fmt9(c.alphas[i]) << ',' << fmt9(c.volumes[i]) << '\n';
}

void write_density_csv(std::ostream& out, const Density& d) {
  out << "x,density\n";
  for (std::size_t i = 0; i < d.grid.size(); ++i) out << fmt9(d.grid[i]) << ',' << fmt9(d.values[i]) << '\n';
}

void write_matrix_csv(std::ostream& out, const DistanceMatrix& m) {
  out << "label";
  for (const auto& c : m.col_labels) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    out << m.row_labels[i];
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j) out << ',' << fmt9(m.entries(i, j));
    out << '\n';
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cgs::io
