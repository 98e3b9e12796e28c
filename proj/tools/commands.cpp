#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "cgs/ccf.hpp"
#include "cgs/dynsys.hpp"
#include "cgs/error.hpp"
#include "cgs/io.hpp"
#include "cgs/pipeline.hpp"
#include "cgs/stats.hpp"
#include "cgs/version.hpp"

namespace cgs::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get(const json& c, const char* key) {
  if (!c.contains(key)) throw InvalidArgument(std::string("config is missing '") + key + "'");
  try {
    return c.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("config field '") + key + "' has the wrong type");
  }
}

double get_number(const json& c, const char* key) {
  if (!c.contains(key)) throw InvalidArgument(std::string("config is missing '") + key + "'");
  return io::to_double(c.at(key));
}

std::string output_format(const json& c, std::initializer_list<const char*> allowed) {
  const auto f = get<std::string>(c, "format");
  for (const char* a : allowed) {
    if (f == a) return f;
  }
  throw InvalidArgument("unsupported output format '" + f + "'");
}

SeriesFormat input_format(const json& c) {
  const auto f = get<std::string>(c, "input_format");
  if (f == "ascii") return SeriesFormat::AsciiColumn;
  if (f == "csv") return SeriesFormat::Csv;
  throw InvalidArgument("input format must be ascii or csv, got '" + f + "'");
}

/// Group directories first, then every --in file pooled into a group named "inputs".
std::vector<SeriesGroup> load_inputs(const json& c) {
  const double fs = get_number(c, "fs");
  std::vector<SeriesGroup> groups;
  for (const auto& dir : get<std::vector<std::string>>(c, "groups")) {
    groups.push_back(load_group(dir, input_format(c), fs));
  }
  const auto files = get<std::vector<std::string>>(c, "inputs");
  if (!files.empty()) {
    SeriesGroup g;
    g.name = "inputs";
    for (const auto& f : files) {
      for (auto& s : load_channels(f, format_from_path(f), fs)) {
        s.group = g.name;
        g.members.push_back(std::move(s));
      }
    }
    groups.push_back(std::move(g));
  }
  if (groups.empty()) throw InvalidArgument("no input series: give --group or --in");
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (!names.insert(g.name).second) throw InvalidArgument("two input groups are both named '" + g.name + "'");
  }
  return groups;
}

EstimationOptions estimation(const json& c) {
  EstimationOptions o;
  o.max_lag = get<int>(c, "max_lag");
  o.max_dim = get<int>(c, "max_dim");
  o.fnn_threshold = get_number(c, "fnn_threshold");
  o.fnn.rtol = get_number(c, "rtol");
  o.fnn.atol = get_number(c, "atol");
  o.ami_bins = get<int>(c, "ami_bins");
  const auto method = get<std::string>(c, "lag_method");
  if (method == "acf") {
    o.lag_method = LagMethod::Acf;
  } else if (method == "ami") {
    o.lag_method = LagMethod::Ami;
  } else {
    throw InvalidArgument("lag method must be acf or ami, got '" + method + "'");
  }
  return o;
}

/// Positive m / lag in the config override the estimates; both set skips estimation.
GroupEmbeddingParams resolve_params(const SeriesGroup& g, const json& c) {
  const int m = get<int>(c, "m"), lag = get<int>(c, "lag");
  if (m < 0 || lag < 0) throw InvalidArgument("m and lag must be positive (0 estimates them)");
  if (m > 0 && lag > 0) return fixed_params(m, lag);
  auto p = group_embedding_params(g, estimation(c));
  if (m > 0) p.m = m;
  if (lag > 0) p.lag = lag;
  return p;
}

std::vector<GroupEmbeddingParams> resolve_all(const std::vector<SeriesGroup>& groups, const json& c,
                                              RunOutput& out) {
  std::vector<GroupEmbeddingParams> params;
  json list = json::array();
  for (const auto& g : groups) {
    params.push_back(resolve_params(g, c));
    const double dt = g.members.front().dt;
    list.push_back({{"group", g.name}, {"m", params.back().m}, {"lag", params.back().lag},
                    {"lag_seconds", params.back().lag * dt}});
  }
  out.resolved["groups"] = std::move(list);
  return params;
}

Coords coords(const json& c) {
  const auto v = get<std::vector<int>>(c, "coords");
  if (v.size() != 3) throw InvalidArgument("coords needs exactly three indices");
  return {v[0], v[1], v[2]};
}

std::vector<double> alpha_grid(const json& c) {
  std::vector<double> grid;
  for (const auto& a : c.at("alphas")) grid.push_back(io::to_double(a));
  return grid;
}

/// Fixed alpha, or the largest per-group optimum when the config says "auto".
double resolve_alpha(const std::vector<SeriesGroup>& groups, const std::vector<GroupEmbeddingParams>& params,
                     const Coords& xyz, const json& c, RunOutput& out) {
  const json& a = c.at("alpha");
  if (a.is_string() && a.get<std::string>() == "auto") {
    const auto grid = alpha_grid(c);
    const auto common = common_alpha(groups, params, grid, xyz, get_number(c, "rel_tol"));
    out.resolved["common_alpha"] = io::to_json(common);
    out.resolved["alpha"] = io::number(common.alpha);
    return common.alpha;
  }
  const double alpha = io::to_double(a);
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be nonnegative");
  out.resolved["alpha"] = io::number(alpha);
  return alpha;
}

std::string csv_cell(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

RunOutput run_embed(const json& c) {
  const auto format = output_format(c, {"json", "csv"});
  const auto groups = load_inputs(c);
  const auto opt = estimation(c);
  const bool curves = get<bool>(c, "curves");
  RunOutput out;
  json report = json::array(), resolved = json::array();
  std::ostringstream csv;
  csv << "group,label,acf_lag,ami_lag,dim_at_acf_lag,dim_at_ami_lag,m,lag,saturated\n";
  for (const auto& g : groups) {
    const auto p = group_embedding_params(g, opt);
    const double dt = g.members.front().dt;
    json j = io::to_json(p, curves);
    j["group"] = g.name;
    j["dt"] = dt;
    j["lag_seconds"] = p.lag * dt;
    report.push_back(std::move(j));
    resolved.push_back({{"group", g.name}, {"m", p.m}, {"lag", p.lag}});
    for (const auto& mp : p.per_member) {
      auto lag_of = [](const std::optional<LagEstimate>& e) { return e ? std::optional<int>(e->lag) : std::nullopt; };
      auto dim_of = [](const std::optional<FnnProfile>& f) {
        return f ? std::optional<int>(f->chosen_dim) : std::nullopt;
      };
      csv << g.name << ',' << mp.label << ',' << csv_cell(lag_of(mp.acf_lag)) << ',' << csv_cell(lag_of(mp.ami_lag))
          << ',' << csv_cell(dim_of(mp.fnn_acf)) << ',' << csv_cell(dim_of(mp.fnn_ami)) << ',' << mp.m << ','
          << mp.lag << ',' << (mp.saturated ? 1 : 0) << '\n';
    }
  }
  out.resolved["groups"] = std::move(resolved);
  out.artifacts.push_back(
      {get<std::string>(c, "out"), format == "json" ? io::dump(json{{"groups", std::move(report)}}) : csv.str()});
  return out;
}

RunOutput run_sweep(const json& c) {
  const auto format = output_format(c, {"csv", "json"});
  const auto groups = load_inputs(c);
  RunOutput out;
  const auto params = resolve_all(groups, c, out);
  const auto common = common_alpha(groups, params, alpha_grid(c), coords(c), get_number(c, "rel_tol"));
  out.resolved["common_alpha"] = io::to_json(common);

  std::string content;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "group,alpha,volume\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& curve = common.curves[g];
      for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        csv << groups[g].name << ',' << io::fmt9(curve.alphas[i]) << ',' << io::fmt9(curve.volumes[i]) << '\n';
      }
    }
    content = csv.str();
  } else {
    json list = json::array();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      list.push_back({{"group", groups[g].name},
                      {"m", params[g].m},
                      {"lag", params[g].lag},
                      {"optimal_alpha", io::number(common.optima[g])},
                      {"curve", io::to_json(common.curves[g])}});
    }
    content = io::dump(json{{"common_alpha", io::number(common.alpha)}, {"groups", std::move(list)}});
  }
  out.artifacts.push_back({get<std::string>(c, "out"), std::move(content)});
  return out;
}

json usable_summary(const std::vector<CgsResult>& results) {
  std::vector<double> v;
  std::size_t degenerate = 0, trimmed = 0;
  for (const auto& r : results) {
    if (r.degenerate) {
      ++degenerate;
    } else if (r.trimmed) {
      ++trimmed;
    } else {
      v.push_back(r.volume);
    }
  }
  json j = {{"degenerate", degenerate}, {"trimmed", trimmed}, {"used", v.size()}};
  j["volume"] = v.empty() ? json(nullptr) : io::to_json(summary_stats(v));
  return j;
}

RunOutput run_cgs(const json& c) {
  const auto format = output_format(c, {"json", "csv"});
  const auto mode = get<std::string>(c, "mode");
  if (mode != "pooled" && mode != "per-series" && mode != "both") {
    throw InvalidArgument("mode must be pooled, per-series or both");
  }
  const double trim = get_number(c, "trim");
  if (trim != 0.0 && mode == "pooled") throw InvalidArgument("--trim applies to per-series results only");

  const auto groups = load_inputs(c);
  RunOutput out;
  const auto params = resolve_all(groups, c, out);
  const Coords xyz = coords(c);
  const double alpha = resolve_alpha(groups, params, xyz, c, out);

  std::vector<CgsResult> records;
  json summaries = json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (mode != "per-series") records.push_back(cgs_pooled(groups[g], params[g], alpha, xyz));
    if (mode != "pooled") {
      auto per = cgs_per_series(groups[g], params[g], alpha, xyz);
      if (trim != 0.0) trim_upper(per, trim);
      json s = usable_summary(per);
      s["group"] = groups[g].name;
      summaries.push_back(std::move(s));
      records.insert(records.end(), per.begin(), per.end());
    }
  }

  std::string content;
  if (format == "csv") {
    std::ostringstream csv;
    io::write_results_csv(csv, records);
    content = csv.str();
  } else {
    json list = json::array();
    for (const auto& r : records) list.push_back(io::to_json(r));
    json doc = {{"alpha", io::number(alpha)}, {"records", std::move(list)}};
    if (mode != "pooled") doc["per_series_summary"] = std::move(summaries);
    content = io::dump(doc);
  }
  out.artifacts.push_back({get<std::string>(c, "out"), std::move(content)});
  return out;
}

RunOutput run_combos(const json& c) {
  const auto format = output_format(c, {"csv", "json"});
  const auto groups = load_inputs(c);
  RunOutput out;
  const auto params = resolve_all(groups, c, out);
  const double alpha = resolve_alpha(groups, params, kDefaultCoords, c, out);

  std::ostringstream csv;
  csv << "group,i,j,k,volume\n";
  json list = json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto vols = coord_combination_volumes(groups[g], params[g], alpha);
    json entries = json::array();
    std::vector<double> v;
    for (const auto& [xyz, vol] : vols) {
      csv << groups[g].name << ',' << xyz[0] << ',' << xyz[1] << ',' << xyz[2] << ',' << io::fmt9(vol) << '\n';
      entries.push_back({{"coords", xyz}, {"volume", vol}});
      v.push_back(vol);
    }
    const auto s = summary_stats(v);
    list.push_back({{"group", groups[g].name},
                    {"m", params[g].m},
                    {"lag", params[g].lag},
                    {"combinations", std::move(entries)},
                    {"summary", io::to_json(s)},
                    {"iqr_over_median", s.median != 0.0 ? io::number((s.q3 - s.q1) / s.median) : json(nullptr)}});
  }
  const std::string content =
      format == "csv" ? csv.str() : io::dump(json{{"alpha", io::number(alpha)}, {"groups", std::move(list)}});
  out.artifacts.push_back({get<std::string>(c, "out"), content});
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct Sample {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  std::vector<std::size_t> excluded;
};

/// Values grouped by a label column. Pooled rows, degenerate rows and trimmed
/// rows of a results table are left out unless asked for.
Sample read_grouped_values(const std::string& path, const std::string& group_col, const std::string& value_col,
                           bool include_pooled) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto gcol = column(group_col), vcol = column(value_col);
  if (!gcol) throw ParseError(path, 1, "no column named '" + group_col + "'");
  if (!vcol) throw ParseError(path, 1, "no column named '" + value_col + "'");
  const auto source = column("source"), degenerate = column("degenerate"), trimmed = column("trimmed");

  Sample s;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError(path, lineno, "expected " + std::to_string(header.size()) + " fields");
    }
    if (source && !include_pooled && cells[*source] == "pooled") continue;
    const auto& name = cells[*gcol];
    auto [it, fresh] = index.try_emplace(name, s.names.size());
    if (fresh) {
      s.names.push_back(name);
      s.values.emplace_back();
      s.excluded.push_back(0);
    }
    if ((degenerate && cells[*degenerate] == "1") || (trimmed && cells[*trimmed] == "1")) {
      ++s.excluded[it->second];
      continue;
    }
    const auto& text = cells[*vcol];
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v)) {
      throw ParseError(path, lineno, "'" + text + "' is not a finite number");
    }
    s.values[it->second].push_back(v);
  }
  for (std::size_t g = 0; g < s.names.size(); ++g) {
    if (s.values[g].empty()) throw InvalidArgument("group '" + s.names[g] + "' has no usable values in " + path);
  }
  if (s.names.empty()) throw InvalidArgument(path + " has no data rows");
  return s;
}

RunOutput run_compare(const json& c) {
  const auto format = output_format(c, {"json", "csv"});
  const auto sample = read_grouped_values(get<std::string>(c, "input"), get<std::string>(c, "group_column"),
                                          get<std::string>(c, "value_column"), get<bool>(c, "include_pooled"));
  const std::size_t k = sample.names.size();
  RunOutput out;
  out.resolved["groups"] = json::array();
  for (std::size_t g = 0; g < k; ++g) {
    out.resolved["groups"].push_back(
        {{"group", sample.names[g]}, {"n", sample.values[g].size()}, {"excluded", sample.excluded[g]}});
  }

  if (format == "csv") {
    std::ostringstream csv;
    csv << "group,n,excluded,min,q1,median,q3,max,mean,sd\n";
    for (std::size_t g = 0; g < k; ++g) {
      const auto s = summary_stats(sample.values[g]);
      csv << sample.names[g] << ',' << s.n << ',' << sample.excluded[g] << ',' << io::fmt9(s.min) << ','
          << io::fmt9(s.q1) << ',' << io::fmt9(s.median) << ',' << io::fmt9(s.q3) << ',' << io::fmt9(s.max) << ','
          << io::fmt9(s.mean) << ',' << io::fmt9(s.sd) << '\n';
    }
    out.artifacts.push_back({get<std::string>(c, "out"), csv.str()});
    return out;
  }

  const bool densities = get<bool>(c, "densities");
  std::vector<Density> dens;
  json groups = json::array();
  for (std::size_t g = 0; g < k; ++g) {
    dens.push_back(kde(sample.values[g]));
    json j = {{"group", sample.names[g]},
              {"summary", io::to_json(summary_stats(sample.values[g]))},
              {"excluded", sample.excluded[g]},
              {"bandwidth", dens.back().bandwidth}};
    if (densities) j["density"] = io::to_json(dens.back());
    groups.push_back(std::move(j));
  }
  json doc = {{"groups", std::move(groups)}};
  if (k >= 2) {
    const auto adjusted = pairwise_wilcoxon_bonferroni(sample.values);
    json pairs = json::array();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        const double ab = kl_divergence(dens[a], dens[b]), ba = kl_divergence(dens[b], dens[a]);
        pairs.push_back({{"a", sample.names[a]},
                         {"b", sample.names[b]},
                         {"wilcoxon", io::to_json(wilcoxon_rank_sum(sample.values[a], sample.values[b]))},
                         {"p_bonferroni", adjusted(a, b)},
                         {"kl_ab", ab},
                         {"kl_ba", ba},
                         {"intrinsic_discrepancy", std::min(ab, ba)}});
      }
    }
    doc["pairwise"] = std::move(pairs);
    doc["kruskal_wallis"] = io::to_json(kruskal_wallis(sample.values));
  }
  out.artifacts.push_back({get<std::string>(c, "out"), io::dump(doc)});
  return out;
}

RunOutput run_ccf_matrix(const json& c) {
  const auto format = output_format(c, {"csv", "json"});
  const auto groups = load_inputs(c);
  std::vector<TimeSeries> channels;
  for (const auto& g : groups) channels.insert(channels.end(), g.members.begin(), g.members.end());

  CcfOptions opt;
  opt.max_lag = get<int>(c, "max_lag");
  opt.variant = ccf_variant_from_string(get<std::string>(c, "variant"));
  opt.positive_only = get<bool>(c, "lags_positive_only");
  opt.truncate = get<bool>(c, "truncate");
  const auto dm = distance_matrix(channels, channels, opt);

  RunOutput out;
  out.resolved["max_lag"] = dm.max_lag;
  const int k = get<int>(c, "kmeans");
  std::optional<KMeansResult> clusters;
  if (k > 0) {
    clusters = kmeans(dm.entries, k, get<std::uint64_t>(c, "seed"));
    out.resolved["kmeans_inertia"] = clusters->inertia;
  }

  const fs::path path = get<std::string>(c, "out");
  if (format == "csv") {
    std::ostringstream csv;
    io::write_matrix_csv(csv, dm);
    out.artifacts.push_back({path, csv.str()});
    if (clusters) {
      std::ostringstream lab;
      lab << "label,cluster\n";
      for (std::size_t i = 0; i < dm.row_labels.size(); ++i) lab << dm.row_labels[i] << ',' << clusters->labels[i] << '\n';
      out.artifacts.push_back({path.string() + ".clusters.csv", lab.str()});
    }
  } else {
    json doc = {{"matrix", io::to_json(dm)}};
    if (clusters) doc["kmeans"] = io::to_json(*clusters);
    out.artifacts.push_back({path, io::dump(doc)});
  }
  return out;
}

RunOutput run_gen_lorenz(const json& c) {
  const auto format = output_format(c, {"csv", "txt"});
  LorenzParams p;
  p.s = get_number(c, "s");
  p.r = get_number(c, "r");
  p.b = get_number(c, "b");
  const auto x0 = get<std::vector<double>>(c, "x0");
  if (x0.size() != 3) throw InvalidArgument("x0 needs three components");
  p.x0 = Eigen::Vector3d(x0[0], x0[1], x0[2]);
  p.dt = get_number(c, "dt");
  p.t_end = get_number(c, "t_end");
  p.transient = get_number(c, "transient");
  const auto tr = lorenz_trajectory(p);
  std::ostringstream text;
  if (format == "csv") {
    write_trajectory_csv(text, tr);
  } else {
    write_ascii_column(text, tr.x.samples);
  }
  RunOutput out;
  out.resolved["states"] = tr.states.rows();
  out.artifacts.push_back({get<std::string>(c, "out"), text.str()});
  return out;
}

RunOutput run_gen_paraboloid(const json& c) {
  output_format(c, {"csv"});
  const auto pts = paraboloid_sample(get<int>(c, "n"), get<std::uint64_t>(c, "seed"));
  std::ostringstream csv;
  csv << "x,y,z\n";
  for (const auto& p : pts) csv << io::fmt9(p.x()) << ',' << io::fmt9(p.y()) << ',' << io::fmt9(p.z()) << '\n';
  RunOutput out;
  out.artifacts.push_back({get<std::string>(c, "out"), csv.str()});
  return out;
}

using Runner = RunOutput (*)(const json&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"embed", run_embed},         {"sweep-alpha", run_sweep},          {"cgs", run_cgs},
      {"combos", run_combos},       {"compare", run_compare},            {"ccf-matrix", run_ccf_matrix},
      {"gen-lorenz", run_gen_lorenz}, {"gen-paraboloid", run_gen_paraboloid}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : runners()) v.push_back(name);
    return v;
  }();
  return names;
}

RunOutput run(const std::string& command, const json& config) {
  const auto it = runners().find(command);
  if (it == runners().end()) throw InvalidArgument("unknown command '" + command + "'");
  if (!config.is_object()) throw InvalidArgument("config must be a JSON object");
  return it->second(config);
}

fs::path manifest_path(const fs::path& output) { return output.string() + ".manifest.json"; }

json make_manifest(const std::string& command, const json& config, const RunOutput& out) {
  json outputs = json::array();
  for (const auto& a : out.artifacts) outputs.push_back({{"path", a.path.string()}, {"bytes", a.content.size()}});
  return {{"tool", "cgs"},       {"version", kVersion},        {"command", command},
          {"config", config},    {"resolved", out.resolved},   {"outputs", std::move(outputs)}};
}

void write_outputs(const std::string& command, const json& config, const RunOutput& out) {
  if (out.artifacts.empty()) throw InvalidArgument("command produced no output");
  for (const auto& a : out.artifacts) io::atomic_write(a.path, a.content);
  io::atomic_write(manifest_path(out.artifacts.front().path), io::dump(make_manifest(command, config, out)));
}

}  // namespace cgs::cli
