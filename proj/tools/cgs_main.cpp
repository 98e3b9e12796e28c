#include <cstdlib>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "cgs/error.hpp"
#include "cgs/io.hpp"
#include "cgs/version.hpp"
#include "commands.hpp"

namespace fs = std::filesystem;
using cgs::cli::json;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 64;

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

std::vector<std::string> absolute(const std::vector<std::string>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(absolute(p));
  return out;
}

json alpha_value(const std::string& s) {
  if (s == "auto") return s;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v >= 0.0)) throw cgs::InvalidArgument("--alpha must be 'auto' or a nonnegative number");
  return cgs::io::number(v);
}

json alpha_list(const std::vector<double>& alphas) {
  json a = json::array();
  for (double v : alphas) a.push_back(cgs::io::number(v));
  return a;
}

struct Options {
  std::vector<std::string> groups, inputs;
  std::string input_format = "ascii";
  double fs = 1.0;

  int max_lag = 0, max_dim = 12, ami_bins = 0;
  double fnn_threshold = 0.01, rtol = 10.0, atol = 2.0;
  std::string lag_method = "acf";
  bool curves = false;

  int m = 0, lag = 0;
  std::vector<int> coords{0, 1, 2};
  std::string alpha = "auto";
  std::vector<double> alphas;
  double rel_tol = 1e-3;
  std::string mode = "pooled";
  double trim = 0.0;

  std::string input, group_column = "group", value_column = "volume";
  bool include_pooled = false, densities = false;

  int ccf_max_lag = 0;
  std::string variant = "max-abs";
  bool positive_only = false, truncate = false;
  int kmeans = 0;
  std::uint64_t seed = 1;

  double s = 10.0, r = 28.0, b = 8.0 / 3.0, dt = 0.005, t_end = 75.0, transient = 10.0;
  std::vector<double> x0{1.0, 1.0, 1.0};
  int n = 10000;

  std::string out, manifest;
  std::map<std::string, std::string> format;  // per subcommand
};

void add_inputs(CLI::App* sub, Options& o) {
  sub->add_option("--group", o.groups, "Directory of series forming one group (repeatable)");
  sub->add_option("--in", o.inputs, "Series file; all --in files form the group 'inputs' (repeatable)");
  sub->add_option("--input-format", o.input_format, "Format of files inside --group directories")
      ->check(CLI::IsMember({"ascii", "csv"}))
      ->capture_default_str();
  sub->add_option("--fs", o.fs, "Sampling rate in Hz")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_estimation(CLI::App* sub, Options& o) {
  sub->add_option("--max-lag", o.max_lag, "Largest lag searched (0: a quarter of the series)")->capture_default_str();
  sub->add_option("--max-dim", o.max_dim, "Largest embedding dimension searched")->capture_default_str();
  sub->add_option("--fnn-threshold", o.fnn_threshold, "FNN fraction accepted as zero")->capture_default_str();
  sub->add_option("--rtol", o.rtol, "FNN distance-ratio tolerance")->capture_default_str();
  sub->add_option("--atol", o.atol, "FNN attractor-size tolerance")->capture_default_str();
  sub->add_option("--ami-bins", o.ami_bins, "AMI histogram bins (0: sqrt rule)")->capture_default_str();
  sub->add_option("--lag-method", o.lag_method, "Estimator supplying each member's lag")
      ->check(CLI::IsMember({"acf", "ami"}))
      ->capture_default_str();
}

void add_embedding(CLI::App* sub, Options& o, bool with_coords) {
  sub->add_option("--m", o.m, "Embedding dimension (0: estimate)")->capture_default_str();
  sub->add_option("--lag", o.lag, "Delay in samples (0: estimate)")->capture_default_str();
  if (with_coords) {
    sub->add_option("--coords", o.coords, "Three delay coordinates to keep")
        ->delimiter(',')
        ->expected(3)
        ->capture_default_str();
  }
}

void add_alpha(CLI::App* sub, Options& o, bool with_value) {
  if (with_value) {
    sub->add_option("--alpha", o.alpha, "'auto' (largest per-group optimum) or a radius")->capture_default_str();
  }
  sub->add_option("--alphas", o.alphas, "Increasing alpha grid (default: 64 geometric steps plus inf)")
      ->delimiter(',');
  sub->add_option("--rel-tol", o.rel_tol, "Relative volume tolerance of the optimum")->capture_default_str();
}

void add_output(CLI::App* sub, Options& o, const std::vector<std::string>& formats) {
  sub->add_option("--out", o.out, "Output file")->required();
  auto& f = o.format[sub->get_name()];
  f = formats.front();
  sub->add_option("--format", f, "Output format")->check(CLI::IsMember(formats))->capture_default_str();
}

json input_config(const Options& o) {
  return {{"groups", absolute(o.groups)}, {"inputs", absolute(o.inputs)}, {"input_format", o.input_format},
          {"fs", o.fs}};
}

void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

json estimation_config(const Options& o) {
  return {{"max_lag", o.max_lag}, {"max_dim", o.max_dim}, {"fnn_threshold", o.fnn_threshold}, {"rtol", o.rtol},
          {"atol", o.atol},       {"ami_bins", o.ami_bins}, {"lag_method", o.lag_method}};
}

json build_config(const std::string& cmd, const Options& o) {
  json c = {{"out", absolute(o.out)}, {"format", o.format.at(cmd)}};
  if (cmd == "embed") {
    merge(c, input_config(o));
    merge(c, estimation_config(o));
    c["curves"] = o.curves;
  } else if (cmd == "sweep-alpha" || cmd == "cgs" || cmd == "combos") {
    merge(c, input_config(o));
    merge(c, estimation_config(o));
    c["m"] = o.m;
    c["lag"] = o.lag;
    c["alphas"] = alpha_list(o.alphas);
    c["rel_tol"] = o.rel_tol;
    if (cmd != "combos") c["coords"] = o.coords;
    if (cmd != "sweep-alpha") c["alpha"] = alpha_value(o.alpha);
    if (cmd == "cgs") {
      c["mode"] = o.mode;
      c["trim"] = o.trim;
    }
  } else if (cmd == "compare") {
    c["input"] = absolute(o.input);
    c["group_column"] = o.group_column;
    c["value_column"] = o.value_column;
    c["include_pooled"] = o.include_pooled;
    c["densities"] = o.densities;
  } else if (cmd == "ccf-matrix") {
    merge(c, input_config(o));
    c["max_lag"] = o.ccf_max_lag;
    c["variant"] = o.variant;
    c["lags_positive_only"] = o.positive_only;
    c["truncate"] = o.truncate;
    c["kmeans"] = o.kmeans;
    c["seed"] = o.seed;
  } else if (cmd == "gen-lorenz") {
    c.update({{"s", o.s}, {"r", o.r}, {"b", o.b}, {"x0", o.x0}, {"dt", o.dt}, {"t_end", o.t_end},
              {"transient", o.transient}});
  } else if (cmd == "gen-paraboloid") {
    c["n"] = o.n;
    c["seed"] = o.seed;
  }
  return c;
}

/// Command and config recorded in a manifest, with the output optionally redirected.
std::pair<std::string, json> from_manifest(const std::string& path, const std::string& out) {
  json m;
  try {
    m = json::parse(cgs::io::read_file(path));
  } catch (const json::parse_error& e) {
    throw cgs::ParseError(path, 1, std::string("not a manifest: ") + e.what());
  }
  if (!m.is_object() || !m.contains("command") || !m.contains("config") || !m["command"].is_string()) {
    throw cgs::ParseError(path, 1, "manifest lacks command or config");
  }
  if (m.value("version", "") != cgs::kVersion) {
    std::cerr << "cgs: warning: manifest written by version " << m.value("version", "?") << ", running "
              << cgs::kVersion << '\n';
  }
  json config = m["config"];
  if (!out.empty()) config["out"] = absolute(out);
  return {m["command"].get<std::string>(), std::move(config)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex geometric structures of delay-embedded time series.", "cgs"};
  app.set_version_flag("--version", std::string(cgs::kVersion));
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 internal error, 2 invalid argument, 3 parse error, 4 I/O error,\n"
      "5 degenerate input, 6 estimation failure, 7 numerical failure, 64 usage error.\n"
      "CGS_THREADS sets the worker thread count.");
  Options o;

  auto* embed = app.add_subcommand("embed", "Lag and dimension estimates per series and group");
  add_inputs(embed, o);
  add_estimation(embed, o);
  embed->add_flag("--curves", o.curves, "Include the ACF and AMI curves");
  add_output(embed, o, {"json", "csv"});

  auto* sweep = app.add_subcommand("sweep-alpha", "Pooled alpha-shape volume over an alpha grid");
  add_inputs(sweep, o);
  add_estimation(sweep, o);
  add_embedding(sweep, o, true);
  add_alpha(sweep, o, false);
  add_output(sweep, o, {"csv", "json"});

  auto* cgs_cmd = app.add_subcommand("cgs", "Alpha-shape volumes of pooled and per-series clouds");
  add_inputs(cgs_cmd, o);
  add_estimation(cgs_cmd, o);
  add_embedding(cgs_cmd, o, true);
  add_alpha(cgs_cmd, o, true);
  cgs_cmd->add_option("--mode", o.mode, "Which structures to measure")
      ->check(CLI::IsMember({"pooled", "per-series", "both"}))
      ->capture_default_str();
  cgs_cmd->add_option("--trim", o.trim, "Flag per-series volumes above this quantile (0: off)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_output(cgs_cmd, o, {"json", "csv"});

  auto* combos = app.add_subcommand("combos", "Pooled volume for every triple of delay coordinates");
  add_inputs(combos, o);
  add_estimation(combos, o);
  add_embedding(combos, o, false);
  add_alpha(combos, o, true);
  add_output(combos, o, {"csv", "json"});

  auto* compare = app.add_subcommand("compare", "Summaries, densities and rank tests across groups");
  compare->add_option("--in", o.input, "CSV table with a group and a value column")->required();
  compare->add_option("--group-column", o.group_column)->capture_default_str();
  compare->add_option("--value-column", o.value_column)->capture_default_str();
  compare->add_flag("--include-pooled", o.include_pooled, "Keep rows whose source is 'pooled'");
  compare->add_flag("--densities", o.densities, "Include the KDE grids");
  add_output(compare, o, {"json", "csv"});

  auto* ccf_cmd = app.add_subcommand("ccf-matrix", "Cross-correlation distance between all channels");
  add_inputs(ccf_cmd, o);
  ccf_cmd->add_option("--max-lag", o.ccf_max_lag, "Lag window (0: ceil(n/10), at most 200)")->capture_default_str();
  ccf_cmd->add_option("--variant", o.variant)
      ->check(CLI::IsMember({"max-abs", "one-minus-max-abs", "mean"}))
      ->capture_default_str();
  ccf_cmd->add_flag("--lags-positive-only", o.positive_only, "Use lags 1..max-lag only");
  ccf_cmd->add_flag("--truncate", o.truncate, "Cut unequal lengths to the shorter series");
  ccf_cmd->add_option("--kmeans", o.kmeans, "Cluster matrix rows into k groups (0: off)")->capture_default_str();
  ccf_cmd->add_option("--seed", o.seed)->capture_default_str();
  add_output(ccf_cmd, o, {"csv", "json"});

  auto* lorenz = app.add_subcommand("gen-lorenz", "Lorenz trajectory by fixed-step RK4");
  lorenz->add_option("--s", o.s)->capture_default_str();
  lorenz->add_option("--r", o.r)->capture_default_str();
  lorenz->add_option("--b", o.b)->capture_default_str();
  lorenz->add_option("--x0", o.x0)->delimiter(',')->expected(3)->capture_default_str();
  lorenz->add_option("--dt", o.dt)->capture_default_str();
  lorenz->add_option("--t-end", o.t_end)->capture_default_str();
  lorenz->add_option("--transient", o.transient, "Integration time discarded before t = 0")->capture_default_str();
  add_output(lorenz, o, {"csv", "txt"});

  auto* para = app.add_subcommand("gen-paraboloid", "Points on z = x^2 + y^2 over [-1, 1]^2");
  para->add_option("--n", o.n)->capture_default_str();
  para->add_option("--seed", o.seed)->capture_default_str();
  add_output(para, o, {"csv"});

  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", o.manifest, "Manifest written by an earlier run")->required();
  replay->add_option("--out", o.out, "Write the primary output here instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    auto [command, config] = name == "replay" ? from_manifest(o.manifest, o.out)
                                              : std::pair<std::string, json>{name, build_config(name, o)};
    const auto result = cgs::cli::run(command, config);
    cgs::cli::write_outputs(command, config, result);
    return EXIT_SUCCESS;
  } catch (const cgs::Error& e) {
    std::cerr << "cgs: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "cgs: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
