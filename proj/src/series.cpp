#include "cgs/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cgs/error.hpp"

namespace cgs {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view tok, double& out) {
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void check_fs(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw InvalidArgument("sampling rate must be positive and finite");
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<TimeSeries> parse_csv(std::istream& in, const std::string& source, const std::string& stem, double dt) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  bool skip_first = false;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  std::size_t trailing_blank = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim(line);
    if (row.empty()) {
      ++trailing_blank;
      continue;
    }
    if (trailing_blank) throw ParseError(source, lineno - 1, "empty line");
    auto fields = split_commas(row);

    if (width == 0) {
      width = fields.size();
      cols.resize(width);
      double probe;
      const bool header = std::any_of(fields.begin(), fields.end(), [&](auto f) { return !parse_double(f, probe); });
      if (header) {
        for (auto f : fields) names.emplace_back(f);
        if (width > 1) {
          const auto first = lower(fields[0]);
          skip_first = first == "t" || first == "time";
        }
        continue;
      }
      for (std::size_t c = 0; c < width; ++c) names.push_back(std::to_string(c));
    }
    if (fields.size() != width) {
      throw ParseError(source, lineno, "expected " + std::to_string(width) + " fields, got " +
                                           std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double v;
      if (!parse_double(fields[c], v)) throw ParseError(source, lineno, "non-numeric field '" + std::string(fields[c]) + "'");
      cols[c].push_back(v);
    }
  }
  if (width == 0 || cols[0].empty()) throw ParseError(source, lineno == 0 ? 1 : lineno, "no samples");

  std::vector<TimeSeries> out;
  for (std::size_t c = skip_first ? 1 : 0; c < width; ++c) {
    TimeSeries s;
    s.samples = Eigen::Map<const Eigen::VectorXd>(cols[c].data(), static_cast<Eigen::Index>(cols[c].size()));
    s.dt = dt;
    s.label = stem + ":" + names[c];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

SeriesFormat format_from_path(const fs::path& path) {
  return lower(path.extension().string()) == ".csv" ? SeriesFormat::Csv : SeriesFormat::AsciiColumn;
}

Eigen::VectorXd parse_ascii_column(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  std::size_t blank_run = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = trim(line);
    if (tok.empty()) {
      ++blank_run;
      continue;
    }
    if (blank_run) throw ParseError(source, lineno - 1, "empty line");
    double v;
    if (!parse_double(tok, v)) throw ParseError(source, lineno, "non-numeric token '" + std::string(tok) + "'");
    values.push_back(v);
  }
  if (values.empty()) throw ParseError(source, lineno == 0 ? 1 : lineno, "no samples");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_ascii_column(std::ostream& out, const Eigen::Ref<const Eigen::VectorXd>& samples) {
  char buf[32];
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const auto res = std::to_chars(buf, buf + sizeof buf, samples[i]);
    out.write(buf, res.ptr - buf);
    out.put('\n');
  }
}

std::vector<TimeSeries> load_channels(const fs::path& path, SeriesFormat format, double fs) {
  check_fs(fs);
  auto in = open_input(path);
  const std::string stem = path.stem().string();
  std::vector<TimeSeries> out;
  if (format == SeriesFormat::Csv) {
    out = parse_csv(in, path.string(), stem, 1.0 / fs);
  } else {
    TimeSeries s;
    s.samples = parse_ascii_column(in, path.string());
    s.dt = 1.0 / fs;
    s.label = stem;
    out.push_back(std::move(s));
  }
  for (const auto& s : out) {
    if (s.size() < 2) throw ParseError(path.string(), 1, "a series needs at least 2 samples");
  }
  return out;
}

TimeSeries load_series(const fs::path& path, SeriesFormat format, double fs) {
  auto channels = load_channels(path, format, fs);
  if (channels.size() != 1) {
    throw InvalidArgument(path.string() + ": " + std::to_string(channels.size()) + " channels, expected 1");
  }
  return std::move(channels.front());
}

SeriesGroup load_group(const fs::path& dir, SeriesFormat format, double fs) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  const std::string ext = format == SeriesFormat::Csv ? ".csv" : ".txt";
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (!entry.is_regular_file() || p.filename().string().starts_with(".")) continue;
    if (lower(p.extension().string()) == ext) files.push_back(p);
  }
  if (files.empty()) throw IoError("no " + ext + " files in " + dir.string());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  SeriesGroup g;
  g.name = fs::absolute(dir).lexically_normal().filename().string();
  if (g.name.empty()) g.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  for (const auto& f : files) {
    try {
      for (auto& s : load_channels(f, format, fs)) {
        s.group = g.name;
        g.members.push_back(std::move(s));
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "loading group " + g.name + ": " + e.what());
    }
  }
  return g;
}

void validate(const TimeSeries& s) {
  if (s.size() < 2) throw InvalidArgument("series '" + s.label + "' has fewer than 2 samples");
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw InvalidArgument("series '" + s.label + "' has invalid dt");
  if (!s.samples.allFinite()) throw InvalidArgument("series '" + s.label + "' has non-finite samples");
}

void validate(const SeriesGroup& g) {
  if (g.members.empty()) throw InvalidArgument("group '" + g.name + "' is empty");
  for (const auto& s : g.members) {
    validate(s);
    if (s.dt != g.members.front().dt) throw InvalidArgument("group '" + g.name + "' mixes sampling intervals");
  }
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability outside [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summary_stats(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("summary_stats: empty input");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("summary_stats: non-finite value");
  }
  std::sort(v.begin(), v.end());
  SummaryStats s;
  s.n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  // Sorted order makes mean and sd independent of the input permutation.
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  // Rounding in the mean can push it past an extreme for near-constant data.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

}  // namespace cgs
