#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cgs {

/// One scalar channel. Samples are kept in source units.
struct TimeSeries {
  Eigen::VectorXd samples;
  double dt = 1.0;
  std::string label;
  std::string group;

  Eigen::Index size() const { return samples.size(); }
};

/// Members share dt and are ordered by file name.
struct SeriesGroup {
  std::string name;
  std::vector<TimeSeries> members;
};

enum class SeriesFormat { AsciiColumn, Csv };

/// `.csv` maps to Csv, anything else to AsciiColumn.
SeriesFormat format_from_path(const std::filesystem::path& path);

/// Single-channel load. A CSV file must hold exactly one channel column;
/// use load_channels for more.
TimeSeries load_series(const std::filesystem::path& path, SeriesFormat format, double fs);

/// Every channel of a file. For ascii-column files this is one series.
/// CSV channels are labelled `<stem>:<column>`.
std::vector<TimeSeries> load_channels(const std::filesystem::path& path, SeriesFormat format, double fs);

/// All matching files of a directory (`*.txt` or `*.csv`, by format), sorted
/// by file name. The group is named after the directory.
SeriesGroup load_group(const std::filesystem::path& dir, SeriesFormat format, double fs);

/// Parses ascii-column text. `source` only labels error messages.
Eigen::VectorXd parse_ascii_column(std::istream& in, const std::string& source);

/// One sample per line in shortest round-trip decimal form.
void write_ascii_column(std::ostream& out, const Eigen::Ref<const Eigen::VectorXd>& samples);

void validate(const TimeSeries& s);
void validate(const SeriesGroup& g);

struct SummaryStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0, sd = 0;
  std::size_t n = 0;
};

/// Quartiles interpolate linearly between order statistics at 1 + (n-1)p.
/// sd uses the n-1 denominator and is 0 for a single value.
SummaryStats summary_stats(std::span<const double> values);

/// Quantile of already sorted values, same convention as summary_stats.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace cgs
