#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cgs/error.hpp"
#include "cgs/series.hpp"
#include "doctest.h"
#include "support/tempdir.hpp"

using namespace cgs;
using cgs::testing::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Quantile by explicit order-statistic interpolation, written independently.
double quantile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = 1.0 + (static_cast<double>(v.size()) - 1.0) * p;  // 1-based position
  const double lo = std::floor(h);
  const double x_lo = v[static_cast<std::size_t>(lo) - 1];
  if (lo >= static_cast<double>(v.size())) return x_lo;
  return x_lo + (h - lo) * (v[static_cast<std::size_t>(lo)] - x_lo);
}

}  // namespace

TEST_CASE("two-line ascii file") {
  TempDir dir;
  write(dir / "pair.txt", "1.0\n-2.5\n");
  const auto s = load_series(dir / "pair.txt", SeriesFormat::AsciiColumn, 2.0);
  REQUIRE(s.size() == 2);
  CHECK(s.samples[0] == 1.0);
  CHECK(s.samples[1] == -2.5);
  CHECK(s.dt == 0.5);
  CHECK(s.label == "pair");
}

TEST_CASE("CRLF, surrounding whitespace and trailing blank lines") {
  TempDir dir;
  write(dir / "z.txt", "  12\r\n-7 \r\n\t3\r\n\r\n");
  const auto s = load_series(dir / "z.txt", SeriesFormat::AsciiColumn, 173.61);
  REQUIRE(s.size() == 3);
  CHECK(s.samples[1] == -7.0);
  CHECK(s.dt == doctest::Approx(1.0 / 173.61));
}

TEST_CASE("parse errors carry line numbers") {
  TempDir dir;
  write(dir / "bad.txt", "abc\n");
  try {
    load_series(dir / "bad.txt", SeriesFormat::AsciiColumn, 1.0);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.kind() == ErrorKind::Parse);
  }
  write(dir / "mid.txt", "1\n2\nnan\n4\n");
  try {
    load_series(dir / "mid.txt", SeriesFormat::AsciiColumn, 1.0);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write(dir / "gap.txt", "1\n\n2\n");
  CHECK_THROWS_AS(load_series(dir / "gap.txt", SeriesFormat::AsciiColumn, 1.0), ParseError);
  write(dir / "empty.txt", "");
  CHECK_THROWS_AS(load_series(dir / "empty.txt", SeriesFormat::AsciiColumn, 1.0), ParseError);
  write(dir / "one.txt", "5\n");
  CHECK_THROWS_AS(load_series(dir / "one.txt", SeriesFormat::AsciiColumn, 1.0), ParseError);
  CHECK_THROWS_AS(load_series(dir / "missing.txt", SeriesFormat::AsciiColumn, 1.0), IoError);
  CHECK_THROWS_AS(load_series(dir / "one.txt", SeriesFormat::AsciiColumn, 0.0), InvalidArgument);
}

TEST_CASE("csv channels with and without a time column") {
  TempDir dir;
  write(dir / "rec.csv", "time,c3,c4\n0,1,2\n0.5,3,4\n1.0,5,6\n");
  auto ch = load_channels(dir / "rec.csv", SeriesFormat::Csv, 2.0);
  REQUIRE(ch.size() == 2);
  CHECK(ch[0].label == "rec:c3");
  CHECK(ch[1].samples[2] == 6.0);

  write(dir / "plain.csv", "1,2\n3,4\n");
  ch = load_channels(dir / "plain.csv", SeriesFormat::Csv, 1.0);
  REQUIRE(ch.size() == 2);
  CHECK(ch[0].samples[1] == 3.0);

  write(dir / "named.csv", "a,b\n1,2\n3,4\n");
  CHECK(load_channels(dir / "named.csv", SeriesFormat::Csv, 1.0).size() == 2);

  write(dir / "single.csv", "t,v\n0,7\n1,8\n");
  CHECK(load_series(dir / "single.csv", SeriesFormat::Csv, 1.0).samples[1] == 8.0);
  CHECK_THROWS_AS(load_series(dir / "rec.csv", SeriesFormat::Csv, 1.0), InvalidArgument);

  write(dir / "ragged.csv", "1,2\n3\n");
  try {
    load_channels(dir / "ragged.csv", SeriesFormat::Csv, 1.0);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(format_from_path("x/REC.CSV") == SeriesFormat::Csv);
  CHECK(format_from_path("x/Z001.txt") == SeriesFormat::AsciiColumn);
}

TEST_CASE("groups load in file-name order") {
  TempDir dir;
  const auto g = dir / "A";
  std::filesystem::create_directories(g);
  write(g / "Z010.txt", "3\n4\n");
  write(g / "Z002.txt", "1\n2\n");
  write(g / "notes.md", "ignored");
  const auto grp = load_group(g, SeriesFormat::AsciiColumn, 173.61);
  CHECK(grp.name == "A");
  REQUIRE(grp.members.size() == 2);
  CHECK(grp.members[0].label == "Z002");
  CHECK(grp.members[1].group == "A");

  const auto one = dir / "B";
  std::filesystem::create_directories(one);
  write(one / "x.txt", "1\n2\n");
  CHECK(load_group(one, SeriesFormat::AsciiColumn, 1.0).members.size() == 1);

  const auto empty = dir / "C";
  std::filesystem::create_directories(empty);
  CHECK_THROWS_AS(load_group(empty, SeriesFormat::AsciiColumn, 1.0), IoError);

  write(one / "y.txt", "1\noops\n");
  try {
    load_group(one, SeriesFormat::AsciiColumn, 1.0);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("y.txt") != std::string::npos);
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

TEST_CASE("serialize then parse reproduces samples bit for bit") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1e3);
  Eigen::VectorXd v(2000);
  for (auto& x : v) x = n(rng);
  v[0] = 0.1;
  v[1] = -0.0;
  v[2] = 1e-300;
  v[3] = 123456789.0;
  std::stringstream ss;
  write_ascii_column(ss, v);
  const auto back = parse_ascii_column(ss, "mem");
  REQUIRE(back.size() == v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(std::signbit(back[i]) == std::signbit(v[i]));
  CHECK(std::memcmp(back.data(), v.data(), sizeof(double) * v.size()) == 0);
}

TEST_CASE("summary statistics") {
  const std::vector<double> flat{5, 5, 5, 5};
  auto s = summary_stats(flat);
  CHECK(s.min == 5);
  CHECK(s.q1 == 5);
  CHECK(s.median == 5);
  CHECK(s.q3 == 5);
  CHECK(s.max == 5);
  CHECK(s.mean == 5);
  CHECK(s.sd == 0);

  const std::vector<double> five{1, 2, 3, 4, 5};
  s = summary_stats(five);
  CHECK(s.median == 3);
  CHECK(s.mean == 3);
  CHECK(s.sd == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
  CHECK(s.q1 == 2);
  CHECK(s.q3 == 4);

  const std::vector<double> four{1, 2, 3, 10};
  s = summary_stats(four);
  CHECK(s.q1 == doctest::Approx(1.75));
  CHECK(s.q3 == doctest::Approx(4.75));

  CHECK_THROWS_AS(summary_stats(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(summary_stats(std::vector<double>{1.0, NAN}), InvalidArgument);
}

TEST_CASE("summary statistics: ordering, permutation invariance, quantile oracle") {
  std::mt19937_64 rng(9);
  std::lognormal_distribution<double> ln(0.0, 2.0);
  std::uniform_int_distribution<int> len(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) x = trial % 3 == 0 ? std::round(ln(rng)) : ln(rng);
    const auto s = summary_stats(v);
    CHECK(s.min <= s.q1);
    CHECK(s.q1 <= s.median);
    CHECK(s.median <= s.q3);
    CHECK(s.q3 <= s.max);
    CHECK(s.sd >= 0.0);
    CHECK(s.q1 == doctest::Approx(quantile_oracle(v, 0.25)).epsilon(1e-14));
    CHECK(s.q3 == doctest::Approx(quantile_oracle(v, 0.75)).epsilon(1e-14));

    std::shuffle(v.begin(), v.end(), rng);
    const auto t = summary_stats(v);
    CHECK(std::memcmp(&s, &t, sizeof s) == 0);
  }
}
