#include <cmath>
#include <sstream>

#include "cgs/error.hpp"
#include "cgs/io.hpp"
#include "doctest.h"
#include "support/tempdir.hpp"

using namespace cgs;
namespace fs = std::filesystem;

TEST_CASE("nine significant digits") {
  CHECK(io::fmt9(1.0) == "1");
  CHECK(io::fmt9(0.1) == "0.1");
  CHECK(io::fmt9(1.0 / 3.0) == "0.333333333");
  CHECK(io::fmt9(123456789012.0) == "1.23456789e+11");
  CHECK(io::fmt9(-2.5e-7) == "-2.5e-07");
  CHECK(io::fmt9(kInfiniteAlpha) == "inf");
  CHECK(io::fmt9(-kInfiniteAlpha) == "-inf");
  CHECK(io::fmt9(std::nan("")) == "nan");
}

TEST_CASE("non-finite numbers survive a JSON round trip") {
  for (double v : {0.0, -1.5, 580.0, 1e-300, kInfiniteAlpha, -kInfiniteAlpha}) {
    const auto text = io::number(v).dump();
    CHECK(io::to_double(io::json::parse(text)) == v);
  }
  CHECK(std::isnan(io::to_double(io::number(std::nan("")))));
  CHECK(io::number(kInfiniteAlpha) == "inf");
  CHECK_THROWS_AS(io::to_double(io::json("big")), InvalidArgument);
  CHECK_THROWS_AS(io::to_double(io::json(nullptr)), InvalidArgument);
}

TEST_CASE("result records") {
  CgsResult r;
  r.volume = 2.0 / 3.0;
  r.surface_area = 4.0;
  r.alpha = kInfiniteAlpha;
  r.m = 10;
  r.lag = 1;
  r.coords = {0, 4, 9};
  r.n_points = 40;
  r.duplicates_merged = 2;
  r.source = "Z001";
  r.group = "Z";
  r.trimmed = true;

  std::ostringstream csv;
  io::write_results_csv(csv, {r});
  CHECK(csv.str() ==
        "group,source,volume,surface_area,alpha,m,lag,i,j,k,n_points,duplicates_merged,degenerate,trimmed\n"
        "Z,Z001,0.666666667,4,inf,10,1,0,4,9,40,2,0,1\n");

  const auto j = io::to_json(r);
  CHECK(j["alpha"] == "inf");
  CHECK(j["volume"].get<double>() == r.volume);
  CHECK(j["coords"] == io::json::array({0, 4, 9}));
  CHECK(j["source"] == "Z001");
  CHECK(j["degenerate"] == false);
}

TEST_CASE("curve, density and matrix tables") {
  VolumeCurve c;
  c.alphas = {0.5, 1.25, kInfiniteAlpha};
  c.volumes = {0.0, 0.1, 0.2};
  std::ostringstream curve;
  io::write_curve_csv(curve, c);
  CHECK(curve.str() == "alpha,volume\n0.5,0\n1.25,0.1\ninf,0.2\n");
  CHECK(io::to_json(c)["alphas"][2] == "inf");

  Density d;
  d.grid = {-1.0, 0.0};
  d.values = {0.25, 0.5};
  std::ostringstream dens;
  io::write_density_csv(dens, d);
  CHECK(dens.str() == "x,density\n-1,0.25\n0,0.5\n");

  DistanceMatrix m;
  m.row_labels = {"a", "b"};
  m.col_labels = {"c"};
  m.entries.resize(2, 1);
  m.entries << 0.125, 1.0 / 7.0;
  std::ostringstream mat;
  io::write_matrix_csv(mat, m);
  CHECK(mat.str() == "label,c\na,0.125\nb,0.142857143\n");
  const auto j = io::to_json(m);
  CHECK(j["entries"][1][0].get<double>() == 1.0 / 7.0);
  CHECK(j["variant"] == "max-abs");
}

TEST_CASE("atomic writes") {
  testing::TempDir dir;
  const auto target = dir / "nested/out.json";
  io::atomic_write(target, "first\n");
  CHECK(io::read_file(target) == "first\n");
  io::atomic_write(target, io::dump(io::json{{"k", 1}}));
  CHECK(io::read_file(target) == "{\n  \"k\": 1\n}\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path())) ++entries;
  CHECK(entries == 1);

  io::atomic_write(dir / "plain", "x");
  CHECK_THROWS_AS(io::atomic_write(dir / "plain/child", "y"), IoError);
  CHECK_THROWS_AS(io::read_file(dir / "missing"), IoError);
}
