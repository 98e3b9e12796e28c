#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgs/ccf.hpp"
#include "cgs/geometry.hpp"
#include "cgs/pipeline.hpp"
#include "cgs/series.hpp"
#include "cgs/stats.hpp"

namespace cgs::io {

using nlohmann::json;

/// printf %.9g; infinities print as "inf" / "-inf".
std::string fmt9(double v);

/// Number, or the string "inf" / "-inf" / "nan" for non-finite values.
json number(double v);
/// Inverse of number().
double to_double(const json& j);

json to_json(const SummaryStats& s);
json to_json(const LagEstimate& e, bool with_curve);
json to_json(const FnnProfile& p);
json to_json(const MemberParams& m, bool with_curves);
json to_json(const GroupEmbeddingParams& g, bool with_curves);
json to_json(const CgsResult& r);
json to_json(const VolumeCurve& c);
json to_json(const CommonAlpha& c);
json to_json(const Density& d);
json to_json(const TestReport& r);
json to_json(const DistanceMatrix& m);
json to_json(const KMeansResult& k);

const char* to_string(TestMethod m);
const char* to_string(Correction c);

/// Flat CSV of results: group,source,volume,surface_area,alpha,m,lag,i,j,k,n_points,duplicates_merged,degenerate,trimmed
void write_results_csv(std::ostream& out, const std::vector<CgsResult>& results);
/// alpha,volume rows, alpha of +inf printed as inf.
void write_curve_csv(std::ostream& out, const VolumeCurve& c);
/// x,density
void write_density_csv(std::ostream& out, const Density& d);
/// Header row of column labels, one row per row label.
void write_matrix_csv(std::ostream& out, const DistanceMatrix& m);

/// Two-space indented JSON followed by a newline.
std::string dump(const json& j);

/// Writes to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace cgs::io
