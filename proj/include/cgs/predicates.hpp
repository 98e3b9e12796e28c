#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

// Adaptively exact orientation and in-sphere tests on double coordinates.
//
// Sign conventions follow the classic robust-predicates formulation:
//   orient3d(a, b, c, d) > 0  when d lies below the plane through a, b, c
//                             (a, b, c counter-clockwise seen from above);
//   insphere(a, b, c, d, e) > 0 when e lies inside the sphere through a..d,
//                             provided orient3d(a, b, c, d) > 0.
// A floating-point filter answers most queries; inputs it cannot certify are
// re-evaluated with exact expansion arithmetic.

namespace cgs::predicates {

using Point = Eigen::Vector3d;

int orient3d(const Point& a, const Point& b, const Point& c, const Point& d);
int insphere(const Point& a, const Point& b, const Point& c, const Point& d, const Point& e);

/// Exact paths only; exposed for testing the filters.
int orient3d_exact(const Point& a, const Point& b, const Point& c, const Point& d);
int insphere_exact(const Point& a, const Point& b, const Point& c, const Point& d, const Point& e);

/// In-sphere test with symbolic perturbation of the lifted coordinate.
///
/// Point k is lifted to |p_k|^2 + eps^(n - id_k), so the point with the larger
/// id receives the dominant perturbation. Never returns 0 when a..d span a
/// tetrahedron and the ids are pairwise distinct.
int insphere_perturbed(const std::array<const Point*, 5>& pts, const std::array<std::int64_t, 5>& ids);

/// Counters for filter failures, useful when profiling quantized inputs.
struct FilterStats {
  std::uint64_t orient_calls = 0;
  std::uint64_t orient_exact = 0;
  std::uint64_t insphere_calls = 0;
  std::uint64_t insphere_exact = 0;
};
FilterStats filter_stats();
void reset_filter_stats();

}  // namespace cgs::predicates
