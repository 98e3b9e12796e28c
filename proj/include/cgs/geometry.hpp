#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cgs {

using Point3 = Eigen::Vector3d;
using PointCloud = std::vector<Point3>;

constexpr double kInfiniteAlpha = std::numeric_limits<double>::infinity();

/// 3D Delaunay tetrahedralization together with the alpha-filtration values
/// of every simplex.
///
/// Vertices are the deduplicated input points in lexicographic (x, y, z)
/// order, so the result does not depend on the order of the input. Every
/// tetrahedron is positively oriented in the sense of
/// predicates::orient3d. Ties between cospherical points are broken by a
/// symbolic perturbation ranked on vertex index.
///
/// The entry radius of a simplex is the smallest alpha at which it belongs to
/// the alpha complex: its smallest circumsphere radius when that sphere is
/// empty, otherwise the smallest entry radius among its cofaces.
struct Tetrahedralization {
  PointCloud vertices;
  std::size_t input_count = 0;
  std::size_t duplicates_merged = 0;
  /// True when fewer than four affinely independent points were supplied.
  bool degenerate = false;

  std::vector<std::array<int, 4>> tetrahedra;
  /// neighbors[t][i] is the tetrahedron across the face opposite vertex i, or -1 on the hull.
  std::vector<std::array<int, 4>> neighbors;
  std::vector<double> tet_volume;
  std::vector<double> tet_radius;

  /// Each triangle is ordered so its normal points out of triangle_tets[t][0].
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> triangle_tets;  // second entry -1 on the hull
  std::vector<double> triangle_area;
  std::vector<double> triangle_radius;

  std::vector<std::array<int, 2>> edges;  // sorted vertex pairs
  std::vector<double> edge_radius;

  std::size_t num_tetrahedra() const { return tetrahedra.size(); }
};

/// Builds the Delaunay tetrahedralization of `points`. Coincident points are
/// merged first. Never throws for degenerate input; the `degenerate` flag is
/// set and the complex is empty instead.
Tetrahedralization delaunay3(std::span<const Point3> points);

/// Alpha complex at a fixed alpha. Holds index sets into a Tetrahedralization,
/// which must outlive it.
struct AlphaShape {
  const Tetrahedralization* source = nullptr;
  double alpha = 0.0;
  std::vector<int> tetrahedra;
  std::vector<int> triangles;
  std::vector<int> edges;
  std::vector<int> vertices;
  /// Kept triangles that are a face of exactly one kept tetrahedron.
  std::vector<int> boundary_triangles;
  /// boundary_triangles[k] oriented with its normal pointing out of the shape.
  std::vector<std::array<int, 3>> boundary_faces;
};

/// Alpha is a radius in the units of the input coordinates.
AlphaShape alpha_complex(const Tetrahedralization& tri, double alpha);

double shape_volume(const AlphaShape& shape);
double shape_surface_area(const AlphaShape& shape);
double convex_hull_volume(const Tetrahedralization& tri);

struct VolumeCurve {
  std::vector<double> alphas;
  std::vector<double> volumes;
  double hull_volume = 0.0;
};

/// Volume of the alpha shape at each alpha of an increasing grid.
VolumeCurve alpha_sweep(const Tetrahedralization& tri, std::span<const double> alpha_grid);

/// `count` geometrically spaced alphas from half the shortest edge to the
/// hull diameter, followed by +inf.
std::vector<double> default_alpha_grid(const Tetrahedralization& tri, int count = 64);

/// Smallest grid alpha whose volume is at least (1 - rel_tol) * max volume.
double optimal_alpha(const VolumeCurve& curve, double rel_tol = 1e-3);

/// Largest distance between two hull vertices.
double hull_diameter(const Tetrahedralization& tri);

/// Boundary of the shape as ASCII STL / OFF, coordinates with 9 significant digits.
void write_stl(std::ostream& out, const AlphaShape& shape, const char* name = "cgs");
void write_off(std::ostream& out, const AlphaShape& shape);

}  // namespace cgs
