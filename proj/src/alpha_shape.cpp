#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "cgs/error.hpp"
#include "cgs/geometry.hpp"

namespace cgs {

AlphaShape alpha_complex(const Tetrahedralization& tri, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha_complex: alpha must be nonnegative");

  AlphaShape shape;
  shape.source = &tri;
  shape.alpha = alpha;

  std::vector<int> kept_faces(tri.tetrahedra.size(), 0);
  for (std::size_t t = 0; t < tri.tetrahedra.size(); ++t) {
    if (tri.tet_radius[t] <= alpha) shape.tetrahedra.push_back(static_cast<int>(t));
  }
  std::vector<char> tet_kept(tri.tetrahedra.size(), 0);
  for (int t : shape.tetrahedra) tet_kept[t] = 1;

  for (std::size_t f = 0; f < tri.triangles.size(); ++f) {
    if (!(tri.triangle_radius[f] <= alpha)) continue;
    const int id = static_cast<int>(f);
    shape.triangles.push_back(id);
    const auto& inc = tri.triangle_tets[f];
    const bool in0 = tet_kept[inc[0]] != 0;
    const bool in1 = inc[1] >= 0 && tet_kept[inc[1]] != 0;
    if (in0 != in1) {
      shape.boundary_triangles.push_back(id);
      auto face = tri.triangles[f];
      if (in1) std::swap(face[0], face[1]);
      shape.boundary_faces.push_back(face);
    }
  }

  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    if (tri.edge_radius[e] <= alpha) shape.edges.push_back(static_cast<int>(e));
  }

  shape.vertices.resize(tri.vertices.size());
  for (std::size_t v = 0; v < tri.vertices.size(); ++v) shape.vertices[v] = static_cast<int>(v);
  return shape;
}

double shape_volume(const AlphaShape& shape) {
  if (shape.source == nullptr) return 0.0;
  double sum = 0.0;
  for (int t : shape.tetrahedra) sum += shape.source->tet_volume[t];
  return sum;
}

double shape_surface_area(const AlphaShape& shape) {
  if (shape.source == nullptr) return 0.0;
  double sum = 0.0;
  for (int f : shape.boundary_triangles) sum += shape.source->triangle_area[f];
  return sum;
}

double convex_hull_volume(const Tetrahedralization& tri) {
  double sum = 0.0;
  for (double v : tri.tet_volume) sum += v;
  return sum;
}

VolumeCurve alpha_sweep(const Tetrahedralization& tri, std::span<const double> alpha_grid) {
  if (alpha_grid.empty()) throw InvalidArgument("alpha_sweep: empty alpha grid");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0)) throw InvalidArgument("alpha_sweep: alphas must be nonnegative");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw InvalidArgument("alpha_sweep: alpha grid must be strictly increasing");
    }
  }
  VolumeCurve curve;
  curve.alphas.assign(alpha_grid.begin(), alpha_grid.end());
  curve.volumes.assign(alpha_grid.size(), 0.0);
  // Summation runs in tetrahedron order, so every entry equals shape_volume
  // of alpha_complex at the same alpha bit for bit.
  for (std::size_t t = 0; t < tri.tetrahedra.size(); ++t) {
    const double r = tri.tet_radius[t];
    const double v = tri.tet_volume[t];
    const auto first = std::lower_bound(alpha_grid.begin(), alpha_grid.end(), r) - alpha_grid.begin();
    for (std::size_t g = static_cast<std::size_t>(first); g < alpha_grid.size(); ++g) curve.volumes[g] += v;
  }
  curve.hull_volume = convex_hull_volume(tri);
  return curve;
}

double hull_diameter(const Tetrahedralization& tri) {
  std::vector<int> hull;
  for (std::size_t f = 0; f < tri.triangles.size(); ++f) {
    if (tri.triangle_tets[f][1] >= 0) continue;
    for (int v : tri.triangles[f]) hull.push_back(v);
  }
  std::sort(hull.begin(), hull.end());
  hull.erase(std::unique(hull.begin(), hull.end()), hull.end());
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      best = std::max(best, (tri.vertices[hull[i]] - tri.vertices[hull[j]]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

std::vector<double> default_alpha_grid(const Tetrahedralization& tri, int count) {
  if (count < 2) throw InvalidArgument("default_alpha_grid: need at least two grid points");
  if (tri.edges.empty()) return {0.0, kInfiniteAlpha};
  double shortest = kInfiniteAlpha;
  for (const auto& e : tri.edges) {
    shortest = std::min(shortest, (tri.vertices[e[0]] - tri.vertices[e[1]]).norm());
  }
  const double lo = 0.5 * shortest;
  const double hi = hull_diameter(tri);
  std::vector<double> grid;
  grid.reserve(count + 1);
  const double ratio = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid.push_back(lo * std::exp(ratio * i));
  grid.back() = hi;
  grid.push_back(kInfiniteAlpha);
  return grid;
}

double optimal_alpha(const VolumeCurve& curve, double rel_tol) {
  if (curve.alphas.empty()) throw InvalidArgument("optimal_alpha: empty curve");
  if (!(rel_tol >= 0.0 && rel_tol < 1.0)) throw InvalidArgument("optimal_alpha: rel_tol must be in [0, 1)");
  const double best = *std::max_element(curve.volumes.begin(), curve.volumes.end());
  const double target = (1.0 - rel_tol) * best;
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    if (curve.volumes[i] >= target) return curve.alphas[i];
  }
  return curve.alphas.back();
}

namespace {

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void write_stl(std::ostream& out, const AlphaShape& shape, const char* name) {
  out << "solid " << name << '\n';
  if (shape.source != nullptr) {
    const auto& P = shape.source->vertices;
    for (const auto& f : shape.boundary_faces) {
      const Point3& a = P[f[0]];
      const Point3& b = P[f[1]];
      const Point3& c = P[f[2]];
      Point3 n = (b - a).cross(c - a);
      const double len = n.norm();
      if (len > 0.0) n /= len;
      out << "  facet normal " << g9(n[0]) << ' ' << g9(n[1]) << ' ' << g9(n[2]) << '\n';
      out << "    outer loop\n";
      for (const Point3* q : {&a, &b, &c}) {
        out << "      vertex " << g9((*q)[0]) << ' ' << g9((*q)[1]) << ' ' << g9((*q)[2]) << '\n';
      }
      out << "    endloop\n  endfacet\n";
    }
  }
  out << "endsolid " << name << '\n';
}

void write_off(std::ostream& out, const AlphaShape& shape) {
  std::vector<int> used;
  for (const auto& f : shape.boundary_faces) used.insert(used.end(), f.begin(), f.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  out << "OFF\n" << used.size() << ' ' << shape.boundary_faces.size() << " 0\n";
  if (shape.source == nullptr) return;
  for (int v : used) {
    const Point3& q = shape.source->vertices[v];
    out << g9(q[0]) << ' ' << g9(q[1]) << ' ' << g9(q[2]) << '\n';
  }
  for (const auto& f : shape.boundary_faces) {
    out << 3;
    for (int v : f) out << ' ' << (std::lower_bound(used.begin(), used.end(), v) - used.begin());
    out << '\n';
  }
}

}  // namespace cgs
