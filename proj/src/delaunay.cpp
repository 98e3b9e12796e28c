#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <unordered_map>

#include "cgs/error.hpp"
#include "cgs/geometry.hpp"
#include "cgs/predicates.hpp"

namespace cgs {

namespace {

constexpr int kInf = -1;

struct Cell {
  std::array<int, 4> v;
  std::array<int, 4> n;
};

inline int slot_of(const std::array<int, 4>& a, int x) {
  for (int i = 0; i < 4; ++i) {
    if (a[i] == x) return i;
  }
  return -1;
}

// Interleaves the low 21 bits of three coordinates.
std::uint64_t spread_bits(std::uint64_t x) {
  x &= 0x1fffff;
  x = (x | x << 32) & 0x1f00000000ffffULL;
  x = (x | x << 16) & 0x1f0000ff0000ffULL;
  x = (x | x << 8) & 0x100f00f00f00f00fULL;
  x = (x | x << 4) & 0x10c30c30c30c30c3ULL;
  x = (x | x << 2) & 0x1249249249249249ULL;
  return x;
}

std::vector<int> morton_order(const PointCloud& pts) {
  Point3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point3 extent = (hi - lo).cwiseMax(Point3::Constant(1e-300));
  std::vector<std::uint64_t> key(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point3 u = (pts[i] - lo).cwiseQuotient(extent) * double((1 << 21) - 1);
    key[i] = spread_bits(std::uint64_t(u[0])) | spread_bits(std::uint64_t(u[1])) << 1 |
             spread_bits(std::uint64_t(u[2])) << 2;
  }
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  return order;
}

class Builder {
 public:
  explicit Builder(const PointCloud& pts) : pts_(pts), mark_() {}

  // Returns false when the points do not span 3D.
  bool run() {
    if (pts_.size() < 4) return false;
    std::vector<int> order = morton_order(pts_);
    std::array<int, 4> seed{};
    if (!pick_seed(order, seed)) return false;
    init(seed);
    for (int v : order) {
      if (v == seed[0] || v == seed[1] || v == seed[2] || v == seed[3]) continue;
      insert(v);
    }
    return true;
  }

  const std::vector<Cell>& cells() const { return cells_; }
  bool alive(int c) const { return alive_[c] != 0; }

 private:
  const Point3& p(int v) const { return pts_[v]; }

  bool collinear(int a, int b, int c) const {
    for (int k = 0; k < 3; ++k) {
      Point3 q = p(a);
      q[k] += std::max(1.0, std::abs(q[k]));
      if (predicates::orient3d(p(a), p(b), p(c), q) != 0) return false;
    }
    return true;
  }

  bool pick_seed(const std::vector<int>& order, std::array<int, 4>& seed) const {
    seed[0] = order[0];
    seed[1] = order[1];
    std::size_t k = 2;
    while (k < order.size() && collinear(seed[0], seed[1], order[k])) ++k;
    if (k == order.size()) return false;
    seed[2] = order[k];
    std::size_t j = 2;
    while (j < order.size() &&
           (j == k || predicates::orient3d(p(seed[0]), p(seed[1]), p(seed[2]), p(order[j])) == 0)) {
      ++j;
    }
    if (j == order.size()) return false;
    seed[3] = order[j];
    if (predicates::orient3d(p(seed[0]), p(seed[1]), p(seed[2]), p(seed[3])) < 0) {
      std::swap(seed[2], seed[3]);
    }
    return true;
  }

  int new_cell(const std::array<int, 4>& v) {
    int c;
    if (!free_.empty()) {
      c = free_.back();
      free_.pop_back();
      cells_[c].v = v;
      cells_[c].n = {-1, -1, -1, -1};
      alive_[c] = 1;
    } else {
      c = static_cast<int>(cells_.size());
      cells_.push_back(Cell{v, {-1, -1, -1, -1}});
      alive_.push_back(1);
      mark_.push_back(0);
    }
    return c;
  }

  void init(const std::array<int, 4>& s) {
    std::vector<int> created;
    created.push_back(new_cell(s));
    for (int i = 0; i < 4; ++i) {
      std::array<int, 4> v = s;
      v[i] = kInf;
      // Replacing a vertex by a point on the far side of its face flips the
      // orientation, so swap two finite vertices to restore it.
      const int a = (i + 1) % 4, b = (i + 2) % 4;
      std::swap(v[a], v[b]);
      created.push_back(new_cell(v));
    }
    link(created);
    last_ = created[0];
  }

  // Connects the faces shared among `group`.
  void link(const std::vector<int>& group) {
    std::map<std::array<int, 3>, std::pair<int, int>> open;
    for (int c : group) {
      for (int i = 0; i < 4; ++i) {
        std::array<int, 3> f{};
        int k = 0;
        for (int j = 0; j < 4; ++j) {
          if (j != i) f[k++] = cells_[c].v[j];
        }
        std::sort(f.begin(), f.end());
        auto it = open.find(f);
        if (it == open.end()) {
          open.emplace(f, std::make_pair(c, i));
        } else {
          cells_[c].n[i] = it->second.first;
          cells_[it->second.first].n[it->second.second] = c;
          open.erase(it);
        }
      }
    }
  }

  std::uint32_t next_random() {
    rng_ ^= rng_ << 13;
    rng_ ^= rng_ >> 17;
    rng_ ^= rng_ << 5;
    return rng_;
  }

  int finite_start(int c) const {
    const int inf = slot_of(cells_[c].v, kInf);
    return inf < 0 ? c : cells_[c].n[inf];
  }

  // Visibility walk; returns a cell whose closure contains q, or an infinite
  // cell whose hull face q lies strictly beyond.
  int locate(int q) {
    int c = finite_start(alive(last_) ? last_ : first_alive());
    int prev = -1;
    for (;;) {
      const int start = static_cast<int>(next_random() & 3);
      bool moved = false;
      for (int k = 0; k < 4; ++k) {
        const int i = (start + k) & 3;
        const int nb = cells_[c].n[i];
        if (nb == prev) continue;
        std::array<const Point3*, 4> t{};
        for (int j = 0; j < 4; ++j) t[j] = (j == i) ? &p(q) : &p(cells_[c].v[j]);
        if (predicates::orient3d(*t[0], *t[1], *t[2], *t[3]) < 0) {
          prev = c;
          c = nb;
          moved = true;
          break;
        }
      }
      if (!moved) return c;
      if (slot_of(cells_[c].v, kInf) >= 0) return c;
    }
  }

  int first_alive() const {
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (alive_[c]) return static_cast<int>(c);
    }
    return 0;
  }

  bool conflict(int c, int q) const {
    const auto& v = cells_[c].v;
    const int inf = slot_of(v, kInf);
    if (inf < 0) {
      return predicates::insphere_perturbed({&p(v[0]), &p(v[1]), &p(v[2]), &p(v[3]), &p(q)},
                                            {v[0], v[1], v[2], v[3], q}) > 0;
    }
    std::array<const Point3*, 4> t{};
    for (int j = 0; j < 4; ++j) t[j] = (j == inf) ? &p(q) : &p(v[j]);
    const int o = predicates::orient3d(*t[0], *t[1], *t[2], *t[3]);
    if (o != 0) return o > 0;
    // On the plane of a hull face: decided by the finite cell behind it.
    return conflict(cells_[c].n[inf], q);
  }

  void insert(int q) {
    const int start = locate(q);
    stamp_ += 2;
    const std::uint32_t in = stamp_, out = stamp_ + 1;

    cavity_.clear();
    boundary_.clear();
    stack_.clear();
    cavity_.push_back(start);
    stack_.push_back(start);
    mark_[start] = in;
    while (!stack_.empty()) {
      const int c = stack_.back();
      stack_.pop_back();
      for (int i = 0; i < 4; ++i) {
        const int nb = cells_[c].n[i];
        if (mark_[nb] == in) continue;
        if (mark_[nb] != out) {
          if (conflict(nb, q)) {
            mark_[nb] = in;
            cavity_.push_back(nb);
            stack_.push_back(nb);
            continue;
          }
          mark_[nb] = out;
        }
        boundary_.emplace_back(c, i);
      }
    }

    created_.clear();
    for (const auto& [c, i] : boundary_) {
      std::array<int, 4> v = cells_[c].v;
      v[i] = q;
      const int nb = cells_[c].n[i];
      const int nc = new_cell(v);
      cells_[nc].n[i] = nb;
      const int back = slot_of(cells_[nb].n, c);
      cells_[nb].n[back] = nc;
      created_.push_back(nc);
    }
    link_around(q);
    for (int c : cavity_) {
      alive_[c] = 0;
      free_.push_back(c);
    }
    last_ = created_.front();
  }

  // New cells share the faces through q; match them on the opposite edge.
  void link_around(int q) {
    edge_map_.clear();
    for (int c : created_) {
      const auto& v = cells_[c].v;
      const int qi = slot_of(v, q);
      for (int j = 0; j < 4; ++j) {
        if (j == qi) continue;
        int a = -2, b = -2;
        for (int k = 0; k < 4; ++k) {
          if (k == qi || k == j) continue;
          (a == -2 ? a : b) = v[k];
        }
        if (a > b) std::swap(a, b);
        const std::uint64_t key = (std::uint64_t(std::uint32_t(a + 1)) << 32) | std::uint32_t(b + 1);
        auto it = edge_map_.find(key);
        if (it == edge_map_.end()) {
          edge_map_.emplace(key, std::make_pair(c, j));
        } else {
          cells_[c].n[j] = it->second.first;
          cells_[it->second.first].n[it->second.second] = c;
          edge_map_.erase(it);
        }
      }
    }
  }

  const PointCloud& pts_;
  std::vector<Cell> cells_;
  std::vector<char> alive_;
  std::vector<std::uint32_t> mark_;
  std::vector<int> free_;
  std::vector<int> cavity_, stack_, created_;
  std::vector<std::pair<int, int>> boundary_;
  std::unordered_map<std::uint64_t, std::pair<int, int>> edge_map_;
  std::uint32_t stamp_ = 0;
  std::uint32_t rng_ = 2463534242u;
  int last_ = 0;
};

double circumradius(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const Point3 u = b - a, v = c - a, w = d - a;
  const double den = 2.0 * u.dot(v.cross(w));
  const Point3 num = u.squaredNorm() * v.cross(w) + v.squaredNorm() * w.cross(u) + w.squaredNorm() * u.cross(v);
  return (num / den).norm();
}

// Circumcenter of a triangle in its own plane.
Point3 triangle_circumcenter(const Point3& a, const Point3& b, const Point3& c) {
  const Point3 u = b - a, v = c - a;
  const Point3 n = u.cross(v);
  const Point3 off = (u.squaredNorm() * v.cross(n) + v.squaredNorm() * n.cross(u)) / (2.0 * n.squaredNorm());
  return a + off;
}

double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  return std::abs((a - d).dot((b - d).cross(c - d))) / 6.0;
}

// Face of tetrahedron t opposite slot i, ordered with its normal pointing outward.
std::array<int, 3> outward_face(const std::array<int, 4>& v, int i) {
  std::array<int, 3> f{};
  int k = 0;
  for (int j = 0; j < 4; ++j) {
    if (j != i) f[k++] = v[j];
  }
  if (i == 0 || i == 2) std::swap(f[0], f[1]);
  return f;
}

void build_filtration(Tetrahedralization& tri) {
  const auto& P = tri.vertices;
  const std::size_t nt = tri.tetrahedra.size();
  tri.tet_volume.resize(nt);
  tri.tet_radius.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& v = tri.tetrahedra[t];
    tri.tet_volume[t] = tet_volume(P[v[0]], P[v[1]], P[v[2]], P[v[3]]);
    tri.tet_radius[t] = circumradius(P[v[0]], P[v[1]], P[v[2]], P[v[3]]);
  }

  // Triangles: each shared face once, from its lower-indexed tetrahedron.
  std::vector<int> opposite;  // vertex opposite the triangle in each incident tet
  for (std::size_t t = 0; t < nt; ++t) {
    for (int i = 0; i < 4; ++i) {
      const int nb = tri.neighbors[t][i];
      if (nb != -1 && nb < static_cast<int>(t)) continue;
      tri.triangles.push_back(outward_face(tri.tetrahedra[t], i));
      tri.triangle_tets.push_back({static_cast<int>(t), nb});
      opposite.push_back(tri.tetrahedra[t][i]);
      if (nb == -1) {
        opposite.push_back(-1);
      } else {
        const int back = slot_of(tri.neighbors[nb], static_cast<int>(t));
        opposite.push_back(tri.tetrahedra[nb][back]);
      }
    }
  }

  const std::size_t nf = tri.triangles.size();
  tri.triangle_area.resize(nf);
  tri.triangle_radius.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& v = tri.triangles[f];
    const Point3& a = P[v[0]];
    const Point3& b = P[v[1]];
    const Point3& c = P[v[2]];
    tri.triangle_area[f] = 0.5 * (b - a).cross(c - a).norm();
    const Point3 center = triangle_circumcenter(a, b, c);
    const double r2 = (a - center).squaredNorm();
    bool attached = false;
    double min_coface = kInfiniteAlpha;
    for (int s = 0; s < 2; ++s) {
      const int t = tri.triangle_tets[f][s];
      if (t < 0) continue;
      min_coface = std::min(min_coface, tri.tet_radius[t]);
      if ((P[opposite[2 * f + s]] - center).squaredNorm() < r2) attached = true;
    }
    tri.triangle_radius[f] = attached ? min_coface : std::sqrt(r2);
  }

  // Edges, discovered through triangles.
  auto key_of = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
  };
  std::vector<std::uint64_t> keys;
  keys.reserve(3 * nf);
  for (const auto& v : tri.triangles) {
    keys.push_back(key_of(v[0], v[1]));
    keys.push_back(key_of(v[1], v[2]));
    keys.push_back(key_of(v[0], v[2]));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  const std::size_t ne = keys.size();
  tri.edges.resize(ne);
  std::vector<char> attached(ne, 0);
  std::vector<double> min_coface(ne, kInfiniteAlpha);
  std::vector<Point3> mid(ne);
  std::vector<double> half2(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const int a = static_cast<int>(keys[e] >> 32), b = static_cast<int>(keys[e] & 0xffffffffu);
    tri.edges[e] = {a, b};
    mid[e] = 0.5 * (P[a] + P[b]);
    half2[e] = 0.25 * (P[a] - P[b]).squaredNorm();
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& v = tri.triangles[f];
    for (int k = 0; k < 3; ++k) {
      const int a = v[k], b = v[(k + 1) % 3], w = v[(k + 2) % 3];
      const std::size_t e = std::lower_bound(keys.begin(), keys.end(), key_of(a, b)) - keys.begin();
      min_coface[e] = std::min(min_coface[e], tri.triangle_radius[f]);
      if ((P[w] - mid[e]).squaredNorm() < half2[e]) attached[e] = 1;
    }
  }
  tri.edge_radius.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    tri.edge_radius[e] = attached[e] ? min_coface[e] : std::sqrt(half2[e]);
  }
}

}  // namespace

Tetrahedralization delaunay3(std::span<const Point3> points) {
  Tetrahedralization tri;
  tri.input_count = points.size();
  for (const auto& q : points) {
    if (!q.allFinite()) throw InvalidArgument("delaunay3: non-finite point coordinate");
  }

  tri.vertices.assign(points.begin(), points.end());
  auto lex = [](const Point3& a, const Point3& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
  };
  std::sort(tri.vertices.begin(), tri.vertices.end(), lex);
  tri.vertices.erase(std::unique(tri.vertices.begin(), tri.vertices.end()), tri.vertices.end());
  tri.duplicates_merged = points.size() - tri.vertices.size();
  if (tri.vertices.size() > static_cast<std::size_t>(std::numeric_limits<int>::max() / 2)) {
    throw InvalidArgument("delaunay3: too many points");
  }

  Builder builder(tri.vertices);
  if (!builder.run()) {
    tri.degenerate = true;
    return tri;
  }

  const auto& cells = builder.cells();
  std::vector<int> remap(cells.size(), -1);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!builder.alive(static_cast<int>(c)) || slot_of(cells[c].v, kInf) >= 0) continue;
    remap[c] = static_cast<int>(tri.tetrahedra.size());
    tri.tetrahedra.push_back(cells[c].v);
  }
  tri.neighbors.reserve(tri.tetrahedra.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (remap[c] < 0) continue;
    std::array<int, 4> nb{};
    for (int i = 0; i < 4; ++i) nb[i] = remap[cells[c].n[i]];
    tri.neighbors.push_back(nb);
  }
  build_filtration(tri);
  return tri;
}

}  // namespace cgs
