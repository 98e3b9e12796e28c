#include "cgs/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cgs::predicates {

namespace {

constexpr double kEpsilon = 0x1p-53;
constexpr double kOrientBound = (7.0 + 56.0 * kEpsilon) * kEpsilon;
constexpr double kInsphereBound = (16.0 + 224.0 * kEpsilon) * kEpsilon;

thread_local FilterStats tl_stats;

// Nonoverlapping expansion, components in increasing magnitude, zeros removed.
// The empty expansion is zero.
using Expansion = std::vector<double>;

inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  y = b - bv;
}

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

Expansion from_diff(double a, double b) {
  const double x = a - b;
  const double bv = a - x;
  const double av = x + bv;
  const double y = (a - av) + (bv - b);
  Expansion e;
  if (y != 0.0) e.push_back(y);
  if (x != 0.0) e.push_back(x);
  return e;
}

inline bool smaller_magnitude(double f, double e) { return (f > e) == (f > -e); }

Expansion sum(const Expansion& e, const Expansion& f) {
  if (e.empty()) return f;
  if (f.empty()) return e;
  Expansion h;
  h.reserve(e.size() + f.size());
  std::size_t ei = 0, fi = 0;
  double q;
  if (smaller_magnitude(f[0], e[0])) {
    q = e[ei++];
  } else {
    q = f[fi++];
  }
  double qnew, hh;
  if (ei < e.size() && fi < f.size()) {
    if (smaller_magnitude(f[fi], e[ei])) {
      fast_two_sum(e[ei++], q, qnew, hh);
    } else {
      fast_two_sum(f[fi++], q, qnew, hh);
    }
    q = qnew;
    if (hh != 0.0) h.push_back(hh);
    while (ei < e.size() && fi < f.size()) {
      if (smaller_magnitude(f[fi], e[ei])) {
        two_sum(q, e[ei++], qnew, hh);
      } else {
        two_sum(q, f[fi++], qnew, hh);
      }
      q = qnew;
      if (hh != 0.0) h.push_back(hh);
    }
  }
  while (ei < e.size()) {
    two_sum(q, e[ei++], qnew, hh);
    q = qnew;
    if (hh != 0.0) h.push_back(hh);
  }
  while (fi < f.size()) {
    two_sum(q, f[fi++], qnew, hh);
    q = qnew;
    if (hh != 0.0) h.push_back(hh);
  }
  if (q != 0.0) h.push_back(q);
  return h;
}

Expansion negate(Expansion e) {
  for (double& c : e) c = -c;
  return e;
}

Expansion scale(const Expansion& e, double b) {
  Expansion h;
  if (e.empty() || b == 0.0) return h;
  h.reserve(2 * e.size());
  double q, hh;
  two_product(e[0], b, q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (std::size_t i = 1; i < e.size(); ++i) {
    double p1, p0, s;
    two_product(e[i], b, p1, p0);
    two_sum(q, p0, s, hh);
    if (hh != 0.0) h.push_back(hh);
    fast_two_sum(p1, s, q, hh);
    if (hh != 0.0) h.push_back(hh);
  }
  if (q != 0.0) h.push_back(q);
  return h;
}

Expansion mul(const Expansion& e, const Expansion& f) {
  Expansion acc;
  for (double c : f) acc = sum(acc, scale(e, c));
  return acc;
}

inline int sign_of(const Expansion& e) {
  if (e.empty()) return 0;
  return e.back() > 0.0 ? 1 : -1;
}

// 3x3 determinant by cofactor expansion along the first row.
Expansion det3(const Expansion m[3][3]) {
  const Expansion c0 = sum(mul(m[1][1], m[2][2]), negate(mul(m[1][2], m[2][1])));
  const Expansion c1 = sum(mul(m[1][0], m[2][2]), negate(mul(m[1][2], m[2][0])));
  const Expansion c2 = sum(mul(m[1][0], m[2][1]), negate(mul(m[1][1], m[2][0])));
  return sum(sum(mul(m[0][0], c0), negate(mul(m[0][1], c1))), mul(m[0][2], c2));
}

inline int sign_of_double(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

int orient3d_exact(const Point& a, const Point& b, const Point& c, const Point& d) {
  Expansion m[3][3];
  const Point* rows[3] = {&a, &b, &c};
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) m[r][k] = from_diff((*rows[r])[k], d[k]);
  }
  return sign_of(det3(m));
}

int insphere_exact(const Point& a, const Point& b, const Point& c, const Point& d, const Point& e) {
  Expansion m[4][4];
  const Point* rows[4] = {&a, &b, &c, &d};
  for (int r = 0; r < 4; ++r) {
    Expansion lift;
    for (int k = 0; k < 3; ++k) {
      m[r][k] = from_diff((*rows[r])[k], e[k]);
      lift = sum(lift, mul(m[r][k], m[r][k]));
    }
    m[r][3] = std::move(lift);
  }
  // Laplace expansion along the lifted column.
  Expansion det;
  for (int r = 0; r < 4; ++r) {
    Expansion minor[3][3];
    int row = 0;
    for (int s = 0; s < 4; ++s) {
      if (s == r) continue;
      for (int k = 0; k < 3; ++k) minor[row][k] = m[s][k];
      ++row;
    }
    Expansion term = mul(m[r][3], det3(minor));
    det = ((r + 3) % 2 == 0) ? sum(det, term) : sum(det, negate(term));
  }
  return sign_of(det);
}

int orient3d(const Point& a, const Point& b, const Point& c, const Point& d) {
  ++tl_stats.orient_calls;
  const double adx = a[0] - d[0], bdx = b[0] - d[0], cdx = c[0] - d[0];
  const double ady = a[1] - d[1], bdy = b[1] - d[1], cdy = c[1] - d[1];
  const double adz = a[2] - d[2], bdz = b[2] - d[2], cdz = c[2] - d[2];

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;

  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  const double bound = kOrientBound * permanent;
  if (det > bound || -det > bound) return sign_of_double(det);
  ++tl_stats.orient_exact;
  return orient3d_exact(a, b, c, d);
}

int insphere(const Point& a, const Point& b, const Point& c, const Point& d, const Point& e) {
  ++tl_stats.insphere_calls;
  const double aex = a[0] - e[0], bex = b[0] - e[0], cex = c[0] - e[0], dex = d[0] - e[0];
  const double aey = a[1] - e[1], bey = b[1] - e[1], cey = c[1] - e[1], dey = d[1] - e[1];
  const double aez = a[2] - e[2], bez = b[2] - e[2], cez = c[2] - e[2], dez = d[2] - e[2];

  const double aexbey = aex * bey, bexaey = bex * aey, ab = aexbey - bexaey;
  const double bexcey = bex * cey, cexbey = cex * bey, bc = bexcey - cexbey;
  const double cexdey = cex * dey, dexcey = dex * cey, cd = cexdey - dexcey;
  const double dexaey = dex * aey, aexdey = aex * dey, da = dexaey - aexdey;
  const double aexcey = aex * cey, cexaey = cex * aey, ac = aexcey - cexaey;
  const double bexdey = bex * dey, dexbey = dex * bey, bd = bexdey - dexbey;

  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;

  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;

  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

  const double aezp = std::abs(aez), bezp = std::abs(bez), cezp = std::abs(cez), dezp = std::abs(dez);
  const double aexbeyp = std::abs(aexbey), bexaeyp = std::abs(bexaey);
  const double bexceyp = std::abs(bexcey), cexbeyp = std::abs(cexbey);
  const double cexdeyp = std::abs(cexdey), dexceyp = std::abs(dexcey);
  const double dexaeyp = std::abs(dexaey), aexdeyp = std::abs(aexdey);
  const double aexceyp = std::abs(aexcey), cexaeyp = std::abs(cexaey);
  const double bexdeyp = std::abs(bexdey), dexbeyp = std::abs(dexbey);
  const double permanent =
      ((cexdeyp + dexceyp) * bezp + (dexbeyp + bexdeyp) * cezp + (bexceyp + cexbeyp) * dezp) * alift +
      ((dexaeyp + aexdeyp) * cezp + (aexceyp + cexaeyp) * dezp + (cexdeyp + dexceyp) * aezp) * blift +
      ((aexbeyp + bexaeyp) * dezp + (bexdeyp + dexbeyp) * aezp + (dexaeyp + aexdeyp) * bezp) * clift +
      ((bexceyp + cexbeyp) * aezp + (cexaeyp + aexceyp) * bezp + (aexbeyp + bexaeyp) * cezp) * dlift;
  const double bound = kInsphereBound * permanent;
  if (det > bound || -det > bound) return sign_of_double(det);
  ++tl_stats.insphere_exact;
  return insphere_exact(a, b, c, d, e);
}

int insphere_perturbed(const std::array<const Point*, 5>& pts, const std::array<std::int64_t, 5>& ids) {
  const int s = insphere(*pts[0], *pts[1], *pts[2], *pts[3], *pts[4]);
  if (s != 0) return s;

  // The perturbed determinant is D + sum_r delta_r * C_r, where C_r is the
  // cofactor of row r in the lifted column: (-1)^(r+3) * orient3d(other rows).
  std::array<int, 5> order = {0, 1, 2, 3, 4};
  std::sort(order.begin(), order.end(), [&](int l, int r) { return ids[l] > ids[r]; });
  for (int r : order) {
    std::array<const Point*, 4> rest{};
    int k = 0;
    for (int q = 0; q < 5; ++q) {
      if (q != r) rest[k++] = pts[q];
    }
    const int o = orient3d(*rest[0], *rest[1], *rest[2], *rest[3]);
    if (o != 0) return ((r + 3) % 2 == 0) ? o : -o;
  }
  return 0;
}

FilterStats filter_stats() { return tl_stats; }
void reset_filter_stats() { tl_stats = FilterStats{}; }

}  // namespace cgs::predicates
