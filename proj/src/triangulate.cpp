#include "cantorsurf/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cantorsurf/error.hpp"
#include "cantorsurf/predicates.hpp"

namespace cantorsurf {

namespace {

constexpr double kPi = 3.14159265358979323846;

int orient(const Vec2 &a, const Vec2 &b, const Vec2 &c) { return orient2d(a.x, a.y, b.x, b.y, c.x, c.y); }

// closed segments [a,b] and [c,d] cross at a point other than a shared endpoint
bool segments_cross(const Vec2 &a, const Vec2 &b, const Vec2 &c, const Vec2 &d) {
  if (a == c || a == d || b == c || b == d) return false;
  int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  auto on = [](const Vec2 &p, const Vec2 &q, const Vec2 &r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  if (o1 == 0 && on(a, b, c)) return true;
  if (o2 == 0 && on(a, b, d)) return true;
  if (o3 == 0 && on(c, d, a)) return true;
  if (o4 == 0 && on(c, d, b)) return true;
  return false;
}

bool in_wedge(const Vec2 &prev, const Vec2 &c, const Vec2 &next, const Vec2 &h) {
  if (orient(prev, c, next) > 0) return orient(prev, c, h) > 0 && orient(c, next, h) > 0;
  return orient(prev, c, h) > 0 || orient(c, next, h) > 0;
}

} // namespace

std::vector<Vec2> circle_points(Vec2 center, double radius, int m, double phase) {
  std::vector<Vec2> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) {
    double th = 2 * kPi * (j + phase) / m;
    out.push_back({center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
  }
  return out;
}

double signed_area(const std::vector<Vec2> &pts, const std::vector<std::uint32_t> &loop) {
  double a = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) a += cross(pts[loop[i]], pts[loop[(i + 1) % loop.size()]]);
  return a / 2;
}

std::vector<Tri> ring_strip(const std::vector<Vec2> &pts, const std::vector<std::uint32_t> &outer,
                            const std::vector<std::uint32_t> &inner) {
  const std::size_t no = outer.size(), ni = inner.size();
  std::vector<Tri> out;
  if (no == ni) {
    for (std::size_t j = 0; j < no; ++j) {
      std::size_t k = (j + 1) % no;
      out.push_back({outer[j], outer[k], inner[j]});
      out.push_back({inner[j], outer[k], inner[k]});
    }
    return out;
  }
  // merge by angle around the inner centroid
  Vec2 c{};
  for (auto i : inner) c = c + pts[i];
  c = c * (1.0 / double(ni));
  auto ang = [&](std::uint32_t i) {
    double a = std::atan2(pts[i].y - c.y, pts[i].x - c.x);
    return a < 0 ? a + 2 * kPi : a;
  };
  auto first = [&](const std::vector<std::uint32_t> &r) {
    return std::size_t(std::min_element(r.begin(), r.end(), [&](auto a, auto b) { return ang(a) < ang(b); }) -
                       r.begin());
  };
  std::size_t o0 = first(outer), i0 = first(inner);
  std::size_t a = 0, b = 0;
  auto unwrap = [&](const std::vector<std::uint32_t> &r, std::size_t start, std::size_t step) {
    double v = ang(r[(start + step) % r.size()]);
    return step == r.size() ? v + 2 * kPi : v;
  };
  while (a < no || b < ni) {
    std::uint32_t oa = outer[(o0 + a) % no], ib = inner[(i0 + b) % ni];
    bool advance_outer = b == ni || (a < no && unwrap(outer, o0, a + 1) < unwrap(inner, i0, b + 1));
    if (advance_outer) {
      out.push_back({oa, outer[(o0 + a + 1) % no], ib});
      ++a;
    } else {
      out.push_back({ib, oa, inner[(i0 + b + 1) % ni]});
      ++b;
    }
  }
  return out;
}

std::vector<Tri> ring_fan(const std::vector<std::uint32_t> &ring, std::uint32_t center) {
  std::vector<Tri> out;
  for (std::size_t j = 0; j < ring.size(); ++j) out.push_back({ring[j], ring[(j + 1) % ring.size()], center});
  return out;
}

std::vector<Tri> triangulate_with_holes(const std::vector<Vec2> &pts, const std::vector<std::uint32_t> &outer,
                                        const std::vector<std::vector<std::uint32_t>> &holes_in) {
  std::vector<std::uint32_t> poly = outer;
  if (signed_area(pts, poly) < 0) std::reverse(poly.begin(), poly.end());
  std::vector<std::vector<std::uint32_t>> holes = holes_in;
  for (auto &h : holes)
    if (signed_area(pts, h) > 0) std::reverse(h.begin(), h.end());
  auto max_x = [&](const std::vector<std::uint32_t> &h) {
    return std::size_t(std::max_element(h.begin(), h.end(), [&](auto a, auto b) {
                         return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
                       }) -
                       h.begin());
  };
  std::sort(holes.begin(), holes.end(),
            [&](const auto &a, const auto &b) { return pts[a[max_x(a)]].x > pts[b[max_x(b)]].x; });

  for (std::size_t hi = 0; hi < holes.size(); ++hi) {
    const auto &hole = holes[hi];
    std::size_t hm = max_x(hole);
    const Vec2 H = pts[hole[hm]];
    std::vector<std::size_t> order(poly.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double da = norm(pts[poly[a]] - H), db = norm(pts[poly[b]] - H);
      return da < db || (da == db && a < b);
    });
    std::size_t found = poly.size();
    for (std::size_t pos : order) {
      const std::size_t n = poly.size();
      const Vec2 C = pts[poly[pos]];
      if (!in_wedge(pts[poly[(pos + n - 1) % n]], C, pts[poly[(pos + 1) % n]], H)) continue;
      bool blocked = false;
      for (std::size_t e = 0; e < n && !blocked; ++e)
        blocked = segments_cross(H, C, pts[poly[e]], pts[poly[(e + 1) % n]]);
      for (std::size_t hj = hi; hj < holes.size() && !blocked; ++hj)
        for (std::size_t e = 0; e < holes[hj].size() && !blocked; ++e)
          blocked = segments_cross(H, C, pts[holes[hj][e]], pts[holes[hj][(e + 1) % holes[hj].size()]]);
      if (!blocked) {
        found = pos;
        break;
      }
    }
    if (found == poly.size()) throw InternalError("no visible bridge for a hole");
    std::vector<std::uint32_t> splice;
    splice.reserve(poly.size() + hole.size() + 2);
    splice.insert(splice.end(), poly.begin(), poly.begin() + found + 1);
    for (std::size_t j = 0; j <= hole.size(); ++j) splice.push_back(hole[(hm + j) % hole.size()]);
    splice.insert(splice.end(), poly.begin() + found, poly.end());
    poly = std::move(splice);
  }

  std::vector<Tri> out;
  std::vector<std::uint32_t> v = poly;
  while (v.size() > 3) {
    const std::size_t n = v.size();
    bool clipped = false;
    for (std::size_t i = 0; i < n && !clipped; ++i) {
      std::uint32_t a = v[(i + n - 1) % n], b = v[i], c = v[(i + 1) % n];
      const Vec2 A = pts[a], B = pts[b], C = pts[c];
      if (orient(A, B, C) <= 0) continue;
      bool empty = true;
      for (std::size_t j = 0; j < n && empty; ++j) {
        const Vec2 P = pts[v[j]];
        if (P == A || P == B || P == C) continue;
        if (orient(A, B, P) >= 0 && orient(B, C, P) >= 0 && orient(C, A, P) >= 0) empty = false;
      }
      if (!empty) continue;
      out.push_back({a, b, c});
      v.erase(v.begin() + std::ptrdiff_t(i));
      clipped = true;
    }
    if (!clipped) throw InternalError("ear clipping found no ear among " + std::to_string(n) + " vertices");
  }
  if (v.size() == 3) {
    if (orient(pts[v[0]], pts[v[1]], pts[v[2]]) <= 0) throw InternalError("degenerate final ear");
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

void insert_point(std::vector<Tri> &tris, const std::vector<Vec2> &pts, std::uint32_t idx) {
  const Vec2 P = pts[idx];
  for (std::size_t t = 0; t < tris.size(); ++t) {
    Tri T = tris[t];
    int o[3];
    for (int e = 0; e < 3; ++e) o[e] = orient(pts[T[e]], pts[T[(e + 1) % 3]], P);
    if (o[0] < 0 || o[1] < 0 || o[2] < 0) continue;
    int zeros = (o[0] == 0) + (o[1] == 0) + (o[2] == 0);
    if (zeros > 1) throw DomainError("inserted point coincides with a vertex");
    if (zeros == 0) {
      tris[t] = {T[0], T[1], idx};
      tris.push_back({T[1], T[2], idx});
      tris.push_back({T[2], T[0], idx});
      return;
    }
    int e = o[0] == 0 ? 0 : (o[1] == 0 ? 1 : 2);
    std::uint32_t a = T[e], b = T[(e + 1) % 3], c = T[(e + 2) % 3];
    tris[t] = {a, idx, c};
    tris.push_back({idx, b, c});
    for (std::size_t u = 0; u < tris.size(); ++u) {
      Tri &S = tris[u];
      for (int f = 0; f < 3; ++f)
        if (S[f] == b && S[(f + 1) % 3] == a) {
          std::uint32_t d = S[(f + 2) % 3];
          S = {b, idx, d};
          tris.push_back({idx, a, d});
          return;
        }
    }
    return;  // edge on the boundary
  }
  throw DomainError("point outside the triangulation");
}

} // namespace cantorsurf
