#include "cantorsurf/intersect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "cantorsurf/error.hpp"
#include "cantorsurf/parallel.hpp"
#include "cantorsurf/predicates.hpp"

namespace cantorsurf {

namespace {

struct P2 {
  double x, y;
};

P2 drop(const Vec3 &p, int axis) {
  if (axis == 0) return {p.y, p.z};
  if (axis == 1) return {p.z, p.x};
  return {p.x, p.y};
}

int o2(const P2 &a, const P2 &b, const P2 &c) { return orient2d(a.x, a.y, b.x, b.y, c.x, c.y); }

// axis whose projection keeps the triangle non-degenerate, -1 if it is collinear
int projection_axis(const Vec3 &a, const Vec3 &b, const Vec3 &c) {
  Vec3 n = cross(b - a, c - a);
  int order[3] = {0, 1, 2};
  double m[3] = {std::fabs(n.x), std::fabs(n.y), std::fabs(n.z)};
  std::sort(order, order + 3, [&](int i, int j) { return m[i] > m[j]; });
  for (int ax : order)
    if (o2(drop(a, ax), drop(b, ax), drop(c, ax)) != 0) return ax;
  return -1;
}

bool on_segment(const P2 &p, const P2 &q, const P2 &r) {
  return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
         r.y <= std::max(p.y, q.y);
}

bool segments_meet(const P2 &a, const P2 &b, const P2 &c, const P2 &d) {
  int d1 = o2(a, b, c), d2 = o2(a, b, d), d3 = o2(c, d, a), d4 = o2(c, d, b);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, b, c)) || (d2 == 0 && on_segment(a, b, d)) ||
         (d3 == 0 && on_segment(c, d, a)) || (d4 == 0 && on_segment(c, d, b));
}

bool in_triangle(const P2 &p, const P2 &a, const P2 &b, const P2 &c) {
  int s1 = o2(a, b, p), s2 = o2(b, c, p), s3 = o2(c, a, p);
  return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
}

bool coplanar_seg_tri(const Vec3 &p, const Vec3 &q, const Vec3 &a, const Vec3 &b, const Vec3 &c, int ax) {
  P2 P = drop(p, ax), Q = drop(q, ax), A = drop(a, ax), B = drop(b, ax), C = drop(c, ax);
  if (in_triangle(P, A, B, C) || in_triangle(Q, A, B, C)) return true;
  return segments_meet(P, Q, A, B) || segments_meet(P, Q, B, C) || segments_meet(P, Q, C, A);
}

bool seg_tri(const Vec3 &p, const Vec3 &q, const Vec3 &a, const Vec3 &b, const Vec3 &c, int ax) {
  int sp = orient3d(a, b, c, p), sq = orient3d(a, b, c, q);
  if (sp == sq && sp != 0) return false;
  if (sp == 0 && sq == 0) return coplanar_seg_tri(p, q, a, b, c, ax);
  int s1 = orient3d(p, q, a, b), s2 = orient3d(p, q, b, c), s3 = orient3d(p, q, c, a);
  return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
}

bool coplanar_tri_tri(const Vec3 *A, const Vec3 *B, int ax) {
  P2 a[3], b[3];
  for (int i = 0; i < 3; ++i) a[i] = drop(A[i], ax), b[i] = drop(B[i], ax);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segments_meet(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3])) return true;
  return in_triangle(a[0], b[0], b[1], b[2]) || in_triangle(b[0], a[0], a[1], a[2]);
}

} // namespace

unsigned worker_count() {
  if (const char *e = std::getenv("CANTORSURF_THREADS")) {
    int v = std::atoi(e);
    if (v > 0) return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void Box::grow(const Vec3 &p) {
  lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
  hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
}

void Box::grow(const Box &b) {
  grow(b.lo);
  grow(b.hi);
}

bool Box::overlaps(const Box &b) const {
  return lo.x <= b.hi.x && b.lo.x <= hi.x && lo.y <= b.hi.y && b.lo.y <= hi.y && lo.z <= b.hi.z && b.lo.z <= hi.z;
}

double Box::dist2(const Vec3 &p) const {
  auto d = [](double v, double l, double h) { return v < l ? l - v : (v > h ? v - h : 0.0); };
  double dx = d(p.x, lo.x, hi.x), dy = d(p.y, lo.y, hi.y), dz = d(p.z, lo.z, hi.z);
  return dx * dx + dy * dy + dz * dz;
}

Bvh::Bvh(const Mesh &m, int leaf_size) : mesh_(&m), leaf_(leaf_size) {
  const std::size_t n = m.faces.size();
  face_box_.resize(n);
  centroid_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Tri &f = m.faces[i];
    for (auto v : f) face_box_[i].grow(m.vertices[v]);
    centroid_[i] = (m.vertices[f[0]] + m.vertices[f[1]] + m.vertices[f[2]]) / 3.0;
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * n / std::max(1, leaf_) + 2);
  if (n) build(0, std::uint32_t(n), 1);
}

std::uint32_t Bvh::build(std::uint32_t first, std::uint32_t count, int depth) {
  depth_ = std::max(depth_, depth);
  std::uint32_t id = std::uint32_t(nodes_.size());
  nodes_.push_back({});
  Box b, cb;
  for (std::uint32_t i = first; i < first + count; ++i) {
    b.grow(face_box_[order_[i]]);
    cb.grow(centroid_[order_[i]]);
  }
  nodes_[id].box = b;
  if (count <= std::uint32_t(leaf_)) {
    nodes_[id].first = first;
    nodes_[id].count = count;
    return id;
  }
  Vec3 ext = cb.hi - cb.lo;
  int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
  std::uint32_t mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](std::uint32_t a, std::uint32_t c) {
                     double va = centroid_[a][axis], vc = centroid_[c][axis];
                     return va < vc || (va == vc && a < c);
                   });
  std::uint32_t l = build(first, mid - first, depth + 1);
  std::uint32_t r = build(mid, first + count - mid, depth + 1);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Bvh::candidate_pairs() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  if (nodes_.empty()) return out;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    const Node &A = nodes_[a], &B = nodes_[b];
    if (!A.box.overlaps(B.box)) continue;
    bool la = A.count > 0, lb = B.count > 0;
    if (la && lb) {
      for (std::uint32_t i = A.first; i < A.first + A.count; ++i)
        for (std::uint32_t j = (a == b ? i + 1 : B.first); j < B.first + B.count; ++j) {
          std::uint32_t f = order_[i], g = order_[j];
          if (face_box_[f].overlaps(face_box_[g])) out.emplace_back(std::min(f, g), std::max(f, g));
        }
    } else if (a == b) {
      stack.push_back({A.left, A.left});
      stack.push_back({A.right, A.right});
      stack.push_back({A.left, A.right});
    } else if (lb || (!la && norm2(A.box.hi - A.box.lo) >= norm2(B.box.hi - B.box.lo))) {
      stack.push_back({A.left, b});
      stack.push_back({A.right, b});
    } else {
      stack.push_back({a, B.left});
      stack.push_back({a, B.right});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double Bvh::nearest(const Vec3 &p) const {
  double best2 = 1e300;
  if (nodes_.empty()) return std::sqrt(best2);
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    std::uint32_t id = stack.back();
    stack.pop_back();
    const Node &n = nodes_[id];
    if (n.box.dist2(p) >= best2) continue;
    if (n.count) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        const Tri &f = mesh_->faces[order_[i]];
        double d = point_triangle_dist(p, mesh_->vertices[f[0]], mesh_->vertices[f[1]], mesh_->vertices[f[2]]);
        best2 = std::min(best2, d * d);
      }
    } else {
      double dl = nodes_[n.left].box.dist2(p), dr = nodes_[n.right].box.dist2(p);
      if (dl < dr) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      } else {
        stack.push_back(n.left);
        stack.push_back(n.right);
      }
    }
  }
  return std::sqrt(best2);
}

bool Bvh::segment_hits(const Vec3 &p, const Vec3 &q) const {
  if (nodes_.empty()) return false;
  Box sb;
  sb.grow(p);
  sb.grow(q);
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node &n = nodes_[stack.back()];
    stack.pop_back();
    if (!n.box.overlaps(sb)) continue;
    if (n.count) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        const Tri &f = mesh_->faces[order_[i]];
        if (face_box_[order_[i]].overlaps(sb) &&
            segment_triangle_intersect(p, q, mesh_->vertices[f[0]], mesh_->vertices[f[1]], mesh_->vertices[f[2]]))
          return true;
      }
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  return false;
}

bool segment_triangle_intersect(const Vec3 &p, const Vec3 &q, const Vec3 &a, const Vec3 &b, const Vec3 &c) {
  int ax = projection_axis(a, b, c);
  if (ax < 0) throw DomainError("degenerate triangle");
  return seg_tri(p, q, a, b, c, ax);
}

bool triangles_intersect(const Vec3 &a0, const Vec3 &a1, const Vec3 &a2, const Vec3 &b0, const Vec3 &b1,
                         const Vec3 &b2) {
  const Vec3 A[3] = {a0, a1, a2}, B[3] = {b0, b1, b2};
  int ob[3], oa[3];
  for (int i = 0; i < 3; ++i) ob[i] = orient3d(a0, a1, a2, B[i]);
  if ((ob[0] > 0 && ob[1] > 0 && ob[2] > 0) || (ob[0] < 0 && ob[1] < 0 && ob[2] < 0)) return false;
  const int axA = projection_axis(a0, a1, a2), axB = projection_axis(b0, b1, b2);
  if (ob[0] == 0 && ob[1] == 0 && ob[2] == 0) return coplanar_tri_tri(A, B, axA);
  for (int i = 0; i < 3; ++i) oa[i] = orient3d(b0, b1, b2, A[i]);
  if ((oa[0] > 0 && oa[1] > 0 && oa[2] > 0) || (oa[0] < 0 && oa[1] < 0 && oa[2] < 0)) return false;
  for (int i = 0; i < 3; ++i) {
    if (seg_tri(A[i], A[(i + 1) % 3], b0, b1, b2, axB)) return true;
    if (seg_tri(B[i], B[(i + 1) % 3], a0, a1, a2, axA)) return true;
  }
  return false;
}

double point_triangle_dist(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c) {
  // closest point by Voronoi regions
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return norm(ap);
  Vec3 bp = p - b;
  double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return norm(bp);
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return norm(p - (a + (d1 / (d1 - d3)) * ab));
  Vec3 cp = p - c;
  double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return norm(cp);
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return norm(p - (a + (d2 / (d2 - d6)) * ac));
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return norm(p - (b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b)));
  double den = 1 / (va + vb + vc);
  return norm(p - (a + ab * (vb * den) + ac * (vc * den)));
}

IntersectionReport self_intersection(const Mesh &m) {
  std::string bad;
  int nbad = 0;
  for (std::size_t i = 0; i < m.faces.size(); ++i) {
    const Tri &f = m.faces[i];
    bool deg = f[0] == f[1] || f[1] == f[2] || f[0] == f[2] ||
               projection_axis(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]) < 0;
    if (deg && nbad++ < 20) bad += " " + std::to_string(i);
  }
  if (nbad) throw DomainError(std::to_string(nbad) + " degenerate faces:" + bad);

  Bvh bvh(m);
  IntersectionReport r;
  r.bvh_nodes = int(bvh.nodes().size());
  r.bvh_depth = bvh.depth();
  auto cand = bvh.candidate_pairs();
  r.candidate_pairs = long(cand.size());
  unsigned w = worker_count();
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> found(w);
  std::vector<long> excluded(w, 0);
  parallel_for(cand.size(), [&](std::size_t lo, std::size_t hi, unsigned t) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Tri &f = m.faces[cand[k].first], &g = m.faces[cand[k].second];
      bool share = false;
      for (auto a : f)
        for (auto b : g) share = share || a == b;
      if (share) {
        ++excluded[t];
        continue;
      }
      if (triangles_intersect(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]], m.vertices[g[0]],
                              m.vertices[g[1]], m.vertices[g[2]]))
        found[t].push_back(cand[k]);
    }
  });
  for (unsigned t = 0; t < w; ++t) {
    r.pairs.insert(r.pairs.end(), found[t].begin(), found[t].end());
    r.excluded_adjacent += excluded[t];
  }
  std::sort(r.pairs.begin(), r.pairs.end());
  return r;
}

double min_distance(const Mesh &m, const std::vector<Vec3> &points) {
  Bvh bvh(m);
  unsigned w = worker_count();
  std::vector<double> best(w, 1e300);
  parallel_for(points.size(), [&](std::size_t lo, std::size_t hi, unsigned t) {
    for (std::size_t i = lo; i < hi; ++i) best[t] = std::min(best[t], bvh.nearest(points[i]));
  });
  return *std::min_element(best.begin(), best.end());
}

} // namespace cantorsurf
