#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cantorsurf/mesh.hpp"
#include "cantorsurf/vec.hpp"

namespace cantorsurf {

struct Box {
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  void grow(const Vec3 &p);
  void grow(const Box &b);
  bool overlaps(const Box &b) const;
  double dist2(const Vec3 &p) const;
};

// Median-split bounding volume hierarchy over the faces of a mesh.
class Bvh {
public:
  struct Node {
    Box box;
    std::uint32_t left = 0, right = 0;  // children, or [first, first + count) of `order` for leaves
    std::uint32_t first = 0, count = 0;
  };
  explicit Bvh(const Mesh &m, int leaf_size = 4);
  const std::vector<Node> &nodes() const { return nodes_; }
  const std::vector<std::uint32_t> &order() const { return order_; }
  int depth() const { return depth_; }
  // all face pairs (i < j) with overlapping boxes
  std::vector<std::pair<std::uint32_t, std::uint32_t>> candidate_pairs() const;
  // distance from p to the mesh
  double nearest(const Vec3 &p) const;
  // exact: does the closed segment [p, q] meet a face
  bool segment_hits(const Vec3 &p, const Vec3 &q) const;

private:
  std::uint32_t build(std::uint32_t first, std::uint32_t count, int depth);
  const Mesh *mesh_;
  std::vector<Box> face_box_;
  std::vector<Vec3> centroid_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  int depth_ = 0;
  int leaf_ = 4;
};

// exact test of two closed triangles
bool triangles_intersect(const Vec3 &a0, const Vec3 &a1, const Vec3 &a2, const Vec3 &b0, const Vec3 &b1,
                         const Vec3 &b2);
bool segment_triangle_intersect(const Vec3 &p, const Vec3 &q, const Vec3 &a, const Vec3 &b, const Vec3 &c);
double point_triangle_dist(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c);

struct IntersectionReport {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // offending faces, i < j, sorted
  long candidate_pairs = 0;
  long excluded_adjacent = 0;
  long coplanar_tests = 0;
  int bvh_nodes = 0;
  int bvh_depth = 0;
  bool pass() const { return pairs.empty(); }
};

// Throws DomainError listing degenerate faces (repeated or collinear vertices).
IntersectionReport self_intersection(const Mesh &m);

// minimum distance from the points to the mesh
double min_distance(const Mesh &m, const std::vector<Vec3> &points);

} // namespace cantorsurf
