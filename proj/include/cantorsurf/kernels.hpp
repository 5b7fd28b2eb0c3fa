#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cantorsurf/vec.hpp"

namespace cantorsurf {

// structure-of-arrays point buffer consumed by the kernels
struct PointsSoA {
  std::vector<double> x, y, z;
  PointsSoA() = default;
  explicit PointsSoA(const std::vector<Vec3> &pts) {
    reserve(pts.size());
    for (const auto &p : pts) push(p);
  }
  void reserve(std::size_t n) { x.reserve(n); y.reserve(n); z.reserve(n); }
  void push(const Vec3 &p) { x.push_back(p.x); y.push_back(p.y); z.push_back(p.z); }
  std::size_t size() const { return x.size(); }
  Vec3 operator[](std::size_t i) const { return {x[i], y[i], z[i]}; }
};

struct SegmentsSoA {
  PointsSoA a, b;
  void push(const Vec3 &p, const Vec3 &q) { a.push(p); b.push(q); }
  std::size_t size() const { return a.size(); }
};

struct KernelTable {
  const char *name;
  // out[i] = min_j |q_i - p_j|^2
  void (*nearest_dist2)(const double *qx, const double *qy, const double *qz, std::size_t nq,
                        const double *px, const double *py, const double *pz, std::size_t np, double *out);
  // out[i] = min_j dist(q_i, [a_j, b_j])^2
  void (*segment_dist2)(const double *qx, const double *qy, const double *qz, std::size_t nq,
                        const double *ax, const double *ay, const double *az,
                        const double *bx, const double *by, const double *bz, std::size_t ns, double *out);
  // midpoint-rule Gauss double sum over the edges of two closed polylines, divided by 4 pi
  double (*gauss_sum)(const double *ax, const double *ay, const double *az, std::size_t na,
                      const double *bx, const double *by, const double *bz, std::size_t nb);
};

const KernelTable &scalar_kernels();
// nullptr when the CPU lacks AVX2+FMA
const KernelTable *avx2_kernels();
// selected at first use; CANTORSURF_SIMD=scalar forces the reference path
const KernelTable &kernels();

// convenience wrappers on the active table
std::vector<double> nearest_dist2(const PointsSoA &q, const PointsSoA &p);
double min_dist(const PointsSoA &q, const PointsSoA &p);
std::vector<double> segment_dist2(const PointsSoA &q, const SegmentsSoA &s);
double gauss_linking_raw(const PointsSoA &a, const PointsSoA &b);

} // namespace cantorsurf
