#include "cantorsurf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <numbers>

namespace cantorsurf {

namespace {

void nearest_dist2_scalar(const double *qx, const double *qy, const double *qz, std::size_t nq,
                          const double *px, const double *py, const double *pz, std::size_t np, double *out) {
  for (std::size_t i = 0; i < nq; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < np; ++j) {
      double dx = qx[i] - px[j], dy = qy[i] - py[j], dz = qz[i] - pz[j];
      double d = dx * dx + dy * dy + dz * dz;
      best = d < best ? d : best;
    }
    out[i] = best;
  }
}

void segment_dist2_scalar(const double *qx, const double *qy, const double *qz, std::size_t nq,
                          const double *ax, const double *ay, const double *az,
                          const double *bx, const double *by, const double *bz, std::size_t ns, double *out) {
  for (std::size_t i = 0; i < nq; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ns; ++j) {
      double ex = bx[j] - ax[j], ey = by[j] - ay[j], ez = bz[j] - az[j];
      double wx = qx[i] - ax[j], wy = qy[i] - ay[j], wz = qz[i] - az[j];
      double l2 = ex * ex + ey * ey + ez * ez;
      double t = l2 > 0 ? (wx * ex + wy * ey + wz * ez) / l2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      double dx = wx - t * ex, dy = wy - t * ey, dz = wz - t * ez;
      double d = dx * dx + dy * dy + dz * dz;
      best = d < best ? d : best;
    }
    out[i] = best;
  }
}

double gauss_sum_scalar(const double *ax, const double *ay, const double *az, std::size_t na,
                        const double *bx, const double *by, const double *bz, std::size_t nb) {
  double total = 0;
  for (std::size_t i = 0; i < na; ++i) {
    std::size_t i1 = (i + 1) % na;
    double dax = ax[i1] - ax[i], day = ay[i1] - ay[i], daz = az[i1] - az[i];
    double max_ = 0.5 * (ax[i1] + ax[i]), may = 0.5 * (ay[i1] + ay[i]), maz = 0.5 * (az[i1] + az[i]);
    double row = 0;
    for (std::size_t j = 0; j < nb; ++j) {
      std::size_t j1 = (j + 1) % nb;
      double dbx = bx[j1] - bx[j], dby = by[j1] - by[j], dbz = bz[j1] - bz[j];
      double rx = max_ - 0.5 * (bx[j1] + bx[j]);
      double ry = may - 0.5 * (by[j1] + by[j]);
      double rz = maz - 0.5 * (bz[j1] + bz[j]);
      double cx = day * dbz - daz * dby, cy = daz * dbx - dax * dbz, cz = dax * dby - day * dbx;
      double r2 = rx * rx + ry * ry + rz * rz;
      row += (cx * rx + cy * ry + cz * rz) / (r2 * std::sqrt(r2));
    }
    total += row;
  }
  return total / (4 * std::numbers::pi);
}

const KernelTable kScalar{"scalar", nearest_dist2_scalar, segment_dist2_scalar, gauss_sum_scalar};

const KernelTable &select() {
  const char *env = std::getenv("CANTORSURF_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return kScalar;
  if (const KernelTable *t = avx2_kernels()) return *t;
  return kScalar;
}

} // namespace

const KernelTable &scalar_kernels() { return kScalar; }

const KernelTable &kernels() {
  static const KernelTable &t = select();
  return t;
}

std::vector<double> nearest_dist2(const PointsSoA &q, const PointsSoA &p) {
  std::vector<double> out(q.size(), std::numeric_limits<double>::infinity());
  if (q.size() && p.size())
    kernels().nearest_dist2(q.x.data(), q.y.data(), q.z.data(), q.size(), p.x.data(), p.y.data(), p.z.data(),
                            p.size(), out.data());
  return out;
}

double min_dist(const PointsSoA &q, const PointsSoA &p) {
  auto d = nearest_dist2(q, p);
  double m = std::numeric_limits<double>::infinity();
  for (double v : d) m = std::min(m, v);
  return std::sqrt(m);
}

std::vector<double> segment_dist2(const PointsSoA &q, const SegmentsSoA &s) {
  std::vector<double> out(q.size(), std::numeric_limits<double>::infinity());
  if (q.size() && s.size())
    kernels().segment_dist2(q.x.data(), q.y.data(), q.z.data(), q.size(), s.a.x.data(), s.a.y.data(),
                            s.a.z.data(), s.b.x.data(), s.b.y.data(), s.b.z.data(), s.size(), out.data());
  return out;
}

double gauss_linking_raw(const PointsSoA &a, const PointsSoA &b) {
  return kernels().gauss_sum(a.x.data(), a.y.data(), a.z.data(), a.size(), b.x.data(), b.y.data(), b.z.data(),
                             b.size());
}

double segment_segment_dist(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0, const Vec3 &q1) {
  Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0, t = 0;
  if (a <= 0 && e <= 0) return norm(r);
  if (a <= 0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    double c = dot(d1, r);
    if (e <= 0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      double b = dot(d1, d2), den = a * e - b * b;
      s = den > 0 ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0) { t = 0; s = std::clamp(-c / a, 0.0, 1.0); }
      else if (t > 1) { t = 1; s = std::clamp((b - c) / a, 0.0, 1.0); }
    }
  }
  return norm((p0 + s * d1) - (q0 + t * d2));
}

} // namespace cantorsurf
