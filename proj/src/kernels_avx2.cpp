// Built with -mavx2 -mfma; only entered after a runtime CPU check.
// No std templates are instantiated here so no AVX code leaks into shared inline symbols.
#include "cantorsurf/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdlib>

namespace cantorsurf {

namespace {

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  double a = _mm_cvtsd_f64(lo), b = _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
  return a < b ? a : b;
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

void nearest_dist2_avx2(const double *qx, const double *qy, const double *qz, std::size_t nq,
                        const double *px, const double *py, const double *pz, std::size_t np, double *out) {
  const std::size_t n4 = np & ~std::size_t(3);
  for (std::size_t i = 0; i < nq; ++i) {
    __m256d vx = _mm256_set1_pd(qx[i]), vy = _mm256_set1_pd(qy[i]), vz = _mm256_set1_pd(qz[i]);
    __m256d best = _mm256_set1_pd(HUGE_VAL);
    for (std::size_t j = 0; j < n4; j += 4) {
      __m256d dx = _mm256_sub_pd(vx, _mm256_loadu_pd(px + j));
      __m256d dy = _mm256_sub_pd(vy, _mm256_loadu_pd(py + j));
      __m256d dz = _mm256_sub_pd(vz, _mm256_loadu_pd(pz + j));
      __m256d d = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
      best = _mm256_min_pd(best, d);
    }
    double b = hmin(best);
    for (std::size_t j = n4; j < np; ++j) {
      double dx = qx[i] - px[j], dy = qy[i] - py[j], dz = qz[i] - pz[j];
      double d = dx * dx + dy * dy + dz * dz;
      b = d < b ? d : b;
    }
    out[i] = b;
  }
}

void segment_dist2_avx2(const double *qx, const double *qy, const double *qz, std::size_t nq,
                        const double *ax, const double *ay, const double *az,
                        const double *bx, const double *by, const double *bz, std::size_t ns, double *out) {
  const std::size_t n4 = ns & ~std::size_t(3);
  const __m256d zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0);
  for (std::size_t i = 0; i < nq; ++i) {
    __m256d vx = _mm256_set1_pd(qx[i]), vy = _mm256_set1_pd(qy[i]), vz = _mm256_set1_pd(qz[i]);
    __m256d best = _mm256_set1_pd(HUGE_VAL);
    for (std::size_t j = 0; j < n4; j += 4) {
      __m256d x0 = _mm256_loadu_pd(ax + j), y0 = _mm256_loadu_pd(ay + j), z0 = _mm256_loadu_pd(az + j);
      __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(bx + j), x0);
      __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(by + j), y0);
      __m256d ez = _mm256_sub_pd(_mm256_loadu_pd(bz + j), z0);
      __m256d wx = _mm256_sub_pd(vx, x0), wy = _mm256_sub_pd(vy, y0), wz = _mm256_sub_pd(vz, z0);
      __m256d l2 = _mm256_fmadd_pd(ez, ez, _mm256_fmadd_pd(ey, ey, _mm256_mul_pd(ex, ex)));
      __m256d pr = _mm256_fmadd_pd(wz, ez, _mm256_fmadd_pd(wy, ey, _mm256_mul_pd(wx, ex)));
      __m256d nz = _mm256_cmp_pd(l2, zero, _CMP_GT_OQ);
      __m256d t = _mm256_and_pd(nz, _mm256_div_pd(pr, _mm256_blendv_pd(one, l2, nz)));
      t = _mm256_min_pd(_mm256_max_pd(t, zero), one);
      __m256d dx = _mm256_fnmadd_pd(t, ex, wx), dy = _mm256_fnmadd_pd(t, ey, wy), dz = _mm256_fnmadd_pd(t, ez, wz);
      __m256d d = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
      best = _mm256_min_pd(best, d);
    }
    double b = hmin(best);
    for (std::size_t j = n4; j < ns; ++j) {
      double ex = bx[j] - ax[j], ey = by[j] - ay[j], ez = bz[j] - az[j];
      double wx = qx[i] - ax[j], wy = qy[i] - ay[j], wz = qz[i] - az[j];
      double l2 = ex * ex + ey * ey + ez * ez;
      double t = l2 > 0 ? (wx * ex + wy * ey + wz * ez) / l2 : 0.0;
      t = t < 0 ? 0 : (t > 1 ? 1 : t);
      double dx = wx - t * ex, dy = wy - t * ey, dz = wz - t * ez;
      double d = dx * dx + dy * dy + dz * dz;
      b = d < b ? d : b;
    }
    out[i] = b;
  }
}

double gauss_sum_avx2(const double *ax, const double *ay, const double *az, std::size_t na,
                      const double *bx, const double *by, const double *bz, std::size_t nb) {
  // edge vectors and midpoints of b, precomputed once
  double *buf = static_cast<double *>(std::malloc(6 * nb * sizeof(double)));
  double *dbx = buf, *dby = buf + nb, *dbz = buf + 2 * nb, *mbx = buf + 3 * nb, *mby = buf + 4 * nb, *mbz = buf + 5 * nb;
  for (std::size_t j = 0; j < nb; ++j) {
    std::size_t j1 = (j + 1) % nb;
    dbx[j] = bx[j1] - bx[j]; dby[j] = by[j1] - by[j]; dbz[j] = bz[j1] - bz[j];
    mbx[j] = 0.5 * (bx[j1] + bx[j]); mby[j] = 0.5 * (by[j1] + by[j]); mbz[j] = 0.5 * (bz[j1] + bz[j]);
  }
  const std::size_t n4 = nb & ~std::size_t(3);
  double total = 0;
  for (std::size_t i = 0; i < na; ++i) {
    std::size_t i1 = (i + 1) % na;
    double dax = ax[i1] - ax[i], day = ay[i1] - ay[i], daz = az[i1] - az[i];
    double max_ = 0.5 * (ax[i1] + ax[i]), may = 0.5 * (ay[i1] + ay[i]), maz = 0.5 * (az[i1] + az[i]);
    __m256d vdax = _mm256_set1_pd(dax), vday = _mm256_set1_pd(day), vdaz = _mm256_set1_pd(daz);
    __m256d vmx = _mm256_set1_pd(max_), vmy = _mm256_set1_pd(may), vmz = _mm256_set1_pd(maz);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n4; j += 4) {
      __m256d ex = _mm256_loadu_pd(&dbx[j]), ey = _mm256_loadu_pd(&dby[j]), ez = _mm256_loadu_pd(&dbz[j]);
      __m256d rx = _mm256_sub_pd(vmx, _mm256_loadu_pd(&mbx[j]));
      __m256d ry = _mm256_sub_pd(vmy, _mm256_loadu_pd(&mby[j]));
      __m256d rz = _mm256_sub_pd(vmz, _mm256_loadu_pd(&mbz[j]));
      __m256d cx = _mm256_fmsub_pd(vday, ez, _mm256_mul_pd(vdaz, ey));
      __m256d cy = _mm256_fmsub_pd(vdaz, ex, _mm256_mul_pd(vdax, ez));
      __m256d cz = _mm256_fmsub_pd(vdax, ey, _mm256_mul_pd(vday, ex));
      __m256d r2 = _mm256_fmadd_pd(rz, rz, _mm256_fmadd_pd(ry, ry, _mm256_mul_pd(rx, rx)));
      __m256d num = _mm256_fmadd_pd(cz, rz, _mm256_fmadd_pd(cy, ry, _mm256_mul_pd(cx, rx)));
      acc = _mm256_add_pd(acc, _mm256_div_pd(num, _mm256_mul_pd(r2, _mm256_sqrt_pd(r2))));
    }
    double row = hsum(acc);
    for (std::size_t j = n4; j < nb; ++j) {
      double rx = max_ - mbx[j], ry = may - mby[j], rz = maz - mbz[j];
      double cx = day * dbz[j] - daz * dby[j], cy = daz * dbx[j] - dax * dbz[j], cz = dax * dby[j] - day * dbx[j];
      double r2 = rx * rx + ry * ry + rz * rz;
      row += (cx * rx + cy * ry + cz * rz) / (r2 * std::sqrt(r2));
    }
    total += row;
  }
  std::free(buf);
  return total / (4 * M_PI);
}

const KernelTable kAvx2{"avx2", nearest_dist2_avx2, segment_dist2_avx2, gauss_sum_avx2};

} // namespace

const KernelTable *avx2_kernels() {
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
  return nullptr;
}

} // namespace cantorsurf
