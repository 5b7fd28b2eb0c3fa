#include "cantorsurf/predicates.hpp"

#include <gmp.h>

#include <atomic>
#include <cmath>

namespace cantorsurf {

namespace {

std::atomic<long> g_fallbacks{0};

struct Q {
  mpq_t v;
  Q() { mpq_init(v); }
  explicit Q(double d) { mpq_init(v); mpq_set_d(v, d); }
  ~Q() { mpq_clear(v); }
  Q(const Q &) = delete;
  Q &operator=(const Q &) = delete;
};

void sub(Q &r, double a, double b) {
  Q qa(a), qb(b);
  mpq_sub(r.v, qa.v, qb.v);
}

int orient3d_exact(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
  Q m[3][3];
  const Vec3 *rows[3] = {&a, &b, &c};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sub(m[i][j], (*rows[i])[j], d[j]);
  Q t1, t2, acc, term;
  // det by cofactor expansion along the first row
  mpq_mul(t1.v, m[1][1].v, m[2][2].v);
  mpq_mul(t2.v, m[1][2].v, m[2][1].v);
  mpq_sub(t1.v, t1.v, t2.v);
  mpq_mul(acc.v, m[0][0].v, t1.v);

  mpq_mul(t1.v, m[1][0].v, m[2][2].v);
  mpq_mul(t2.v, m[1][2].v, m[2][0].v);
  mpq_sub(t1.v, t1.v, t2.v);
  mpq_mul(term.v, m[0][1].v, t1.v);
  mpq_sub(acc.v, acc.v, term.v);

  mpq_mul(t1.v, m[1][0].v, m[2][1].v);
  mpq_mul(t2.v, m[1][1].v, m[2][0].v);
  mpq_sub(t1.v, t1.v, t2.v);
  mpq_mul(term.v, m[0][2].v, t1.v);
  mpq_add(acc.v, acc.v, term.v);
  return mpq_sgn(acc.v);
}

} // namespace

int orient3d(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d) {
  double adx = a.x - d.x, bdx = b.x - d.x, cdx = c.x - d.x;
  double ady = a.y - d.y, bdy = b.y - d.y, cdy = c.y - d.y;
  double adz = a.z - d.z, bdz = b.z - d.z, cdz = c.z - d.z;
  double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  double cdxady = cdx * ady, adxcdy = adx * cdy;
  double adxbdy = adx * bdy, bdxady = bdx * ady;
  double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  double perm = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * std::fabs(adz) +
                (std::fabs(cdxady) + std::fabs(adxcdy)) * std::fabs(bdz) +
                (std::fabs(adxbdy) + std::fabs(bdxady)) * std::fabs(cdz);
  const double errbound = 7.7715611723761027e-16 * perm;
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  ++g_fallbacks;
  return orient3d_exact(a, b, c, d);
}

int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
  double detleft = (ax - cx) * (by - cy), detright = (ay - cy) * (bx - cx);
  double det = detleft - detright;
  const double errbound = 3.3306690738754716e-16 * (std::fabs(detleft) + std::fabs(detright));
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  ++g_fallbacks;
  Q a1, a2, b1, b2, l, r;
  sub(a1, ax, cx); sub(a2, by, cy); sub(b1, ay, cy); sub(b2, bx, cx);
  mpq_mul(l.v, a1.v, a2.v);
  mpq_mul(r.v, b1.v, b2.v);
  mpq_sub(l.v, l.v, r.v);
  return mpq_sgn(l.v);
}

long predicate_fallbacks() { return g_fallbacks.load(); }

} // namespace cantorsurf
