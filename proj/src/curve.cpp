#include "cantorsurf/curve.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

// 8-point Gauss-Legendre on [0,1]
constexpr double kGx[8] = {0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
                           0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
constexpr double kGw[8] = {0.05061426814518813, 0.11119051722668724, 0.15685332293894364, 0.18134189168918100,
                           0.18134189168918100, 0.15685332293894364, 0.11119051722668724, 0.05061426814518813};

double speed_integral(const CurvePiece &p, double a, double b) {
  double acc = 0;
  for (int i = 0; i < 8; ++i) acc += kGw[i] * norm(p.d1(a + (b - a) * kGx[i]));
  return acc * (b - a);
}

constexpr int kSub = 64;

} // namespace

Vec3 CurvePiece::pos(double u) const {
  Vec3 r = c[5];
  for (int i = 4; i >= 0; --i) r = r * u + c[i];
  return r;
}

Vec3 CurvePiece::d1(double u) const {
  Vec3 r = 5 * c[5];
  for (int i = 4; i >= 1; --i) r = r * u + double(i) * c[i];
  return r;
}

Vec3 CurvePiece::d2(double u) const {
  Vec3 r = 20 * c[5];
  for (int i = 4; i >= 2; --i) r = r * u + double(i * (i - 1)) * c[i];
  return r;
}

CurvePiece hermite_cubic(const Vec3 &p0, const Vec3 &d0, const Vec3 &p1, const Vec3 &d1) {
  CurvePiece p;
  p.c[0] = p0;
  p.c[1] = d0;
  p.c[2] = 3 * (p1 - p0) - 2 * d0 - d1;
  p.c[3] = 2 * (p0 - p1) + d0 + d1;
  return p;
}

CurvePiece hermite_quintic(const Vec3 &p0, const Vec3 &d0, const Vec3 &a0, const Vec3 &p1, const Vec3 &d1,
                           const Vec3 &a1) {
  CurvePiece p;
  p.c[0] = p0;
  p.c[1] = d0;
  p.c[2] = 0.5 * a0;
  p.c[3] = -10 * p0 - 6 * d0 - 1.5 * a0 + 10 * p1 - 4 * d1 + 0.5 * a1;
  p.c[4] = 15 * p0 + 8 * d0 + 1.5 * a0 - 15 * p1 + 7 * d1 - a1;
  p.c[5] = -6 * p0 - 3 * d0 - 0.5 * a0 + 6 * p1 - 3 * d1 + 0.5 * a1;
  return p;
}

CurvePiece restrict_piece(const CurvePiece &p, double u0, double u1) {
  // expand P(u0 + (u1-u0) v) with binomial coefficients
  const double h = u1 - u0;
  CurvePiece q;
  static const int binom[6][6] = {{1, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0},  {1, 2, 1, 0, 0, 0},
                                  {1, 3, 3, 1, 0, 0}, {1, 4, 6, 4, 1, 0}, {1, 5, 10, 10, 5, 1}};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) q.c[j] += (binom[i][j] * std::pow(u0, i - j) * std::pow(h, j)) * p.c[i];
  return q;
}

Curve::Curve(std::vector<CurvePiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ParameterError("curve needs at least one piece");
  total_ = 0;
  for (const auto &p : pieces_) {
    Table t;
    t.u.resize(kSub + 1);
    t.s.resize(kSub + 1);
    t.u[0] = 0;
    t.s[0] = 0;
    for (int i = 1; i <= kSub; ++i) {
      t.u[i] = double(i) / kSub;
      t.s[i] = t.s[i - 1] + speed_integral(p, t.u[i - 1], t.u[i]);
    }
    offsets_.push_back(total_);
    total_ += t.s.back();
    tables_.push_back(std::move(t));
  }
  if (!(total_ > 0)) throw ParameterError("degenerate curve of zero length");
}

Curve Curve::line(const Vec3 &a, const Vec3 &b) {
  CurvePiece p;
  p.c[0] = a;
  p.c[1] = b - a;
  return Curve({p});
}

Curve Curve::spline(const std::vector<Vec3> &pts, const Vec3 &t0, const Vec3 &t1) {
  const int n = int(pts.size()) - 1;
  if (n < 1) throw ParameterError("spline needs two points");
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) {
    h[i] = dist(pts[i], pts[i + 1]);
    if (!(h[i] > 0)) throw ParameterError("spline through coincident points");
  }
  // clamped spline: solve for first derivatives m_i (tridiagonal)
  std::vector<double> a(n + 1), b(n + 1), c(n + 1);
  std::vector<Vec3> r(n + 1), m(n + 1);
  b[0] = 1; c[0] = 0; r[0] = t0;
  b[n] = 1; a[n] = 0; r[n] = t1;
  for (int i = 1; i < n; ++i) {
    a[i] = h[i];
    b[i] = 2 * (h[i - 1] + h[i]);
    c[i] = h[i - 1];
    r[i] = 3 * (h[i] / h[i - 1] * (pts[i] - pts[i - 1]) + h[i - 1] / h[i] * (pts[i + 1] - pts[i]));
  }
  for (int i = 1; i <= n; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    r[i] -= w * r[i - 1];
  }
  m[n] = r[n] / b[n];
  for (int i = n - 1; i >= 0; --i) m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
  std::vector<CurvePiece> pieces;
  for (int i = 0; i < n; ++i) pieces.push_back(hermite_cubic(pts[i], h[i] * m[i], pts[i + 1], h[i] * m[i + 1]));
  return Curve(std::move(pieces));
}

void Curve::locate(double s, int &piece, double &u) const {
  int i = int(std::upper_bound(offsets_.begin(), offsets_.end(), s) - offsets_.begin()) - 1;
  i = std::clamp(i, 0, int(pieces_.size()) - 1);
  double local = s - offsets_[i];
  const Table &t = tables_[i];
  int j = int(std::upper_bound(t.s.begin(), t.s.end(), local) - t.s.begin()) - 1;
  j = std::clamp(j, 0, kSub - 1);
  // Newton on the sub-interval starting from linear interpolation
  double ds = t.s[j + 1] - t.s[j];
  double x = t.u[j] + (ds > 0 ? (local - t.s[j]) / ds : 0) * (t.u[j + 1] - t.u[j]);
  for (int it = 0; it < 8; ++it) {
    double f = t.s[j] + speed_integral(pieces_[i], t.u[j], x) - local;
    double sp = norm(pieces_[i].d1(x));
    if (!(sp > 0)) break;
    double nx = std::clamp(x - f / sp, t.u[j], t.u[j + 1]);
    if (std::fabs(nx - x) < 1e-15) { x = nx; break; }
    x = nx;
  }
  piece = i;
  u = x;
}

Vec3 Curve::pos(double s) const {
  if (s < 0) return pos(0.0) + s * tangent(0.0);
  if (s > total_) return pos(total_) + (s - total_) * tangent(total_);
  int i; double u;
  locate(s, i, u);
  return pieces_[i].pos(u);
}

Vec3 Curve::tangent(double s) const {
  s = std::clamp(s, 0.0, total_);
  int i; double u;
  locate(s, i, u);
  return normalized(pieces_[i].d1(u));
}

Vec3 Curve::accel(double s) const {
  if (s < 0 || s > total_) return {};
  int i; double u;
  locate(s, i, u);
  Vec3 d = pieces_[i].d1(u), dd = pieces_[i].d2(u);
  double sp2 = dot(d, d);
  Vec3 t = d / std::sqrt(sp2);
  return (dd - dot(dd, t) * t) / sp2;
}

std::vector<Vec3> Curve::sample(int n) const {
  std::vector<Vec3> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = pos(total_ * i / n);
  return out;
}

double Curve::max_curvature(int n) const {
  double mx = 0;
  for (int i = 0; i <= n; ++i) mx = std::max(mx, norm(accel(total_ * i / n)));
  return mx;
}

Curve Curve::tail_from(double s0) const {
  int i; double u;
  locate(std::clamp(s0, 0.0, total_), i, u);
  std::vector<CurvePiece> out;
  if (u < 1 - 1e-12) out.push_back(restrict_piece(pieces_[i], u, 1.0));
  for (std::size_t j = i + 1; j < pieces_.size(); ++j) out.push_back(pieces_[j]);
  return Curve(std::move(out));
}

Curve Curve::append(const Curve &other) const {
  std::vector<CurvePiece> p = pieces_;
  p.insert(p.end(), other.pieces_.begin(), other.pieces_.end());
  return Curve(std::move(p));
}

double curve_distance(const Curve &a, const Curve &b, double tol) {
  return curve_distance(a, 0, a.length(), b, 0, b.length(), tol);
}

double curve_distance(const Curve &a, double a0, double a1, const Curve &b, double b0, double b1, double tol) {
  if (!(tol > 0)) throw ParameterError("curve_distance tolerance must be positive");
  if (!(a0 >= 0 && a0 < a1 && a1 <= a.length() && b0 >= 0 && b0 < b1 && b1 <= b.length()))
    throw ParameterError("curve_distance ranges must be non-empty and inside the curves");
  // sampled curvature with margin bounds the sagitta of short arcs
  const double ka = 1.5 * a.max_curvature(4000), kb = 1.5 * b.max_curvature(4000);
  struct Arc {
    double s0, s1;
    Vec3 p0, p1, c;
    double r, sag;
  };
  auto arc = [](const Curve &c, double kap, double s0, double s1, const Vec3 &p0, const Vec3 &p1) {
    const double l = s1 - s0;
    // points of an arc of length l lie within l / 2 of its midpoint; 1% covers the arc-length table error
    double sag = kap * l < 0.5 ? kap * l * l / 8 + 1e-12 * l : HUGE_VAL;
    return Arc{s0, s1, p0, p1, c.pos((s0 + s1) / 2), 0.505 * l, sag};
  };
  auto make = [&](const Curve &c, double kap, double s0, double s1) {
    return arc(c, kap, s0, s1, c.pos(s0), c.pos(s1));
  };
  struct Pair {
    double lb;
    Arc x, y;
    bool operator<(const Pair &o) const { return lb > o.lb; }
  };
  std::priority_queue<Pair> q;
  double ub = HUGE_VAL;
  auto push = [&](const Arc &x, const Arc &y) {
    double dc = norm(x.c - y.c);
    ub = std::min(ub, dc);
    double lb = dc - x.r - y.r;
    if (x.sag < HUGE_VAL && y.sag < HUGE_VAL) {
      double ds = segment_segment_dist(x.p0, x.p1, y.p0, y.p1);
      ub = std::min(ub, ds + x.sag + y.sag);
      lb = std::max(lb, ds - x.sag - y.sag);
    }
    if (lb < ub) q.push({lb, x, y});
  };
  const int n0 = 32;
  std::vector<Arc> A, B;
  for (int i = 0; i < n0; ++i) {
    A.push_back(make(a, ka, a0 + (a1 - a0) * i / n0, a0 + (a1 - a0) * (i + 1) / n0));
    B.push_back(make(b, kb, b0 + (b1 - b0) * i / n0, b0 + (b1 - b0) * (i + 1) / n0));
  }
  for (const auto &x : A)
    for (const auto &y : B) push(x, y);
  while (!q.empty()) {
    if (q.size() > 4000000) throw SamplingFailure("curve_distance did not converge");
    Pair p = q.top();
    q.pop();
    if (p.lb >= ub - tol) return std::max(p.lb, 0.0);
    bool split_x = p.x.r >= p.y.r;
    const Arc &s = split_x ? p.x : p.y;
    const Curve &c = split_x ? a : b;
    const double kap = split_x ? ka : kb;
    double m = (s.s0 + s.s1) / 2;
    Vec3 pm = s.c;
    Arc h0 = arc(c, kap, s.s0, m, s.p0, pm), h1 = arc(c, kap, m, s.s1, pm, s.p1);
    for (const Arc &h : {h0, h1}) {
      if (split_x)
        push(h, p.y);
      else
        push(p.x, h);
    }
  }
  return std::max(ub - tol, 0.0);
}

} // namespace cantorsurf
