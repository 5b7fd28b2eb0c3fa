#include "cantorsurf/tentacle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "cantorsurf/error.hpp"
#include "cantorsurf/kernels.hpp"

namespace cantorsurf {

namespace {

constexpr double kPi = 3.14159265358979323846;

double angle_between(const Vec3 &a, const Vec3 &b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

// orthonormalize against t and complete the frame
void complete(const Vec3 &t, Vec3 &v1, Vec3 &v2) {
  v1 = v1 - dot(v1, t) * t;
  double n = norm(v1);
  if (!(n > 1e-12)) throw ParameterError("initial normal is parallel to the tangent");
  v1 = v1 / n;
  v2 = cross(t, v1);
}

FrameField propagate(std::vector<Vec3> pos, std::vector<Vec3> t, std::vector<Vec3> acc, double s0, double step,
                     const Vec3 &init) {
  FrameField f;
  f.s0 = s0;
  f.step = step;
  f.s1 = s0 + step * double(pos.size() - 1);
  const std::size_t N = pos.size();
  f.v1.resize(N);
  f.v2.resize(N);
  Vec3 r = init, w;
  complete(t[0], r, w);
  f.v1[0] = r;
  f.v2[0] = w;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    Vec3 a = pos[i + 1] - pos[i];
    double c1 = dot(a, a);
    Vec3 rl = f.v1[i], tl = t[i];
    if (c1 > 0) {
      rl = rl - (2 / c1) * dot(a, rl) * a;
      tl = tl - (2 / c1) * dot(a, tl) * a;
    }
    Vec3 b = t[i + 1] - tl;
    double c2 = dot(b, b);
    Vec3 rn = c2 > 0 ? rl - (2 / c2) * dot(b, rl) * b : rl;
    complete(t[i + 1], rn, w);
    f.v1[i + 1] = rn;
    f.v2[i + 1] = w;
  }
  f.d1.resize(N);
  f.d2.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    f.d1[i] = -dot(acc[i], f.v1[i]) * t[i];
    f.d2[i] = -dot(acc[i], f.v2[i]) * t[i];
  }
  f.pos = std::move(pos);
  f.t = std::move(t);
  f.accel = std::move(acc);
  return f;
}

} // namespace

Frame FrameField::at(double s, const Vec3 &tangent) const {
  const std::size_t N = size();
  double x = std::clamp((s - s0) / step, 0.0, double(N - 1));
  std::size_t i = std::min<std::size_t>(std::size_t(x), N - 2);
  double u = x - double(i);
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  Vec3 v = h00 * v1[i] + (h10 * step) * d1[i] + h01 * v1[i + 1] + (h11 * step) * d1[i + 1];
  Frame f{tangent, v, {}};
  complete(tangent, f.v1, f.v2);
  return f;
}

std::pair<Vec3, Vec3> FrameField::derivs(double s, const Vec3 &tangent, const Vec3 &acc) const {
  Frame f = at(s, tangent);
  return {-dot(acc, f.v1) * tangent, -dot(acc, f.v2) * tangent};
}

double FrameField::max_orthonormality_error() const {
  double e = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec3 *b[3] = {&v1[i], &v2[i], &t[i]};
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) e = std::max(e, std::fabs(dot(*b[a], *b[c]) - (a == c ? 1.0 : 0.0)));
  }
  return e;
}

double FrameField::min_determinant() const {
  double m = 1e300;
  for (std::size_t i = 0; i < size(); ++i) m = std::min(m, dot(cross(v1[i], v2[i]), t[i]));
  return m;
}

double FrameField::max_determinant() const {
  double m = -1e300;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, dot(cross(v1[i], v2[i]), t[i]));
  return m;
}

double FrameField::max_increment() const {
  double m = 0;
  for (std::size_t i = 0; i + 1 < size(); ++i)
    m = std::max({m, angle_between(t[i], t[i + 1]), angle_between(v1[i], v1[i + 1])});
  return m;
}

double FrameField::total_twist() const {
  double tw = 0;
  for (std::size_t i = 0; i + 1 < size(); ++i) {
    // parallel transport by the minimal rotation taking t_i to t_{i+1}
    Vec3 ax = cross(t[i], t[i + 1]);
    double sn = norm(ax), cs = dot(t[i], t[i + 1]);
    Vec3 r = v1[i];
    if (sn > 1e-15) {
      Vec3 k = ax / sn;
      r = cs * r + sn * cross(k, r) + (1 - cs) * dot(k, r) * k;
    }
    tw += std::fabs(std::atan2(dot(cross(r, v1[i + 1]), t[i + 1]), dot(r, v1[i + 1])));
  }
  return tw;
}

FrameField frame_along(const Curve &c, const Vec3 &v1, double step) {
  if (!(step > 0)) throw ParameterError("frame step must be positive");
  const double L = c.length();
  const int inner = L > 0 ? std::max(1, int(std::ceil(L / step))) : 0;
  const double h = inner > 0 ? L / inner : step;
  const int ext = int(std::ceil(1.0 / h - 1e-9));
  const int N = inner + 2 * ext + 1;
  std::vector<Vec3> pos(N), t(N), acc(N);
  for (int i = 0; i < N; ++i) {
    double s = i < ext ? -(ext - i) * h : i - ext <= inner ? (i - ext) * h : L + (i - ext - inner) * h;
    if (i - ext == inner) s = L;
    pos[i] = c.pos(s);
    t[i] = c.tangent(s);
    acc[i] = c.accel(s);
  }
  return propagate(std::move(pos), std::move(t), std::move(acc), -ext * h, h, v1);
}

FrameField frame_along(const std::function<Vec3(double)> &fn, double s0, double s1, const Vec3 &v1, double step) {
  if (!(step > 0) || !(s1 > s0)) throw ParameterError("frame sampling needs s1 > s0 and step > 0");
  const int N = int(std::ceil((s1 - s0) / step)) + 1;
  const double h = (s1 - s0) / (N - 1);
  std::vector<Vec3> pos(N), t(N), acc(N);
  const double e = 1e-5, e2 = 1e-4;
  for (int i = 0; i < N; ++i) {
    double s = s0 + i * h;
    pos[i] = fn(s);
    Vec3 d = (fn(s + e) - fn(s - e)) / (2 * e);
    double sp = norm(d);
    if (std::fabs(sp - 1) > 1e-3)
      throw DomainError("curve is not unit speed at s=" + std::to_string(s) + " (|gamma'|=" + std::to_string(sp) + ")");
    t[i] = d / sp;
    Vec3 dd = (fn(s + e2) - 2 * pos[i] + fn(s - e2)) / (e2 * e2);
    acc[i] = dd - dot(dd, t[i]) * t[i];
  }
  return propagate(std::move(pos), std::move(t), std::move(acc), s0, h, v1);
}

Vec3 TubeMap::eval(const Vec3 &x) const {
  Vec3 T = curve.tangent(x.z);
  Frame f = frames.at(x.z, T);
  return curve.pos(x.z) + x.x * f.v1 + x.y * f.v2;
}

std::array<Vec3, 3> TubeMap::jacobian(const Vec3 &x) const {
  Vec3 T = curve.tangent(x.z), A = curve.accel(x.z);
  Frame f = frames.at(x.z, T);
  Vec3 d1 = -dot(A, f.v1) * T, d2 = -dot(A, f.v2) * T;
  return {f.v1, f.v2, T + x.x * d1 + x.y * d2};
}

TubeMap make_tube(const Curve &c, const Vec3 &v1, double delta, double step) {
  if (!(delta > 0)) throw ParameterError("tube radius must be positive");
  const double L = c.length();
  if (step <= 0) {
    double kap = c.max_curvature(std::max(200, int(std::min(20000.0, 50 * L))));
    step = std::min({0.25, L > 0 ? L / 64 : 0.25, kap > 0 ? 0.05 / kap : 0.25});
    if (L > 0) step = std::max(step, L / 50000);
  }
  TubeMap tm;
  tm.curve = c;
  tm.frames = frame_along(c, v1, step);
  tm.delta = delta;
  tm.tau = L;
  return tm;
}

Vec3 tube_map(const TubeMap &tube, const Vec3 &x) {
  double r2 = x.x * x.x + x.y * x.y;
  if (r2 > tube.delta * tube.delta * (1 + 1e-12) || x.z < -1 - 1e-12 || x.z > tube.tau + 1 + 1e-12)
    throw DomainError("point outside the extended cylinder");
  return tube.eval(x);
}

double max_tube_radius(const Curve &c, const FrameField &f, double cap) {
  double kap = 0;
  for (const auto &a : f.accel) kap = std::max(kap, norm(a));
  kap = std::max(kap, c.max_curvature(std::max(200, int(f.size()))));
  double r_curv = kap > 0 ? 1 / kap : std::numeric_limits<double>::infinity();
  double self = std::numeric_limits<double>::infinity();
  if (kap > 0) {
    // curve samples on [0, L]; every curve point is within step/2 of one, so the sampled distance minus a step
    // bounds the true one from below
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f.param(i) >= -1e-12 && f.param(i) <= c.length() + 1e-12) pts.push_back(f.pos[i]);
    // chord >= (2/k) sin(k s / 2) > 0 below arc separation pi/k, so only farther pairs can approach
    const std::size_t gap = std::max<std::size_t>(1, std::size_t(std::floor(kPi / kap / f.step)) - 1);
    // sweep along the axis of largest extent; pairs farther apart on that axis than the running minimum are skipped
    Vec3 lo = pts[0], hi = pts[0];
    for (const auto &p : pts) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Vec3 ext = hi - lo;
    const int ax = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    auto key = [ax](const Vec3 &p) { return ax == 0 ? p.x : (ax == 1 ? p.y : p.z); };
    std::vector<std::size_t> ord(pts.size());
    std::iota(ord.begin(), ord.end(), std::size_t(0));
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return key(pts[a]) < key(pts[b]); });
    for (std::size_t a = 0; a < ord.size(); ++a) {
      const std::size_t i = ord[a];
      const double ki = key(pts[i]);
      for (std::size_t b = a + 1; b < ord.size() && key(pts[ord[b]]) - ki < self; ++b) {
        const std::size_t j = ord[b];
        if ((i > j ? i - j : j - i) < gap) continue;
        self = std::min(self, norm(pts[i] - pts[j]));
      }
    }
    self -= f.step;
    if (self <= 1e-9 * (1 + c.length())) throw InfeasibleGeometry("curve intersects itself (or comes closer than its sampling step)");
  }
  return std::min(0.9 * std::min(r_curv, self / 2), cap);
}

Vec3 Tentacle::eval(Vec2 x) const {
  Vec2 y = x - center;
  double r = norm(y);
  double t = profile.value(r);
  return tube.eval({y.x, y.y, t});
}

std::array<Vec3, 2> Tentacle::jacobian(Vec2 x) const {
  Vec2 y = x - center;
  double r = norm(y);
  double t = profile.value(r);
  auto J = tube.jacobian({y.x, y.y, t});
  double rp = r > 0 ? profile.radial_derivative(r) : 0.0;
  Vec2 g = r > 0 ? (rp / r) * y : Vec2{};
  return {J[0] + g.x * J[2], J[1] + g.y * J[2]};
}

Tentacle make_tentacle(const Curve &curve, const Vec3 &v1, Vec2 center, double delta, int n, double budget,
                       const TentacleOptions &opt) {
  if (n != 2) throw ParameterError("tentacles are built for n = 2 only (surfaces in R^3)");
  if (!(delta > 0)) throw ParameterError("delta must be positive");
  if (!(budget > 0)) throw ParameterError("budget must be positive");
  Tentacle tt;
  tt.tube = make_tube(curve, v1, delta, opt.step);
  tt.center = center;
  tt.delta = delta;
  double d0 = max_tube_radius(curve, tt.tube.frames);
  if (delta > d0) throw InfeasibleGeometry("delta " + std::to_string(delta) + " exceeds the tube radius " + std::to_string(d0));

  const TubeMap &tm = tt.tube;
  const double tau = tm.tau;
  // sup of |DPhi|_HS over the cylinder; |dPhi/dx3| is convex in (x1, x2), so the rim and the axis suffice
  double hs2 = 0;
  const int heights = std::max(2, std::min(4000, int(std::ceil(tau / tm.frames.step)) + 1));
  for (int i = 0; i < heights; ++i) {
    double z = tau * i / (heights - 1);
    for (int a = 0; a <= 16; ++a) {
      double r = a == 16 ? 0.0 : delta, th = 2 * kPi * a / 16;
      auto J = tm.jacobian({r * std::cos(th), r * std::sin(th), z});
      hs2 = std::max(hs2, norm2(J[0]) + norm2(J[1]) + norm2(J[2]));
    }
  }
  EnergyCertificate &ce = tt.cert;
  ce.D = 1.1 * std::sqrt(hs2);
  ce.chain_constant = std::pow(std::sqrt(double(n)), n) * ball_volume(n);
  ce.budget = budget;
  ce.log_budget = std::log(budget);
  const double K = std::pow(std::sqrt(double(n)), n) * std::pow(ce.D, n);

  // int (1 + |grad rho|)^2 <= (sqrt(pi) delta + sqrt(E))^2
  double room = std::sqrt(budget / K) - std::sqrt(kPi) * delta;
  if (!(room > 0))
    throw BudgetInfeasible("budget " + std::to_string(budget) + " is below the flat-disk energy at delta " +
                               std::to_string(delta),
                           -HUGE_VAL);
  double e_prof = room * room * (1 - 1e-12);
  if (opt.kind == ProfileKind::LogLog) {
    if (delta >= std::exp(-1.0)) throw ParameterError("log-log profile needs delta < 1/e");
    tt.profile = tau > 0 ? loglog_profile(delta, tau, n, e_prof, opt.width) : RadialProfile{};
  } else {
    tt.profile = log_profile(delta, tau, n, e_prof, opt.width);
  }
  RadialProfile &p = tt.profile;
  p.delta = delta;
  if (tau <= 0) {
    p.tau = 0;
    p.c0 = p.kind == ProfileKind::LogLog ? std::log(std::log(2 / delta)) : std::log(2 / delta);
  }

  double grad_l1 = 0;
  if (p.tau > 0 && p.band > 0) {
    auto f = [&](double x) { return p.tau / p.band * blend_d1(x, p.width) * std::exp(p.log_radius(p.c0 + p.band * x)); };
    grad_l1 = 2 * kPi * p.band * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0, 20, 1e-12);
  }
  double integral = kPi * delta * delta + 2 * grad_l1 + profile_energy(p);
  ce.log_bound = std::log(K) + std::log(integral);
  ce.bound = K * integral;
  if (!(ce.bound < budget)) throw InternalError("tentacle certificate exceeds its budget");
  ce.meshable = p.log_plateau_radius() - std::log(delta) >= std::log(1e-12);
  if (opt.require_meshable && !ce.meshable)
    throw BudgetInfeasible("plateau radius exp(" + std::to_string(p.log_plateau_radius()) +
                               ") is below 1e-12 delta; relax the budget",
                           p.log_plateau_radius());
  return tt;
}

TentacleEnergy tentacle_energy(const Tentacle &t, int M, double rel_tol) {
  if (M < 3) throw ParameterError("need at least 3 angular samples");
  const RadialProfile &p = t.profile;
  const TubeMap &tm = t.tube;
  TentacleEnergy out;
  out.flat = 2 * kPi * t.delta * t.delta;
  out.bound = t.cert.bound;
  double excess = 0, err_total = 0, total_abs = 0;
  if (p.tau > 0 && p.band > 0) {
    // per unit c: -2 rho_c (yhat . v) . P r + rho_c^2 w(c) |P|^2, P = dPhi/dx3
    auto f = [&](double x) {
      // blend evaluated in x: c0 + band x drops digits when the band is narrow
      double c = p.c0 + p.band * x;
      double rc = p.tau / p.band * blend_d1(x, p.width);
      if (rc == 0) return 0.0;
      double r = std::exp(p.log_radius(c)), z = p.tau * blend(x, p.width), w = p.energy_weight(c);
      Vec3 T = tm.curve.tangent(z), A = tm.curve.accel(z);
      Frame fr = tm.frames.at(z, T);
      Vec3 d1 = -dot(A, fr.v1) * T, d2 = -dot(A, fr.v2) * T;
      double sum = 0;
      for (int k = 0; k < M; ++k) {
        double th = 2 * kPi * k / M, cs = std::cos(th), sn = std::sin(th);
        Vec3 P = T + (r * cs) * d1 + (r * sn) * d2;
        Vec3 yv = cs * fr.v1 + sn * fr.v2;
        sum += -2 * rc * dot(yv, P) * r + rc * rc * w * norm2(P);
      }
      return sum * 2 * kPi / M * p.band;
    };
    double cuts[4] = {0, p.width, 1 - p.width, 1};
    for (int i = 0; i < 3; ++i) {
      if (!(cuts[i + 1] > cuts[i])) continue;
      double err = 0, l1 = 0;
      excess += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], 20, rel_tol, &err, &l1);
      err_total += err;
      total_abs += l1;
    }
    if (err_total > 100 * rel_tol * std::max(total_abs, 1e-300) && err_total > 1e-300)
      throw QuadratureError("tentacle quadrature did not converge", err_total / std::max(total_abs, 1e-300));
  }
  out.excess = excess;
  out.numeric = out.flat + excess;
  return out;
}

} // namespace cantorsurf
