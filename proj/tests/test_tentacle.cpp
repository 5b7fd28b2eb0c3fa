#include <doctest.h>

#include <cmath>
#include <random>

#include "cantorsurf/error.hpp"
#include "cantorsurf/tentacle.hpp"

using namespace cantorsurf;

namespace {

double det3(const Vec3 &a, const Vec3 &b, const Vec3 &c) { return dot(cross(a, b), c); }

double fd_axis_det(const TubeMap &tm, double z, double h = 1e-6) {
  Vec3 c[3];
  for (int i = 0; i < 3; ++i) {
    Vec3 e{i == 0 ? h : 0, i == 1 ? h : 0, i == 2 ? h : 0};
    c[i] = (tm.eval(Vec3{0, 0, z} + e) - tm.eval(Vec3{0, 0, z} - e)) / (2 * h);
  }
  return det3(c[0], c[1], c[2]);
}

Curve bent_curve() {
  std::vector<Vec3> pts;
  for (int i = 0; i <= 20; ++i) {
    double t = i / 20.0;
    pts.push_back({0.6 * std::sin(2 * t), 0.3 * t * t, 2 * t});
  }
  return Curve::spline(pts, normalized(pts[1] - pts[0]), normalized(pts[20] - pts[19]));
}

} // namespace

TEST_CASE("frame along a straight segment is constant") {
  Curve c = Curve::line({0, 0, 0}, {0, 0, 3});
  FrameField f = frame_along(c, {1, 0, 0}, 0.01);
  CHECK(f.param(0) == doctest::Approx(-1));
  CHECK(f.s1 == doctest::Approx(4));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(dist(f.v1[i], Vec3{1, 0, 0}) < 1e-14);
    CHECK(dist(f.v2[i], Vec3{0, 1, 0}) < 1e-14);
  }
}

TEST_CASE("frame along a planar arc is parallel transport") {
  const double R = 2;
  auto arc = [&](double s) { return Vec3{R * std::cos(s / R), R * std::sin(s / R), 0}; };
  const double L = M_PI * R / 2;
  for (double step : {0.02, 0.01}) {
    // binormal stays fixed, the in-plane normal follows the radius
    FrameField a = frame_along(arc, 0, L, {0, 0, 1}, step);
    CHECK(dist(a.v1.back(), Vec3{0, 0, 1}) < 1e-8);
    FrameField b = frame_along(arc, 0, L, {-1, 0, 0}, step);
    CHECK(dist(b.v1.back(), Vec3{0, -1, 0}) < 1e-6);
    CHECK(b.max_orthonormality_error() < 1e-8);
    CHECK(std::fabs(b.min_determinant() - 1) < 1e-8);
    CHECK(std::fabs(b.max_determinant() - 1) < 1e-8);
    CHECK(b.max_increment() < 0.1);
    CHECK(b.total_twist() < 1e-6);
  }
  auto slow = [](double s) { return Vec3{2 * s, 0, 0}; };
  CHECK_THROWS_AS(frame_along(slow, 0, 1, {0, 1, 0}, 0.1), DomainError);
  CHECK_THROWS_AS(frame_along(Curve::line({0, 0, 0}, {0, 0, 1}), {0, 0, 1}, 0.1), ParameterError);
}

TEST_CASE("frames on a bent spline") {
  Curve c = bent_curve();
  FrameField f = frame_along(c, {1, 0, 0}, 0.005);
  CHECK(f.max_orthonormality_error() < 1e-8);
  CHECK(std::fabs(f.min_determinant() - 1) < 1e-8);
  CHECK(f.max_increment() < 0.1);
  CHECK(f.total_twist() < 2 * M_PI * c.length());
}

TEST_CASE("tube map") {
  Curve c = bent_curve();
  TubeMap tm = make_tube(c, {1, 0, 0}, 0.05);
  for (double z : {0.0, 0.3, 1.7, c.length()}) CHECK(dist(tube_map(tm, {0, 0, z}), c.pos(z)) < 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, c.length());
  for (int i = 0; i < 64; ++i) CHECK(std::fabs(fd_axis_det(tm, u(rng)) - 1) < 1e-6);
  CHECK_THROWS_AS(tube_map(tm, {0.06, 0, 1}), DomainError);
  CHECK_THROWS_AS(tube_map(tm, {0, 0, c.length() + 1.5}), DomainError);
  CHECK_NOTHROW(tube_map(tm, {0, 0, -1}));

  // straight curve: Phi is a rigid motion
  TubeMap st = make_tube(Curve::line({1, 2, 3}, {1, 2, 5}), {0, 1, 0}, 0.5);
  std::uniform_real_distribution<double> w(-0.35, 0.35), h(-1, 3);
  for (int i = 0; i < 50; ++i) {
    Vec3 a{w(rng), w(rng), h(rng)}, b{w(rng), w(rng), h(rng)};
    CHECK(std::fabs(dist(tube_map(st, a), tube_map(st, b)) - dist(a, b)) < 1e-12);
  }
}

TEST_CASE("max tube radius") {
  Curve line = Curve::line({0, 0, 0}, {0, 0, 5});
  TubeMap tl = make_tube(line, {1, 0, 0}, 0.1);
  CHECK(max_tube_radius(line, tl.frames, 0.3) == 0.3);
  CHECK(std::isinf(max_tube_radius(line, tl.frames)));

  const double R = 1.5;
  std::vector<Vec3> pts;
  for (int i = 0; i <= 60; ++i) {
    double a = M_PI * i / 60;
    pts.push_back({R * std::cos(a), R * std::sin(a), 0});
  }
  Curve circ = Curve::spline(pts, {0, 1, 0}, {0, -1, 0});
  TubeMap tc = make_tube(circ, {0, 0, 1}, 0.1);
  double d0 = max_tube_radius(circ, tc.frames);
  CHECK(d0 <= 0.9 * R * 1.001);
  CHECK(d0 > 0.85 * R);

  // hairpin: a tight turn whose legs then close in to a gap of 0.3
  std::vector<Vec3> hp;
  for (int i = 0; i <= 40; ++i) {
    double y = 3 - 3.0 * i / 40;
    hp.push_back({-(0.15 + 0.85 * (1 - std::exp(-y))), y, 0});
  }
  for (int i = 1; i < 20; ++i) {
    double a = M_PI - M_PI * i / 20;
    hp.push_back({std::cos(a) * 0.15, -0.15 * std::sin(a), 0});
  }
  for (int i = 0; i <= 40; ++i) {
    double y = 3.0 * i / 40;
    hp.push_back({0.15 + 0.85 * (1 - std::exp(-y)), y, 0});
  }
  Curve hair = Curve::spline(hp, normalized(hp[1] - hp[0]), normalized(hp.back() - hp[hp.size() - 2]));
  TubeMap th = make_tube(hair, {0, 0, 1}, 0.01);
  auto S = hair.sample(3000);
  double legs = 1e300;
  for (const auto &a : S)
    for (const auto &b : S)
      if (a.x < 0 && b.x > 0 && a.y > 0.5 && b.y > 0.5) legs = std::min(legs, dist(a, b));
  double dh = max_tube_radius(hair, th.frames);
  CHECK(dh <= 0.45 * legs);
  CHECK(dh > 0);

  // figure eight crossing itself
  std::vector<Vec3> f8;
  for (int i = 0; i <= 80; ++i) {
    double t = 1.8 * M_PI * i / 80;
    f8.push_back({std::sin(t), std::sin(t) * std::cos(t), 0});
  }
  Curve eight = Curve::spline(f8, normalized(f8[1] - f8[0]), normalized(f8[80] - f8[79]));
  TubeMap te = make_tube(eight, {0, 0, 1}, 0.01, 0.002);
  CHECK_THROWS_AS(max_tube_radius(eight, te.frames), InfeasibleGeometry);
}

TEST_CASE("straight tentacle is a surface of revolution of its profile") {
  Curve c = Curve::line({0, 0, 0}, {0, 0, 2});
  for (auto kind : {ProfileKind::LogLog, ProfileKind::Log}) {
    TentacleOptions opt;
    opt.kind = kind;
    Tentacle t = make_tentacle(c, {1, 0, 0}, {0.5, 0.5}, 0.1, 2, 0.3, opt);
    TentacleEnergy e = tentacle_energy(t);
    double prof = profile_energy(t.profile);
    CHECK(std::fabs(e.excess - prof) / prof < 1e-4);
    CHECK(e.flat == doctest::Approx(2 * M_PI * 0.01));
    CHECK(e.numeric <= e.bound);
    CHECK(t.cert.bound < t.cert.budget);
    CHECK(dist(t.eval({0.5, 0.5}), c.end()) < 1e-12);
    // annulus and plateau isometries
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ang(0, 2 * M_PI), rad(0.05, 0.1);
    for (int i = 0; i < 40; ++i) {
      double a1 = ang(rng), r1 = rad(rng), a2 = ang(rng), r2 = rad(rng);
      Vec2 x{0.5 + r1 * std::cos(a1), 0.5 + r1 * std::sin(a1)}, y{0.5 + r2 * std::cos(a2), 0.5 + r2 * std::sin(a2)};
      CHECK(std::fabs(dist(t.eval(x), t.eval(y)) - norm(x - y)) < 1e-10);
    }
    if (kind == ProfileKind::Log) {
      double rp = std::exp(t.profile.log_plateau_radius());
      for (int i = 0; i < 40; ++i) {
        double a1 = ang(rng), a2 = ang(rng), f1 = rad(rng) * 10 * rp, f2 = rad(rng) * 10 * rp;
        Vec2 x{0.5 + f1 * std::cos(a1), 0.5 + f1 * std::sin(a1)}, y{0.5 + f2 * std::cos(a2), 0.5 + f2 * std::sin(a2)};
        CHECK(std::fabs(dist(t.eval(x), t.eval(y)) - norm(x - y)) < 1e-10);
        CHECK(std::fabs(dot(t.eval(x) - c.end(), Vec3{0, 0, 1})) < 1e-12);
      }
    }
  }
}

TEST_CASE("bent tentacle certificate chain") {
  Curve c = bent_curve();
  Tentacle t = make_tentacle(c, {1, 0, 0}, {0, 0}, 0.05, 2, 0.2);
  TentacleEnergy e = tentacle_energy(t);
  CHECK(e.numeric <= e.bound);
  CHECK(e.bound < 0.2);
  CHECK(e.excess >= profile_energy(t.profile) * (1 - 1e-9));
  // chain rule Jacobian against finite differences inside the band
  const RadialProfile &p = t.profile;
  double c_mid = p.c0 + 0.5 * p.band;
  double r = std::exp(p.log_radius(c_mid));
  if (r > 1e-6) {
    Vec2 x{r * 0.6, r * 0.8};
    auto J = t.jacobian(x);
    double h = r * 1e-6;
    Vec3 fx = (t.eval({x.x + h, x.y}) - t.eval({x.x - h, x.y})) / (2 * h);
    CHECK(dist(fx, J[0]) / norm(J[0]) < 1e-4);
  }
  for (double z : {0.1, 0.9, 1.9}) CHECK(std::fabs(fd_axis_det(t.tube, z) - 1) < 1e-6);
}

TEST_CASE("zero height tentacle is the flat disk") {
  Curve c = Curve::line({0, 0, 0}, {0, 0, 1e-9});
  Tentacle t = make_tentacle(c, {1, 0, 0}, {0, 0}, 0.1, 2, 1.0);
  TentacleEnergy e = tentacle_energy(t);
  CHECK(e.numeric == doctest::Approx(2 * M_PI * 0.01).epsilon(1e-6));
}

TEST_CASE("tentacle errors") {
  Curve c = Curve::line({0, 0, 0}, {0, 0, 2});
  try {
    make_tentacle(c, {1, 0, 0}, {0, 0}, 0.1, 2, 0.01);
    FAIL("expected BudgetInfeasible");
  } catch (const BudgetInfeasible &e) {
    CHECK(std::isinf(e.log_plateau_radius));
  }
  TentacleOptions mesh;
  mesh.require_meshable = true;
  try {
    make_tentacle(c, {1, 0, 0}, {0, 0}, 0.1, 2, 0.3, mesh);
    FAIL("expected BudgetInfeasible");
  } catch (const BudgetInfeasible &e) {
    CHECK(e.log_plateau_radius < std::log(1e-12 * 0.1));
    CHECK(std::isfinite(e.log_plateau_radius));
  }
  CHECK_THROWS_AS(make_tentacle(c, {1, 0, 0}, {0, 0}, 0.1, 3, 0.3), ParameterError);
  std::vector<Vec3> pts;
  for (int i = 0; i <= 40; ++i) {
    double a = 1.5 * M_PI * i / 40;
    pts.push_back({0.2 * std::cos(a), 0.2 * std::sin(a), 0});
  }
  Curve tight = Curve::spline(pts, {0, 1, 0}, {1, 0, 0});
  CHECK_THROWS_AS(make_tentacle(tight, {0, 0, 1}, {0, 0}, 0.3, 2, 10.0), InfeasibleGeometry);
}
