#include <doctest.h>

#include <cmath>

#include "cantorsurf/error.hpp"
#include "cantorsurf/profile.hpp"

using namespace cantorsurf;

namespace {

const double kE = std::exp(1.0);

// composite Simpson of 2pi |rho'(r)|^2 r dr for the bare truncation, in t = log r
double radial_simpson(double s, double tau, int n) {
  double a = -std::exp(s + tau), b = -std::exp(s);
  int N = 200000;
  double h = (b - a) / N, sum = 0;
  for (int i = 0; i <= N; ++i) {
    double t = a + i * h;
    // |rho'(r)| r = 1/|t|
    double f = std::pow(1.0 / std::fabs(t), n);
    sum += f * (i == 0 || i == N ? 1 : i % 2 ? 4 : 2);
  }
  return sphere_area(n - 1) * sum * h / 3;
}

// second-order one-sided second derivative, dir = +1 looks right, -1 left
double one_sided_d2(const RadialProfile &p, double c, double h, int dir) {
  auto f = [&](int i) { return p.value_c(c + dir * i * h); };
  return (2 * f(0) - 5 * f(1) + 4 * f(2) - f(3)) / (h * h);
}

} // namespace

TEST_CASE("eta values and gradient") {
  CHECK(eta(std::exp(-kE)) == doctest::Approx(1.0).epsilon(1e-14));
  double near = eta(std::exp(-1.0) * (1 - 1e-9));
  CHECK(near > 0);
  CHECK(near < 1e-8);
  double r = std::exp(-kE), h = r * 1e-5;
  double fd = (eta(r - h) - eta(r + h)) / (2 * h);
  CHECK(std::fabs(fd - eta_gradient(r)) / eta_gradient(r) < 1e-6);
  CHECK(eta_gradient(r) == doctest::Approx(std::exp(kE - 1)).epsilon(1e-12));
  CHECK_THROWS_AS(eta(0.0), DomainError);
  CHECK_THROWS_AS(eta(std::exp(-1.0)), DomainError);
  CHECK_THROWS_AS(eta(0.5), DomainError);
}

TEST_CASE("truncate pieces and support") {
  double s = 1.0, t = 2.0;
  double r_mid = std::exp(-std::exp(1.5));
  CHECK(truncate(s, t, r_mid) == doctest::Approx(0.5));
  CHECK(truncate(s, t, std::exp(-std::exp(3.0))) == doctest::Approx(1.0));
  double edge = std::exp(-std::exp(s));
  for (double f : {1.0 + 1e-12, 1.01, 2.0, 10.0}) CHECK(truncate(s, t, edge * f) == 0.0);
  CHECK(truncate(s, t, edge * 0.99) > 0.0);
  CHECK(truncate(s, s + 1e-12, 1e-30) < 1e-11);
  CHECK_THROWS_AS(truncate(2.0, 2.0, 0.1), ParameterError);
  CHECK_THROWS_AS(truncate(3.0, 2.0, 0.1), ParameterError);
}

TEST_CASE("truncation energy closed form") {
  double e = truncation_energy(5, 1, 2);
  CHECK(e == doctest::Approx(2 * M_PI * (std::exp(-5.0) - std::exp(-6.0))).epsilon(1e-14));
  CHECK(std::fabs(e - 0.026761) < 5e-7);
  CHECK(std::fabs(radial_simpson(5, 1, 2) - e) / e < 1e-6);
  CHECK(std::fabs(radial_simpson(2, 0.5, 3) - truncation_energy(2, 0.5, 3)) / truncation_energy(2, 0.5, 3) < 1e-6);
  CHECK(truncation_energy(5, 1e-300, 2) < 1e-299);
  for (int n : {2, 3, 4})
    for (double s = 1; s < 20; s += 0.5) CHECK(truncation_energy(s + 0.5, 1, n) < truncation_energy(s, 1, n));
}

TEST_CASE("quadrature matches the closed form on a grid") {
  for (int n : {2, 3, 4})
    for (double s : {1.0, 2.5, 5.0, 10.0, 20.0})
      for (double tau : {0.1, 0.5, 1.0, 2.5, 5.0}) {
        RadialProfile p;
        p.n = n;
        p.tau = tau;
        p.band = tau;
        p.c0 = s;
        p.delta = 0.1;
        double a = truncation_energy(s, tau, n);
        CHECK(closed_form_energy(p) == doctest::Approx(a).epsilon(1e-14));
        CHECK(std::fabs(profile_energy(p) - a) / a < 1e-4);
      }
}

TEST_CASE("solve_s reference case") {
  SolveResult r = solve_s(0.1, 1, 2, 0.01);
  CHECK(std::fabs(r.s - 5.985) < 1e-3);
  CHECK(truncation_energy(r.s, 1, 2) < 0.01);
  // inverse of the closed form, the answer must sit within the bisection tolerance on the safe side
  double exact = -std::log(0.01 / (2 * M_PI * (1 - std::exp(-1.0))));
  CHECK(r.s >= exact);
  CHECK(r.s - exact < 1e-6);
  CHECK(r.log_log_plateau == doctest::Approx(r.s + 1));
  // support radius e^{-e^s} ~ e^{-397} <= 0.05, compared in the log domain
  CHECK(std::exp(r.s) == doctest::Approx(397).epsilon(2e-3));
  CHECK(-std::exp(r.s) <= std::log(0.05));
}

TEST_CASE("solve_s with an unbounded budget is support-limited") {
  for (double d : {1e-3, 1e-2, 0.1, 0.3}) {
    SolveResult r = solve_s(d, 1, 2, 1e300);
    CHECK(std::exp(r.s) == doctest::Approx(std::log(2 / d)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(solve_s(0.5, 1, 2, 0.1), DomainError);
  CHECK_THROWS_AS(solve_s(0.1, 1, 1, 0.1), ParameterError);
  CHECK_THROWS_AS(solve_s(0.1, 1, 2, 0), ParameterError);
  CHECK_THROWS_AS(solve_s(0.1, -1, 2, 0.1), ParameterError);
}

TEST_CASE("solved smoothed profiles meet budget and support") {
  for (double d : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1})
    for (double tau : {0.1, 1.0, 5.0})
      for (int n : {2, 3}) {
        RadialProfile p = loglog_profile(d, tau, n, std::pow(d, n), 0.1);
        CHECK(profile_energy(p) < std::pow(d, n));
        CHECK(p.log_support_radius() <= std::log(d / 2) + 1e-12);
        CHECK(p.value_log(std::log(d / 2)) == 0.0);
        CHECK(p.value_log(p.log_plateau_radius()) == tau);
      }
}

TEST_CASE("smoothing") {
  RadialProfile base;
  base.n = 2;
  base.tau = 1;
  base.band = 1;
  base.c0 = 1;
  base.delta = 0.1;
  CHECK_THROWS_AS(smooth(base, 0.0), ParameterError);
  CHECK_THROWS_AS(smooth(base, 0.3), ParameterError);
  CHECK_THROWS_AS(smooth(base, -0.1), ParameterError);

  double closed = closed_form_energy(base);
  CHECK(std::fabs(profile_energy(smooth(base, 1e-7)) - closed) / closed < 1e-4);

  for (int n : {2, 3})
    for (double w : {0.01, 0.05, 0.1, 0.25}) {
      RadialProfile b = base;
      b.n = n;
      RadialProfile q = smooth(b, w);
      double factor = profile_energy(q) / closed_form_energy(b);
      CHECK(factor <= 1 + 4 * w);
      CHECK(factor <= 1 + smoothing_slack(w, n));
      // never enlarges support, never lowers the plateau
      for (double c = 0; c < 3; c += 0.01) {
        if (b.value_c(c) == 0) CHECK(q.value_c(c) == 0);
        if (b.value_c(c) == b.tau) CHECK(q.value_c(c) == b.tau);
        CHECK(q.value_c(c) >= 0);
        CHECK(q.value_c(c) <= q.tau);
      }
    }

  RadialProfile q = smooth(base, 0.25);
  for (double joint : {q.c0, q.c0 + 0.25, q.c1() - 0.25, q.c1()}) {
    double h = 1e-4;
    CHECK(std::fabs(one_sided_d2(q, joint, h, -1) - one_sided_d2(q, joint, h, 1)) < 1e-4);
  }
  // the sharp truncation has a slope jump there, the smoothed one does not
  auto slope_jump = [](const RadialProfile &p, double c) {
    double h = 1e-6;
    return (p.value_c(c + h) - p.value_c(c)) / h - (p.value_c(c) - p.value_c(c - h)) / h;
  };
  CHECK(slope_jump(base, base.c0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::fabs(slope_jump(q, q.c0)) < 1e-4);
}

TEST_CASE("radial derivative matches finite differences") {
  for (auto kind : {ProfileKind::LogLog, ProfileKind::Log}) {
    RadialProfile p = kind == ProfileKind::LogLog ? smooth(loglog_profile(0.3, 1, 2, 10), 0.1)
                                                  : log_profile(0.3, 1, 2, 1.0, 0.1);
    for (double x : {0.05, 0.3, 0.5, 0.7, 0.95}) {
      double c = p.c0 + x * p.band;
      double r = std::exp(p.log_radius(c)), h = r * 1e-6;
      double fd = (p.value(r + h) - p.value(r - h)) / (2 * h);
      double an = p.radial_derivative(r);
      CHECK(std::fabs(fd - an) / std::fabs(an) < 1e-5);
    }
  }
}

TEST_CASE("log profile energy and budget") {
  for (int n : {2, 3})
    for (double w : {0.0, 0.1, 0.25}) {
      RadialProfile p = log_profile(0.2, 3.0, n, 0.5, w);
      double e = profile_energy(p);
      CHECK(e < 0.5);
      if (w == 0) CHECK(std::fabs(e - closed_form_energy(p)) / e < 1e-10);
      CHECK(std::exp(p.log_support_radius()) == doctest::Approx(0.1));
    }
}

TEST_CASE("zero profile and quadrature failure") {
  RadialProfile z;
  z.c0 = 2;
  CHECK(profile_energy(z) == 0.0);
  RadialProfile p = smooth(loglog_profile(0.1, 1, 2, 0.01), 0.2);
  CHECK_THROWS_AS(profile_energy(p, 1e-300), QuadratureError);
}

TEST_CASE("profile json round trip") {
  RadialProfile p = loglog_profile(0.05, 2, 3, 1e-4, 0.1);
  auto j = to_json(p, 9);
  CHECK(j.begin().key() == "kind");
  CHECK(j["table_log_r_rho"].size() == 9);
  RadialProfile q = profile_from_json(nlohmann::json::parse(j.dump()));
  CHECK(q.c0 == p.c0);
  CHECK(q.band == p.band);
  CHECK(q.width == p.width);
  CHECK(q.n == 3);
}
