#include "cantorsurf/profile.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <string>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// P(0)=P'(0)=P''(0)=0, P(1)=1/2, P'(1)=1, P''(1)=0
double P(double t) { return t * t * t - 0.5 * t * t * t * t; }
double P1(double t) { return 3 * t * t - 2 * t * t * t; }
double P2(double t) { return 6 * t - 6 * t * t; }

void check_n(int n) {
  if (n < 2) throw ParameterError("integrability exponent n must be >= 2, got " + std::to_string(n));
}

} // namespace

double sphere_area(int dim) {
  double h = (dim + 1) / 2.0;
  return 2 * std::pow(kPi, h) / std::tgamma(h);
}

double ball_volume(int dim) { return std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0 + 1); }

double eta(double r) {
  if (!(r > 0) || r >= std::exp(-1.0)) throw DomainError("eta needs 0 < |x| < 1/e, got " + std::to_string(r));
  return std::log(-std::log(r));
}

double eta_gradient(double r) {
  if (!(r > 0) || r >= std::exp(-1.0)) throw DomainError("eta needs 0 < |x| < 1/e, got " + std::to_string(r));
  return 1.0 / (r * std::fabs(std::log(r)));
}

double truncate(double s, double t, double r) {
  if (!(s < t)) throw ParameterError("truncation needs s < t");
  if (r < 0) throw DomainError("negative radius");
  if (r == 0) return t - s;
  if (r >= std::exp(-1.0)) return 0;
  double e = std::log(-std::log(r));
  return e >= t ? t - s : e <= s ? 0.0 : e - s;
}

double truncation_energy(double s, double tau, int n) {
  double k = n - 1;
  return sphere_area(n - 1) / k * std::exp(-s * k) * -std::expm1(-tau * k);
}

double log_truncation_energy(double s, double tau, int n) {
  double k = n - 1;
  return std::log(sphere_area(n - 1) / k) - s * k + std::log(-std::expm1(-tau * k));
}

double blend_slope(double width) { return 1.0 / (1.0 - width); }

double smoothing_slack(double width, int n) { return std::pow(blend_slope(width), n) - 1.0; }

double blend(double x, double w) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  if (w <= 0) return x;
  double m = blend_slope(w);
  if (x < w) return m * w * P(x / w);
  if (x > 1 - w) return 1 - m * w * P((1 - x) / w);
  return m * w / 2 + m * (x - w);
}

double blend_d1(double x, double w) {
  if (x <= 0 || x >= 1) return 0;
  if (w <= 0) return 1;
  double m = blend_slope(w);
  if (x < w) return m * P1(x / w);
  if (x > 1 - w) return m * P1((1 - x) / w);
  return m;
}

double blend_d2(double x, double w) {
  if (x <= 0 || x >= 1 || w <= 0) return 0;
  double m = blend_slope(w);
  if (x < w) return m / w * P2(x / w);
  if (x > 1 - w) return -m / w * P2((1 - x) / w);
  return 0;
}

double RadialProfile::log_radius(double c) const { return kind == ProfileKind::LogLog ? -std::exp(c) : -c; }

double RadialProfile::coord(double log_r) const {
  return kind == ProfileKind::LogLog ? std::log(-log_r) : -log_r;
}

double RadialProfile::value_c(double c) const {
  if (band <= 0) return c >= c0 ? tau : 0;
  return tau * blend((c - c0) / band, width);
}

double RadialProfile::deriv_c(double c) const {
  if (band <= 0) return 0;
  return tau / band * blend_d1((c - c0) / band, width);
}

double RadialProfile::deriv2_c(double c) const {
  if (band <= 0) return 0;
  return tau / (band * band) * blend_d2((c - c0) / band, width);
}

double RadialProfile::value(double r) const {
  if (r <= 0) return tau;
  if (r >= 1) return 0;
  return value_log(std::log(r));
}

double RadialProfile::radial_derivative_log(double log_r) const {
  if (log_r >= 0) return 0;
  double rc = deriv_c(coord(log_r));
  if (rc == 0) return 0;
  // dc/dr: 1/(r log r) for log-log, -1/r for log
  double inv_r = std::exp(-log_r);
  return kind == ProfileKind::LogLog ? rc * inv_r / log_r : -rc * inv_r;
}

double RadialProfile::radial_derivative(double r) const {
  if (r <= 0 || r >= 1) return 0;
  return radial_derivative_log(std::log(r));
}

double RadialProfile::energy_weight(double c) const {
  return kind == ProfileKind::LogLog ? std::exp(-(n - 1) * c) : 1.0;
}

SolveResult solve_s(double delta, double tau, int n, double budget, double slack) {
  if (!(delta > 0) || delta >= std::exp(-1.0)) throw DomainError("solve_s needs 0 < delta < 1/e");
  if (!(budget > 0)) throw ParameterError("budget must be positive");
  return solve_s_log(std::log(delta), tau, n, std::log(budget), slack);
}

SolveResult solve_s_log(double log_delta, double tau, int n, double log_budget, double slack) {
  check_n(n);
  if (!(log_delta < -1)) throw DomainError("solve_s needs 0 < delta < 1/e");
  if (!(tau > 0)) throw ParameterError("tau must be positive");
  if (std::isnan(log_budget) || log_budget == -HUGE_VAL) throw ParameterError("budget must be positive");
  if (slack < 0) throw ParameterError("slack must be >= 0");

  const double log_slack = std::log1p(slack);
  auto excess = [&](double s) { return log_truncation_energy(s, tau, n) + log_slack - log_budget; };
  // support e^{-e^s} <= delta/2  <=>  e^s >= log(2/delta)
  double lo = std::log(std::log(2.0) - log_delta);
  SolveResult out;
  if (excess(lo) < 0) {
    out.s = lo;
  } else {
    double hi = lo + 1;
    while (excess(hi) >= 0) hi = lo + 2 * (hi - lo);
    auto tol = [](double a, double b) { return std::fabs(b - a) < 1e-6; };
    auto br = boost::math::tools::bisect(excess, lo, hi, tol);
    out.s = br.second;
    if (excess(out.s) >= 0) throw InternalError("solve_s bracket lost the budget side");
  }
  out.log_log_plateau = out.s + tau;
  return out;
}

RadialProfile loglog_profile(double delta, double tau, int n, double budget, double width) {
  if (width < 0 || width > 0.25) throw ParameterError("smoothing width must lie in [0, 1/4]");
  SolveResult r = solve_s(delta, tau, n, budget, smoothing_slack(width, n));
  RadialProfile p;
  p.kind = ProfileKind::LogLog;
  p.n = n;
  p.delta = delta;
  p.tau = tau;
  p.c0 = r.s;
  p.band = tau;
  p.width = width;
  return p;
}

RadialProfile log_profile(double delta, double tau, int n, double budget, double width) {
  check_n(n);
  if (!(delta > 0) || delta >= 2) throw DomainError("log profile needs 0 < delta < 2");
  if (!(tau >= 0)) throw ParameterError("tau must be >= 0");
  if (!(budget > 0)) throw ParameterError("budget must be positive");
  if (width < 0 || width > 0.25) throw ParameterError("smoothing width must lie in [0, 1/4]");
  RadialProfile p;
  p.kind = ProfileKind::Log;
  p.n = n;
  p.delta = delta;
  p.tau = tau;
  p.c0 = std::log(2 / delta);
  p.width = width;
  // sigma tau^n L^{1-n} (1 + slack) < budget
  double need = sphere_area(n - 1) * std::pow(tau, n) * (1 + smoothing_slack(width, n)) / budget;
  p.band = tau > 0 ? std::pow(need, 1.0 / (n - 1)) * (1 + 1e-9) : 0;
  return p;
}

RadialProfile smooth(const RadialProfile &p, double width) {
  if (!(width > 0) || width > 0.25) throw ParameterError("smoothing width must lie in (0, 1/4]");
  RadialProfile q = p;
  q.width = width;
  return q;
}

double closed_form_energy(const RadialProfile &p) {
  if (p.tau <= 0 || p.band <= 0) return 0;
  if (p.kind == ProfileKind::LogLog) return truncation_energy(p.c0, p.band, p.n) * std::pow(p.tau / p.band, p.n);
  return sphere_area(p.n - 1) * std::pow(p.tau, p.n) * std::pow(p.band, 1 - p.n);
}

double profile_energy(const RadialProfile &p, double rel_tol) {
  check_n(p.n);
  if (p.tau <= 0 || p.band <= 0) return 0;
  // integrate over the normalized band x = (c - c0) / band; w(c) / w(c0) keeps large c0 from underflowing
  const double scale = sphere_area(p.n - 1) * std::pow(p.tau / p.band, p.n) * p.band * p.energy_weight(p.c0);
  auto f = [&](double x) {
    double ratio = p.kind == ProfileKind::LogLog ? std::exp(-(p.n - 1) * p.band * x) : 1.0;
    return std::pow(std::fabs(blend_d1(x, p.width)), p.n) * ratio;
  };
  double cuts[4] = {0, p.width, 1 - p.width, 1};
  double total = 0, err_total = 0;
  for (int i = 0; i < 3; ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    double err = 0;
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], 20, rel_tol, &err);
    err_total += err;
  }
  double achieved = total > 0 ? err_total / total : err_total;
  if (achieved > 100 * rel_tol && err_total > 1e-300)
    throw QuadratureError("profile quadrature reached only " + std::to_string(achieved), achieved);
  return scale * total;
}

nlohmann::ordered_json to_json(const RadialProfile &p, int table_samples) {
  nlohmann::ordered_json j;
  j["kind"] = p.kind == ProfileKind::LogLog ? "loglog" : "log";
  j["n"] = p.n;
  j["delta"] = p.delta;
  j["tau"] = p.tau;
  j["c0"] = p.c0;
  j["band"] = p.band;
  j["smoothing_width"] = p.width;
  j["log_support_radius"] = p.log_support_radius();
  j["log_plateau_radius"] = p.log_plateau_radius();
  j["closed_form_energy"] = closed_form_energy(p);
  auto table = nlohmann::ordered_json::array();
  for (int i = 0; i < table_samples && table_samples > 1; ++i) {
    double c = p.c0 + p.band * i / (table_samples - 1);
    table.push_back({p.log_radius(c), p.value_c(c)});
  }
  j["table_log_r_rho"] = table;
  return j;
}

RadialProfile profile_from_json(const nlohmann::json &j) {
  RadialProfile p;
  std::string kind = j.at("kind").get<std::string>();
  if (kind != "loglog" && kind != "log") throw ParameterError("unknown profile kind '" + kind + "'");
  p.kind = kind == "loglog" ? ProfileKind::LogLog : ProfileKind::Log;
  p.n = j.at("n").get<int>();
  p.delta = j.at("delta").get<double>();
  p.tau = j.at("tau").get<double>();
  p.c0 = j.at("c0").get<double>();
  p.band = j.at("band").get<double>();
  p.width = j.at("smoothing_width").get<double>();
  return p;
}

} // namespace cantorsurf
