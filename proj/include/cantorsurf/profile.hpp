#pragma once

#include <json.hpp>

namespace cantorsurf {

// Radii are never stored linearly. Each kind has a native coordinate c with rho = tau * B((c - c0) / band):
//   LogLog: c = log(-log r), band = tau (the truncated log-log bump)
//   Log:    c = -log r, band chosen from the budget (meshable; the log-log plateau underflows)
enum class ProfileKind { LogLog, Log };

struct RadialProfile {
  ProfileKind kind = ProfileKind::LogLog;
  int n = 2;
  double delta = 0;
  double tau = 0;
  double c0 = 0;     // LogLog: s. Log: -log(support radius)
  double band = 0;
  double width = 0;  // smoothing width, 0 is the sharp truncation

  double s() const { return c0; }
  double c1() const { return c0 + band; }
  // log r at native coordinate c
  double log_radius(double c) const;
  double coord(double log_r) const;
  double log_support_radius() const { return log_radius(c0); }
  double log_plateau_radius() const { return log_radius(c1()); }

  double value_c(double c) const;
  double deriv_c(double c) const;   // d rho / dc
  double deriv2_c(double c) const;
  double value(double r) const;
  double value_log(double log_r) const { return value_c(coord(log_r)); }
  // d rho / dr, signed (<= 0)
  double radial_derivative(double r) const;
  double radial_derivative_log(double log_r) const;
  // weight in E = sigma * int |rho_c|^n weight(c) dc
  double energy_weight(double c) const;
};

double sphere_area(int dim);  // area of the unit dim-sphere in R^{dim+1}
double ball_volume(int dim);

double eta(double r);
double eta_gradient(double r);  // |grad eta| at |x| = r
double truncate(double s, double t, double r);
double truncation_energy(double s, double tau, int n);
double log_truncation_energy(double s, double tau, int n);

// blend B on [0,1] with C^2 joints at width and 1 - width; width 0 is the identity
double blend(double x, double width);
double blend_d1(double x, double width);
double blend_d2(double x, double width);
// sup of B', so energy grows by at most this to the n
double blend_slope(double width);
double smoothing_slack(double width, int n);

struct SolveResult {
  double s = 0;
  double log_log_plateau = 0;  // s + tau, i.e. delta' = exp(-exp(s + tau))
};

// smallest s (bisection to 1e-6, upper end kept) with energy * (1 + slack) < budget and support <= delta/2
SolveResult solve_s(double delta, double tau, int n, double budget, double slack = 0);
// same with log(delta) and log(budget), for radii and budgets below the double range
SolveResult solve_s_log(double log_delta, double tau, int n, double log_budget, double slack = 0);

RadialProfile loglog_profile(double delta, double tau, int n, double budget, double width = 0);
RadialProfile log_profile(double delta, double tau, int n, double budget, double width = 0);
RadialProfile smooth(const RadialProfile &p, double width);

// closed form of the unsmoothed profile with the same parameters
double closed_form_energy(const RadialProfile &p);
// adaptive Gauss-Kronrod in the native coordinate; throws QuadratureError
double profile_energy(const RadialProfile &p, double rel_tol = 1e-10);

nlohmann::ordered_json to_json(const RadialProfile &p, int table_samples = 33);
RadialProfile profile_from_json(const nlohmann::json &j);

} // namespace cantorsurf
