#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "cantorsurf/curve.hpp"
#include "cantorsurf/profile.hpp"
#include "cantorsurf/vec.hpp"

namespace cantorsurf {

struct Frame {
  Vec3 t, v1, v2;  // (v1, v2, t) positively oriented
};

// Rotation-minimizing normal frame sampled along an arc-length curve on [s0, s1].
struct FrameField {
  double s0 = 0, s1 = 0, step = 0;
  std::vector<Vec3> pos, t, v1, v2;
  std::vector<Vec3> d1, d2;  // dv1/ds, dv2/ds from the rotation-minimizing ODE
  std::vector<Vec3> accel;

  std::size_t size() const { return pos.size(); }
  double param(std::size_t i) const { return s0 + step * double(i); }
  // Hermite interpolation of the normals, re-projected against the exact tangent
  Frame at(double s, const Vec3 &tangent) const;
  // derivatives of v1, v2 at s
  std::pair<Vec3, Vec3> derivs(double s, const Vec3 &tangent, const Vec3 &acc) const;

  double max_orthonormality_error() const;
  double min_determinant() const;
  double max_determinant() const;
  double max_increment() const;  // largest angle change of t or v1 between adjacent samples
  double total_twist() const;    // sum of rotations about the tangent beyond parallel transport
};

// Double-reflection propagation on [-1, L + 1] with s = 0 and s = L on the grid. `v1` is projected against the
// start tangent; v2 = t x v1.
FrameField frame_along(const Curve &c, const Vec3 &v1, double step);
// Generic curve given by position only; tangents by central differences, throws DomainError if |pos'| - 1 > 1e-3.
FrameField frame_along(const std::function<Vec3(double)> &pos, double s0, double s1, const Vec3 &v1, double step);

// Phi(x1, x2, x3) = gamma(x3) + x1 v1(x3) + x2 v2(x3) on the cylinder of radius delta, x3 in [-1, tau + 1].
struct TubeMap {
  Curve curve;
  FrameField frames;
  double delta = 0;
  double tau = 0;

  Vec3 eval(const Vec3 &x) const;
  // columns dPhi/dx1, dPhi/dx2, dPhi/dx3
  std::array<Vec3, 3> jacobian(const Vec3 &x) const;
};

TubeMap make_tube(const Curve &c, const Vec3 &v1, double delta, double step = 0);
// throws DomainError outside the extended cylinder
Vec3 tube_map(const TubeMap &tube, const Vec3 &x);
// 0.9 * min(1/max curvature, half the min distance between samples further apart than pi/max curvature), capped
double max_tube_radius(const Curve &c, const FrameField &frames,
                       double cap = std::numeric_limits<double>::infinity());

struct EnergyCertificate {
  double D = 0;             // sampled sup of |DPhi|_HS, inflated by 10%
  double chain_constant = 0;  // sqrt(n)^n * area of the unit n-disk
  double log_bound = 0;     // log of sqrt(n)^n D^n int (1 + |grad rho|)^n
  double bound = 0;         // exp(log_bound), 0 when it underflows
  double budget = 0;
  double log_budget = 0;
  bool meshable = true;     // plateau radius >= 1e-12 delta
};

struct TentacleOptions {
  ProfileKind kind = ProfileKind::LogLog;
  double width = 0.1;
  bool require_meshable = false;
  double step = 0;  // frame sampling step, 0 picks one from delta
};

struct Tentacle {
  TubeMap tube;
  RadialProfile profile;
  Vec2 center{};
  double delta = 0;
  EnergyCertificate cert;

  // gamma_delta(x) = Phi(x - p, rho(|x - p|))
  Vec3 eval(Vec2 x) const;
  // columns d gamma / dx1, d gamma / dx2 by the chain rule
  std::array<Vec3, 2> jacobian(Vec2 x) const;
};

// The whole curve is the active segment, tau = its length. n must be 2 (surfaces in R^3).
// Throws BudgetInfeasible when no profile meets the budget at this delta, or when meshing is required and the
// plateau radius drops below 1e-12 delta.
Tentacle make_tentacle(const Curve &curve, const Vec3 &v1, Vec2 center, double delta, int n, double budget,
                       const TentacleOptions &opt = {});

struct TentacleEnergy {
  double numeric = 0;
  double bound = 0;
  double flat = 0;    // the isometric disk alone, n^{n/2} * area
  double excess = 0;  // numeric - flat
};

TentacleEnergy tentacle_energy(const Tentacle &t, int angular_samples = 32, double rel_tol = 1e-10);

} // namespace cantorsurf
