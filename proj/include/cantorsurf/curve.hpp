#pragma once

#include <array>
#include <vector>

#include "cantorsurf/vec.hpp"

namespace cantorsurf {

// Polynomial piece P(u) = sum c[i] u^i, u in [0,1], degree <= 5.
struct CurvePiece {
  std::array<Vec3, 6> c{};
  Vec3 pos(double u) const;
  Vec3 d1(double u) const;
  Vec3 d2(double u) const;
};

CurvePiece hermite_cubic(const Vec3 &p0, const Vec3 &d0, const Vec3 &p1, const Vec3 &d1);
CurvePiece hermite_quintic(const Vec3 &p0, const Vec3 &d0, const Vec3 &a0, const Vec3 &p1, const Vec3 &d1,
                           const Vec3 &a1);

// Arc-length parametrized chain of polynomial pieces; evaluation outside [0, L] extends linearly along the end tangents.
class Curve {
public:
  Curve() = default;
  explicit Curve(std::vector<CurvePiece> pieces);
  static Curve line(const Vec3 &a, const Vec3 &b);
  // clamped C2 cubic spline through pts with chord-length knots and end directions t0, t1 (unit)
  static Curve spline(const std::vector<Vec3> &pts, const Vec3 &t0, const Vec3 &t1);

  double length() const { return total_; }
  Vec3 pos(double s) const;
  Vec3 tangent(double s) const;
  // d^2/ds^2, the curvature vector
  Vec3 accel(double s) const;
  Vec3 start() const { return pos(0); }
  Vec3 end() const { return pos(total_); }

  std::vector<Vec3> sample(int n) const;  // n+1 points at equal arc length
  double max_curvature(int n = 2000) const;
  const std::vector<CurvePiece> &pieces() const { return pieces_; }

  // the part of the curve on [s0, L]; pieces are cut exactly
  Curve tail_from(double s0) const;
  // concatenation, assumes this->end() == other.start()
  Curve append(const Curve &other) const;

private:
  struct Table {
    std::vector<double> u, s;  // monotone arc-length table inside a piece
  };
  void locate(double s, int &piece, double &u) const;
  std::vector<CurvePiece> pieces_;
  std::vector<Table> tables_;
  std::vector<double> offsets_;  // cumulative length at piece starts
  double total_ = 0;
};

// sub-polynomial of a piece restricted to u in [u0, u1], reparametrized to [0,1]
CurvePiece restrict_piece(const CurvePiece &p, double u0, double u1);

// lower bound on min |a(s) - b(t)|, within `tol` of the true minimum; branch and bound on arc-length balls
double curve_distance(const Curve &a, const Curve &b, double tol);
// same, restricted to a(s), s in [a0, a1] and b(t), t in [b0, b1]
double curve_distance(const Curve &a, double a0, double a1, const Curve &b, double b0, double b1, double tol);

} // namespace cantorsurf
