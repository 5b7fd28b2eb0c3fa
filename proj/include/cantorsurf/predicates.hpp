#pragma once

#include "cantorsurf/vec.hpp"

namespace cantorsurf {

// Exact signs: floating-point filter first, rational fallback when the filter cannot decide.
// orient3d > 0 when d lies below the plane through a,b,c oriented counter-clockwise (Shewchuk's convention).
int orient3d(const Vec3 &a, const Vec3 &b, const Vec3 &c, const Vec3 &d);
int orient2d(double ax, double ay, double bx, double by, double cx, double cy);

// number of rational fallbacks taken so far (diagnostics)
long predicate_fallbacks();

} // namespace cantorsurf
