#pragma once

#include <cstdint>
#include <vector>

#include "cantorsurf/mesh.hpp"
#include "cantorsurf/vec.hpp"

namespace cantorsurf {

// Planar triangulation helpers. Indices refer to a caller-owned point list; every output triangle is
// counter-clockwise in the plane.

// points on a circle, angles 2 pi (j + phase) / m
std::vector<Vec2> circle_points(Vec2 center, double radius, int m, double phase = 0);

// strip between two counter-clockwise rings, `inner` nested inside `outer`; ring sizes may differ
std::vector<Tri> ring_strip(const std::vector<Vec2> &pts, const std::vector<std::uint32_t> &outer,
                            const std::vector<std::uint32_t> &inner);

// fan from a center point to a counter-clockwise ring around it
std::vector<Tri> ring_fan(const std::vector<std::uint32_t> &ring, std::uint32_t center);

// Ear clipping of a simple counter-clockwise outer polygon with disjoint holes (any orientation), holes
// bridged to the outer boundary first. Exact orientation signs; throws InternalError if no ear is found.
std::vector<Tri> triangulate_with_holes(const std::vector<Vec2> &pts, const std::vector<std::uint32_t> &outer,
                                        const std::vector<std::vector<std::uint32_t>> &holes);

// Splits the triangle containing pts[idx] (two triangles if it lies on an edge). Throws DomainError if the
// point is outside every triangle.
void insert_point(std::vector<Tri> &tris, const std::vector<Vec2> &pts, std::uint32_t idx);

double signed_area(const std::vector<Vec2> &pts, const std::vector<std::uint32_t> &loop);

} // namespace cantorsurf
