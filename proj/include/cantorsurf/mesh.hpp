#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cantorsurf/vec.hpp"

namespace cantorsurf {

using Tri = std::array<std::uint32_t, 3>;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> faces;  // counter-clockwise seen from outside

  std::size_t size() const { return faces.size(); }
  // drops unreferenced vertices, keeping the relative order of the rest
  Mesh compacted() const;
};

struct TopologyReport {
  long vertices = 0, edges = 0, faces = 0;
  long euler = 0;
  long boundary_edges = 0;      // edges used by one face
  long nonmanifold_edges = 0;   // edges used by more than two faces
  long misoriented_edges = 0;   // interior edges traversed twice in the same direction
  bool closed() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
  bool oriented() const { return misoriented_edges == 0; }
};

TopologyReport topology(const Mesh &m);
long euler_characteristic(const Mesh &m);
// closed loops of boundary edges, each in traversal order
std::vector<std::vector<std::uint32_t>> boundary_loops(const Mesh &m);
double signed_volume(const Mesh &m);
double area(const Mesh &m);
// largest angle between normals of faces sharing an edge
double max_dihedral_turn(const Mesh &m);

void write_obj(const Mesh &m, const std::string &path);
void write_ply(const Mesh &m, const std::string &path);  // binary little endian
Mesh read_obj(const std::string &path);
Mesh read_ply(const std::string &path);

} // namespace cantorsurf
