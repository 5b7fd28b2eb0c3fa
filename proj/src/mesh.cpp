#include "cantorsurf/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  return (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b);
}

Vec3 face_normal(const Mesh &m, const Tri &t) {
  return cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
}

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

} // namespace

Mesh Mesh::compacted() const {
  std::vector<std::int64_t> remap(vertices.size(), -1);
  for (const auto &f : faces)
    for (auto v : f) remap[v] = 0;
  Mesh out;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (remap[i] == 0) {
      remap[i] = std::int64_t(out.vertices.size());
      out.vertices.push_back(vertices[i]);
    }
  out.faces.reserve(faces.size());
  for (const auto &f : faces)
    out.faces.push_back({std::uint32_t(remap[f[0]]), std::uint32_t(remap[f[1]]), std::uint32_t(remap[f[2]])});
  return out;
}

TopologyReport topology(const Mesh &m) {
  struct Use {
    int count = 0;
    int forward = 0;  // traversals min -> max
  };
  std::unordered_map<std::uint64_t, Use> edges;
  edges.reserve(m.faces.size() * 2);
  std::vector<char> used(m.vertices.size(), 0);
  for (const auto &f : m.faces)
    for (int i = 0; i < 3; ++i) {
      std::uint32_t a = f[i], b = f[(i + 1) % 3];
      used[a] = 1;
      Use &u = edges[edge_key(a, b)];
      ++u.count;
      if (a < b) ++u.forward;
    }
  TopologyReport r;
  r.vertices = std::count(used.begin(), used.end(), 1);
  r.edges = long(edges.size());
  r.faces = long(m.faces.size());
  r.euler = r.vertices - r.edges + r.faces;
  for (const auto &[k, u] : edges) {
    if (u.count == 1) ++r.boundary_edges;
    if (u.count > 2) ++r.nonmanifold_edges;
    if (u.count == 2 && u.forward != 1) ++r.misoriented_edges;
  }
  return r;
}

long euler_characteristic(const Mesh &m) { return topology(m).euler; }

std::vector<std::vector<std::uint32_t>> boundary_loops(const Mesh &m) {
  std::map<std::uint64_t, int> count;
  for (const auto &f : m.faces)
    for (int i = 0; i < 3; ++i) ++count[edge_key(f[i], f[(i + 1) % 3])];
  std::multimap<std::uint32_t, std::uint32_t> next;
  for (const auto &f : m.faces)
    for (int i = 0; i < 3; ++i)
      if (count[edge_key(f[i], f[(i + 1) % 3])] == 1) next.emplace(f[i], f[(i + 1) % 3]);
  std::vector<std::vector<std::uint32_t>> loops;
  while (!next.empty()) {
    auto it = next.begin();
    std::uint32_t start = it->first, cur = it->second;
    next.erase(it);
    std::vector<std::uint32_t> loop{start};
    while (cur != start) {
      loop.push_back(cur);
      auto jt = next.find(cur);
      if (jt == next.end()) break;
      cur = jt->second;
      next.erase(jt);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

double signed_volume(const Mesh &m) {
  double v = 0;
  for (const auto &f : m.faces) v += dot(m.vertices[f[0]], cross(m.vertices[f[1]], m.vertices[f[2]]));
  return v / 6;
}

double area(const Mesh &m) {
  double a = 0;
  for (const auto &f : m.faces) a += norm(face_normal(m, f));
  return a / 2;
}

double max_dihedral_turn(const Mesh &m) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> edges;
  for (std::size_t i = 0; i < m.faces.size(); ++i)
    for (int j = 0; j < 3; ++j) edges[edge_key(m.faces[i][j], m.faces[i][(j + 1) % 3])].push_back(i);
  double worst = 0;
  for (const auto &[k, fs] : edges) {
    if (fs.size() != 2) continue;
    Vec3 a = normalized(face_normal(m, m.faces[fs[0]])), b = normalized(face_normal(m, m.faces[fs[1]]));
    worst = std::max(worst, std::acos(std::clamp(dot(a, b), -1.0, 1.0)));
  }
  return worst;
}

void write_obj(const Mesh &m, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  for (const auto &v : m.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto &f : m.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw Error("write failed: " + path);
}

void write_ply(const Mesh &m, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << m.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << m.faces.size() << "\n"
      << "property list uchar uint vertex_indices\nend_header\n";
  for (const auto &v : m.vertices) {
    double xyz[3] = {v.x, v.y, v.z};
    out.write(reinterpret_cast<const char *>(xyz), sizeof xyz);
  }
  for (const auto &f : m.faces) {
    unsigned char n = 3;
    out.write(reinterpret_cast<const char *>(&n), 1);
    out.write(reinterpret_cast<const char *>(f.data()), 12);
  }
  if (!out) throw Error("write failed: " + path);
}

Mesh read_obj(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  Mesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      ss >> v.x >> v.y >> v.z;
      m.vertices.push_back(v);
    } else if (tag == "f") {
      Tri t;
      for (auto &i : t) {
        std::string tok;
        ss >> tok;
        i = std::uint32_t(std::stoul(tok.substr(0, tok.find('/'))) - 1);
      }
      m.faces.push_back(t);
    }
  }
  return m;
}

Mesh read_ply(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  std::size_t nv = 0, nf = 0;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ss(line);
    std::string a, b;
    ss >> a >> b;
    if (a == "format" && b != "binary_little_endian") throw Error("unsupported PLY format " + b);
    if (a == "element" && b == "vertex") ss >> nv;
    if (a == "element" && b == "face") ss >> nf;
  }
  Mesh m;
  m.vertices.resize(nv);
  for (auto &v : m.vertices) {
    double xyz[3];
    in.read(reinterpret_cast<char *>(xyz), sizeof xyz);
    v = {xyz[0], xyz[1], xyz[2]};
  }
  m.faces.resize(nf);
  for (auto &f : m.faces) {
    unsigned char n = 0;
    in.read(reinterpret_cast<char *>(&n), 1);
    if (n != 3) throw Error("PLY face is not a triangle");
    in.read(reinterpret_cast<char *>(f.data()), 12);
  }
  if (!in) throw Error("truncated PLY " + path);
  return m;
}

} // namespace cantorsurf
