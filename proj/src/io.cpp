#include "cantorsurf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

ojson vec(const Vec3 &p) { return ojson::array({p.x, p.y, p.z}); }
ojson vec(const Vec2 &p) { return ojson::array({p.x, p.y}); }

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool informational(const LemmaReport &r) { return r.lemma != "tail-disjoint" && r.level < 2; }

const char *geometry_name(GeometryKind k) {
  switch (k) {
  case GeometryKind::Segment: return "segment";
  case GeometryKind::Ball: return "ball";
  case GeometryKind::TorusUnion: return "torus_union";
  }
  return "?";
}

} // namespace

MeshFormat parse_mesh_format(const std::string &s) {
  if (s == "obj") return MeshFormat::Obj;
  if (s == "ply") return MeshFormat::Ply;
  if (s == "json") return MeshFormat::Json;
  throw ConfigError("unknown format '" + s + "' (expected obj, ply or json)");
}

std::string extension(MeshFormat f) {
  switch (f) {
  case MeshFormat::Obj: return "obj";
  case MeshFormat::Ply: return "ply";
  case MeshFormat::Json: return "json";
  }
  return "?";
}

ojson mesh_json(const Mesh &m) {
  ojson j;
  auto v = ojson::array();
  for (const auto &p : m.vertices) v.push_back(vec(p));
  auto f = ojson::array();
  for (const auto &t : m.faces) f.push_back({t[0], t[1], t[2]});
  j["vertices"] = std::move(v);
  j["faces"] = std::move(f);
  return j;
}

Mesh mesh_from_json(const ojson &j) {
  Mesh m;
  for (const auto &p : j.at("vertices")) m.vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  for (const auto &t : j.at("faces")) {
    Tri tri{t.at(0).get<std::uint32_t>(), t.at(1).get<std::uint32_t>(), t.at(2).get<std::uint32_t>()};
    for (auto i : tri)
      if (i >= m.vertices.size()) throw ParameterError("mesh json: face index out of range");
    m.faces.push_back(tri);
  }
  return m;
}

void write_mesh(const Mesh &m, const std::string &path, MeshFormat f) {
  switch (f) {
  case MeshFormat::Obj: write_obj(m, path); return;
  case MeshFormat::Ply: write_ply(m, path); return;
  case MeshFormat::Json: write_json(mesh_json(m), path); return;
  }
}

Mesh read_mesh(const std::string &path) {
  auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  switch (parse_mesh_format(ext)) {
  case MeshFormat::Obj: return read_obj(path);
  case MeshFormat::Ply: return read_ply(path);
  case MeshFormat::Json: return mesh_from_json(read_json(path));
  }
  throw InternalError("unreachable");
}

ojson cells_json(const CantorSystem &sys, int depth) {
  auto arr = ojson::array();
  for (int k = 0; k <= depth; ++k)
    for (const auto &c : sys.cells_at(k)) {
      ojson j;
      j["index"] = c.index.str();
      j["geometry"] = geometry_name(c.geometry.kind);
      switch (c.geometry.kind) {
      case GeometryKind::Segment:
        j["a"] = vec(c.geometry.a);
        j["b"] = vec(c.geometry.b);
        break;
      case GeometryKind::Ball:
        j["center"] = vec(c.geometry.ball_center);
        j["radius"] = c.geometry.ball_radius;
        break;
      case GeometryKind::TorusUnion:
        j["tori"] = c.geometry.tori;
        break;
      }
      j["diameter"] = c.diameter;
      arr.push_back(std::move(j));
    }
  return arr;
}

ojson tree_json(const CantorTree &tree, int samples) {
  ojson j;
  j["depth"] = tree.depth;
  auto anchors = ojson::array();
  for (const auto &[idx, a] : tree.anchors)
    anchors.push_back({{"index", idx.str()}, {"position", vec(a.position)}, {"clearance", a.clearance},
                       {"cell_dist", a.cell_dist}});
  auto branches = ojson::array();
  for (const auto &[idx, b] : tree.branches) {
    auto pts = ojson::array();
    for (const auto &p : b.curve.sample(samples)) pts.push_back(vec(p));
    branches.push_back({{"index", idx.str()}, {"length", b.length}, {"junction_angle", b.junction_angle},
                        {"max_deviation", b.max_deviation}, {"min_clearance", b.min_clearance},
                        {"polyline", std::move(pts)}});
  }
  j["anchors"] = std::move(anchors);
  j["branches"] = std::move(branches);
  return j;
}

void write_tree_obj(const CantorTree &tree, const std::string &path, int samples) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << std::setprecision(17);
  std::size_t base = 1;
  for (const auto &[idx, b] : tree.branches) {
    out << "o J" << idx.str() << "\n";
    auto pts = b.curve.sample(samples);
    for (const auto &p : pts) out << "v " << p.x << " " << p.y << " " << p.z << "\n";
    out << "l";
    for (std::size_t i = 0; i < pts.size(); ++i) out << " " << base + i;
    out << "\n";
    base += pts.size();
  }
  if (!out) throw ParameterError("write failed for '" + path + "'");
}

ojson ledger_json(const EnergyLedger &l) {
  ojson j;
  j["schedule"] = l.schedule.name();
  j["log_total"] = l.log_total;
  j["total"] = l.total();
  j["log_series_bound"] = l.log_series_bound;
  auto levels = ojson::array();
  for (const auto &v : l.levels)
    levels.push_back({{"level", v.level}, {"count", v.count}, {"log_sum", v.log_sum}, {"log_cap", v.log_cap},
                      {"pass", v.pass()}});
  j["levels"] = std::move(levels);
  auto entries = ojson::array();
  for (const auto &e : l.entries) {
    ojson x{{"index", e.index.str()}, {"level", e.level}, {"log_bound", e.log_bound}, {"log_budget", e.log_budget},
            {"pass", e.pass()}};
    if (e.numeric >= 0) x["numeric"] = e.numeric;
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  return j;
}

ojson sites_json(const SurfaceApprox &a) {
  auto arr = ojson::array();
  for (const auto &[idx, s] : a.sites) {
    ojson j{{"index", idx.str()},       {"level", s.level},
            {"offset", vec(s.offset)},  {"log_delta", s.log_delta},
            {"log_delta_prime", s.log_delta_prime}};
    if (a.mode == BuildMode::Mesh) {
      j["delta"] = s.delta;
      j["image"] = vec(s.image);
      j["normal"] = vec(s.normal);
      if (auto g = a.grafts.find(idx); g != a.grafts.end()) {
        j["tau"] = g->second.curve.length();
        j["tail_clearance"] = g->second.tail_clearance;
        j["tip"] = vec(a.vertices[g->second.tip]);
      }
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

ojson exceptional_json(const ExceptionalSet &e) {
  ojson j;
  auto rows = ojson::array();
  for (const auto &r : e.rows)
    rows.push_back({{"level", r.level}, {"log_count", r.log_count}, {"log_inv_scale", r.log_inv_scale},
                    {"estimate", r.estimate}});
  j["rows"] = std::move(rows);
  j["strictly_decreasing"] = e.strictly_decreasing();
  return j;
}

ojson report_json(const LemmaReport &r) {
  ojson j;
  j["lemma"] = r.lemma;
  j["level"] = r.level;
  j["pass"] = r.pass();
  j["samples_per_item"] = r.samples_per_item;
  if (!r.note.empty()) j["note"] = r.note;
  auto entries = ojson::array();
  for (const auto &e : r.entries)
    entries.push_back({{"index", e.index}, {"measured", e.measured}, {"bound", e.bound}, {"pass", e.pass}});
  j["entries"] = std::move(entries);
  return j;
}

ojson stage_json(const StageCheck &s) {
  return {{"stage", s.stage},
          {"pass", s.pass()},
          {"vertices", s.topology.vertices},
          {"faces", s.topology.faces},
          {"euler", s.topology.euler},
          {"closed", s.topology.closed()},
          {"oriented", s.topology.oriented()},
          {"intersecting_pairs", s.intersections.pairs.size()},
          {"tips_exact", s.tips_exact}};
}

ojson ledger_report_json(const LedgerReport &r) {
  ojson j;
  j["schedule"] = r.schedule;
  j["pass"] = r.pass();
  j["log_total"] = r.log_total;
  j["log_series"] = r.log_series;
  if (r.log_target) j["log_target"] = *r.log_target;
  auto lines = ojson::array();
  for (const auto &l : r.lines) {
    ojson x{{"level", l.level},     {"count", l.count},     {"passing", l.passing},
            {"log_sum", l.log_sum}, {"log_cap", l.log_cap}, {"pass", l.pass}};
    if (r.paper) x["log_paper"] = l.log_paper;
    lines.push_back(std::move(x));
  }
  j["lines"] = std::move(lines);
  return j;
}

ojson suite_json(const SuiteReport &s) {
  ojson j;
  j["pass"] = s.pass();
  auto stages = ojson::array();
  for (const auto &st : s.stages) stages.push_back(stage_json(st));
  j["stages"] = std::move(stages);
  for (const auto &[key, group] : {std::pair{"image_lemma", &s.image}, {"continuity", &s.continuity},
                                   {"tail_disjointness", &s.tail}}) {
    auto arr = ojson::array();
    for (const auto &r : *group) arr.push_back(report_json(r));
    j[key] = std::move(arr);
  }
  auto table = ojson::array();
  for (const auto &r : s.table) {
    ojson x{{"level", r.level}, {"bound", r.bound}};
    if (r.measured >= 0) x["measured"] = r.measured;
    table.push_back(std::move(x));
  }
  j["continuity_table"] = std::move(table);
  j["continuity_table_decreasing"] = s.table.empty() || strictly_decreasing(s.table);
  j["ledger"] = ledger_report_json(s.ledger);
  return j;
}

std::string ledger_text(const LedgerReport &r) {
  std::ostringstream o;
  o << "energy ledger, schedule " << r.schedule << "\n";
  o << "  level  count  passing   log_sum     log_cap" << (r.paper ? "   log_2^-nk" : "") << "  pass\n";
  for (const auto &l : r.lines) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %5d  %5d  %7d  %10.4f  %10.4f", l.level, l.count, l.passing, l.log_sum, l.log_cap);
    o << buf;
    if (r.paper) o << fmt("  %10.4f", l.log_paper);
    o << "  " << (l.pass ? "yes" : "NO") << "\n";
  }
  o << "  total " << fmt("%.6g", std::exp(r.log_total)) << ", series bound " << fmt("%.6g", std::exp(r.log_series));
  if (r.log_target) o << ", target " << fmt("%.6g", std::exp(*r.log_target));
  o << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
  return o.str();
}

std::string suite_text(const SuiteReport &s) {
  std::ostringstream o;
  for (const auto &st : s.stages)
    o << "stage " << st.stage << ": faces " << st.topology.faces << ", chi " << st.topology.euler << ", closed "
      << st.topology.closed() << ", oriented " << st.topology.oriented() << ", intersecting pairs "
      << st.intersections.pairs.size() << ", tips exact " << st.tips_exact << ": " << (st.pass() ? "PASS" : "FAIL")
      << "\n";
  for (const auto *group : {&s.image, &s.continuity, &s.tail})
    for (const auto &r : *group) {
      o << r.lemma << " level " << r.level << ": " << r.entries.size() << " items, worst margin "
        << fmt("%.4g", r.entries.empty() ? 0.0 : r.worst_margin()) << ", samples " << r.samples_per_item << ": "
        << (r.pass() ? "PASS" : informational(r) ? "outside bound" : "FAIL");
      if (!r.note.empty()) o << " (" << (informational(r) ? "not counted: " : "") << r.note << ")";
      o << "\n";
    }
  if (!s.table.empty()) {
    o << "continuity table\n  level       bound    measured\n";
    for (const auto &r : s.table) {
      o << fmt("  %5.0f", r.level) << fmt("  %10.4g", r.bound);
      o << (r.measured >= 0 ? fmt("  %10.4g", r.measured) : std::string("           -")) << "\n";
    }
    o << "  strictly decreasing: " << (strictly_decreasing(s.table) ? "yes" : "NO") << "\n";
  }
  o << ledger_text(s.ledger);
  o << "suite: " << (s.pass() ? "PASS" : "FAIL") << "\n";
  return o.str();
}

void write_json(const ojson &j, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw ParameterError("write failed for '" + path + "'");
}

ojson read_json(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read '" + path + "'");
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw ParameterError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string file_digest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read '" + path + "'");
  std::uint64_t h = 1469598103934665603ull;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= std::uint8_t(*it);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace cantorsurf
