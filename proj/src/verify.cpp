#include "cantorsurf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cantorsurf/error.hpp"
#include "cantorsurf/parallel.hpp"

namespace cantorsurf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;

double parent_diameter(const CantorSystem &sys, const BinaryIndex &index) {
  return sys.cell(index.size() >= 1 ? index.parent() : BinaryIndex{}).diameter;
}

struct RegionSamples {
  std::vector<Vec3> xs;
  double max_edge = 0;  // every point of the region's faces lies within this of a vertex
};

RegionSamples region_points(const SurfaceApprox &a, const BinaryIndex &index) {
  RegionSamples r;
  for (auto v : a.region_vertices(index, a.K)) r.xs.push_back(a.vertices[v]);
  auto scan = [&](const std::vector<Tri> &faces) {
    for (const auto &f : faces)
      for (int i = 0; i < 3; ++i) r.max_edge = std::max(r.max_edge, dist(a.vertices[f[i]], a.vertices[f[(i + 1) % 3]]));
  };
  for (const auto &[idx, g] : a.grafts) {
    if (!index.is_prefix_of(idx)) continue;
    scan(g.piece.body);
    if (g.site.level == a.K)
      for (const auto &f : g.piece.fillers) scan(f);
  }
  return r;
}

void require_mesh(const SurfaceApprox &a) {
  if (a.mode != BuildMode::Mesh) throw ParameterError("mesh checks need a mesh build");
}

std::vector<BinaryIndex> level_sites(const SurfaceApprox &a, int k) {
  std::vector<BinaryIndex> out;
  for (const auto &[idx, g] : a.grafts)
    if (g.site.level == k) out.push_back(idx);
  return out;
}

const char *kRootNote = "level 1 is informational: the root branches start at the origin, far from C";

} // namespace

double image_lemma_bound(const CantorSystem &sys, const BinaryIndex &index) {
  return std::ldexp(1.0, -index.size() + 4) + parent_diameter(sys, index);
}

double continuity_bound(const CantorSystem &sys, const BinaryIndex &index) {
  return std::ldexp(1.0, -index.size() + 4) + 2 * parent_diameter(sys, index);
}

LemmaReport verify_image_lemma(const SurfaceApprox &a, const CantorSystem &sys, int k) {
  require_mesh(a);
  if (k < 1 || k > a.K) throw ParameterError("image lemma level outside 1..K");
  LemmaReport rep;
  rep.lemma = "l2";
  rep.level = k;
  if (k == 1) rep.note = kRootNote;
  for (const auto &idx : level_sites(a, k)) {
    const BinaryIndex parent = idx.parent();
    const int d = std::min(parent.size() + 8, sys.max_depth());
    auto reg = region_points(a, idx);
    auto up = sys.dist_upper(reg.xs, parent, d);
    double m = 0;
    for (double v : up) m = std::max(m, v + reg.max_edge);
    rep.samples_per_item = std::max(rep.samples_per_item, int(reg.xs.size()));
    rep.add(idx.str(), m, image_lemma_bound(sys, idx));
  }
  return rep;
}

LemmaReport continuity_modulus(const SurfaceApprox &a, const CantorSystem &sys, const BinaryIndex &prefix) {
  require_mesh(a);
  const int k = prefix.size();
  if (k < 1 || k > a.K) throw ParameterError("continuity prefix length outside 1..K");
  LemmaReport rep;
  rep.lemma = "continuity";
  rep.level = k;
  if (k == 1) rep.note = kRootNote;
  auto [c, err] = sys.point_of(prefix, sys.max_depth());
  auto reg = region_points(a, prefix);
  double m = 0;
  for (const auto &x : reg.xs) m = std::max(m, dist(x, c) + reg.max_edge);
  rep.samples_per_item = int(reg.xs.size());
  rep.add(prefix.str(), m + err, continuity_bound(sys, prefix));
  return rep;
}

LemmaReport continuity_level(const SurfaceApprox &a, const CantorSystem &sys, int k) {
  LemmaReport rep;
  rep.lemma = "continuity";
  rep.level = k;
  if (k == 1) rep.note = kRootNote;
  for (const auto &idx : level_sites(a, k)) {
    LemmaReport one = continuity_modulus(a, sys, idx);
    rep.entries.push_back(one.entries.front());
    rep.samples_per_item = std::max(rep.samples_per_item, one.samples_per_item);
  }
  return rep;
}

std::vector<BoundRow> continuity_table(const SurfaceApprox &a, const CantorSystem &sys, int k_table) {
  std::vector<BoundRow> rows;
  k_table = std::min(k_table, sys.max_depth() + 1);
  for (int k = 1; k <= k_table; ++k) {
    BoundRow r;
    r.level = k;
    r.bound = std::ldexp(1.0, -k + 4) + 2 * sys.max_cell_diameter(k - 1);
    r.measured = -1;
    if (a.mode == BuildMode::Mesh && k <= a.K) {
      LemmaReport rep = continuity_level(a, sys, k);
      for (const auto &e : rep.entries) r.measured = std::max(r.measured, e.measured);
    }
    rows.push_back(r);
  }
  return rows;
}

bool strictly_decreasing(const std::vector<BoundRow> &rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].bound < rows[i - 1].bound)) return false;
  return rows.size() >= 2;
}

// ---------------------------------------------------------------------------------------------- tail

LemmaReport tail_disjointness(const SurfaceApprox &a, const CantorTree &tree, int k) {
  require_mesh(a);
  if (k < 0 || k > a.K) throw ParameterError("tail check stage outside 0..K");
  if (tree.depth <= k) throw ParameterError("T_k is empty: the tree depth must exceed k");
  const Mesh m = a.stage(k);
  const Bvh bvh(m);
  const auto tail = tree.tail(k);
  std::vector<LemmaEntry> entries(tail.size());
  std::vector<int> evals(tail.size(), 0);
  parallel_for(
      tail.size(),
      [&](std::size_t lo, std::size_t hi, unsigned) {
        for (std::size_t bi = lo; bi < hi; ++bi) {
          const BranchCurve &b = *tail[bi];
          const Curve &c = b.curve;
          const double L = c.length();
          double skip = 0;
          if (b.index.size() == k + 1)
            skip = k == 0 ? 0.05 : std::exp(a.grafts.at(b.index.parent()).site.log_delta_prime);
          // mesh certificate by arc bisection
          double mesh_lb = HUGE_VAL;
          bool crossed = false;
          std::vector<std::pair<double, double>> stack;
          const int n0 = 64;
          for (int i = n0 - 1; i >= 0; --i) stack.push_back({skip + (L - skip) * i / n0, skip + (L - skip) * (i + 1) / n0});
          while (!stack.empty()) {
            auto [s0, s1] = stack.back();
            stack.pop_back();
            const double half = 0.505 * (s1 - s0);
            const Vec3 p = c.pos((s0 + s1) / 2);
            const double d = bvh.nearest(p);
            ++evals[bi];
            if (d > half) {
              mesh_lb = std::min(mesh_lb, d - half);
              continue;
            }
            if (half < 1e-15 * (1 + norm(p))) {
              crossed = true;
              mesh_lb = 0;
              break;
            }
            const double mid = (s0 + s1) / 2;
            stack.push_back({mid, s1});
            stack.push_back({s0, mid});
          }
          // tube certificate
          double tube_lb = HUGE_VAL;
          for (const auto &[gi, g] : a.grafts) {
            if (g.site.level > k) continue;
            if (b.index.size() == k + 1 && b.index.parent() == gi) continue;
            double d = curve_distance(c, g.curve, 0.01 * g.site.delta);
            tube_lb = std::min(tube_lb, d - g.site.delta);
          }
          LemmaEntry e;
          e.index = b.index.str();
          e.measured = 0;
          e.bound = crossed ? 0.0 : std::min(mesh_lb, tube_lb);
          e.pass = e.measured < e.bound;
          entries[bi] = e;
        }
      },
      1);
  LemmaReport rep;
  rep.lemma = "tail-disjoint";
  rep.level = k;
  rep.entries = std::move(entries);
  int mx = 0;
  for (int v : evals) mx = std::max(mx, v);
  rep.samples_per_item = mx;
  rep.note = "certified lower bounds: arc bisection against the stage mesh and tube radius against tentacle axes";
  return rep;
}

// ---------------------------------------------------------------------------------------------- ledger

bool LedgerReport::pass() const {
  for (const auto &l : lines)
    if (!l.pass) return false;
  if (!(log_total <= log_series + 1e-12)) return false;
  if (log_target && !(log_total <= *log_target)) return false;
  return true;
}

double LedgerReport::total() const { return std::exp(log_total); }

LedgerReport energy_ledger_check(const SurfaceApprox &a, std::optional<double> log_target) {
  const EnergyLedger &L = a.ledger;
  LedgerReport r;
  r.schedule = L.schedule.name();
  r.paper = L.schedule.kind == BudgetSchedule::Kind::Paper;
  r.log_total = L.log_total;
  r.log_series = L.schedule.log_series(a.K);
  r.log_target = log_target;
  for (const auto &lv : L.levels) {
    LedgerLine line;
    line.level = lv.level;
    line.count = lv.count;
    line.log_sum = lv.log_sum;
    line.log_cap = lv.log_cap;
    for (const auto &e : L.entries)
      if (e.level == lv.level && e.pass()) ++line.passing;
    line.pass = line.passing == line.count && lv.log_sum <= lv.log_cap;
    if (r.paper) {
      line.log_paper = -double(L.schedule.n) * lv.level * kLn2;
      line.pass = line.pass && lv.log_cap < line.log_paper && lv.log_sum < line.log_paper;
    }
    r.lines.push_back(line);
  }
  return r;
}

// ---------------------------------------------------------------------------------------------- suite

StageCheck check_stage(const SurfaceApprox &a, const CantorTree &tree, int k) {
  require_mesh(a);
  StageCheck c;
  c.stage = k;
  Mesh m = a.stage(k);
  c.topology = topology(m);
  c.intersections = self_intersection(m);
  for (const auto &[idx, g] : a.grafts)
    if (g.site.level <= k && !(a.vertices[g.tip] == tree.anchor(idx).position)) c.tips_exact = false;
  return c;
}

bool SuiteReport::pass() const {
  for (const auto &s : stages)
    if (!s.pass()) return false;
  for (const auto *group : {&image, &continuity, &tail})
    for (const auto &r : *group)
      if ((r.lemma == "tail-disjoint" || r.level >= 2) && !r.pass()) return false;
  if (!table.empty() && !strictly_decreasing(table)) return false;
  return ledger.pass();
}

SuiteReport run_suite(const SurfaceApprox &a, const CantorSystem &sys, const CantorTree &tree,
                      std::optional<double> log_target) {
  SuiteReport s;
  s.ledger = energy_ledger_check(a, log_target);
  if (a.mode != BuildMode::Mesh) return s;
  for (int k = 0; k <= a.K; ++k) s.stages.push_back(check_stage(a, tree, k));
  for (int k = 1; k <= a.K; ++k) {
    s.image.push_back(verify_image_lemma(a, sys, k));
    s.continuity.push_back(continuity_level(a, sys, k));
  }
  for (int k = 0; k <= a.K && k < tree.depth; ++k) s.tail.push_back(tail_disjointness(a, tree, k));
  s.table = continuity_table(a, sys, 12);
  return s;
}

// ---------------------------------------------------------------------------------------------- controls

SurfaceApprox offset_region(const SurfaceApprox &a, const BinaryIndex &index, const Vec3 &shift) {
  SurfaceApprox b = a;
  for (auto v : a.region_vertices(index, a.K)) b.vertices[v] = b.vertices[v] + shift;
  return b;
}

SurfaceApprox widen_tentacle(const SurfaceApprox &a, const CantorTree &tree, const BinaryIndex &index, double factor) {
  SurfaceApprox b = a;
  Graft &g = b.grafts.at(index);
  const int k = g.site.level;
  double d = HUGE_VAL;
  for (const BranchCurve *br : tree.tail(k)) {
    if (br->index.size() == k + 1 && br->index.parent() == index) continue;
    d = std::min(d, curve_distance(br->curve, g.curve, 1e-3 * g.site.delta));
  }
  if (!std::isfinite(d)) throw ParameterError("no unattached tail branch to widen against");
  g.site.delta = factor * d;
  g.site.log_delta = std::log(g.site.delta);
  g.tentacle.delta = g.site.delta;
  b.sites[index] = g.site;
  return b;
}

Mesh merged_tori() {
  auto torus = [](Vec3 c, double R, double r, int nu, int nv, Mesh &m) {
    const auto off = std::uint32_t(m.vertices.size());
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        double u = 2 * kPi * i / nu, v = 2 * kPi * j / nv;
        m.vertices.push_back(c + Vec3{(R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u),
                                      r * std::sin(v)});
      }
    auto at = [&](int i, int j) { return off + std::uint32_t((i % nu) * nv + (j % nv)); };
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
        m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
      }
  };
  Mesh m;
  torus({0, 0, 0}, 2, 0.5, 32, 12, m);
  torus({1.5, 0, 0}, 2, 0.5, 32, 12, m);
  return m;
}

} // namespace cantorsurf
