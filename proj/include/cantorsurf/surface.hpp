#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cantorsurf/binary_index.hpp"
#include "cantorsurf/cantor.hpp"
#include "cantorsurf/curve.hpp"
#include "cantorsurf/mesh.hpp"
#include "cantorsurf/tentacle.hpp"
#include "cantorsurf/tree.hpp"

namespace cantorsurf {

// Per-tentacle energy budgets. Paper: 4^{-nk}. Geometric: a * r^k.
struct BudgetSchedule {
  enum class Kind { Paper, Geometric };
  Kind kind = Kind::Geometric;
  double a = 0.1;
  double r = 0.125;
  int n = 2;

  static BudgetSchedule paper(int n = 2) { return {Kind::Paper, 1, std::pow(4.0, -n), n}; }
  static BudgetSchedule geometric(double a, double r, int n = 2) { return {Kind::Geometric, a, r, n}; }
  double log_budget(int k) const;
  double budget(int k) const;
  // log of the sum over k = 1..K of 2^k budget(k), K = -1 for the infinite series
  double log_series(int K) const;
  // sum of 2^k budget(k) converges
  bool summable() const;
  std::string name() const;
};

enum class BuildMode { Mesh, Analytic };

struct SurfaceConfig {
  BuildMode mode = BuildMode::Mesh;
  BudgetSchedule schedule = BudgetSchedule::geometric(1e7, 0.125);
  int angular = 24;            // vertices per tentacle ring
  int base_angular = 64;       // vertices per base ring
  double site_offset = 0.25;   // child centers at +-site_offset * delta' from the host center
  double child_ratio = 0.15;   // delta_{k+1} <= child_ratio * delta'_k
  double clearance_frac = 0.45;
  double blend_frac = 0.1;     // reroot blend length, fraction of the branch
  double smoothing_width = 0.1;
  double chord_tol = 0.02;     // axial sagitta below chord_tol * delta, or a tenth of the clearance gap
  int max_rings = 4000;
  int tentacle_samples = 32;   // angular samples for the numeric energy check, 0 skips it
};

struct GraftSite {
  BinaryIndex index;
  int level = 0;
  Vec2 offset{};          // center in the host's local plateau coordinates
  double delta = 0;       // mesh mode; 0 when it underflows
  double log_delta = 0;
  double log_delta_prime = 0;
  Vec3 image{};           // f_{k-1}(p), on the host plateau
  Vec3 normal{}, e1{}, e2{};  // host plateau frame at the site
};

struct LedgerEntry {
  BinaryIndex index;
  int level = 0;
  double log_bound = 0;
  double log_budget = 0;
  double numeric = -1;  // quadrature of the meshed tentacle, -1 when not computed
  bool pass() const { return log_bound < log_budget; }
};

struct LedgerLevel {
  int level = 0;
  int count = 0;
  double log_sum = 0;
  double log_cap = 0;  // log(2^k budget(k))
  bool pass() const { return log_sum <= log_cap; }
};

struct EnergyLedger {
  BudgetSchedule schedule;
  std::vector<LedgerEntry> entries;  // level, then index order
  std::vector<LedgerLevel> levels;
  double log_total = -HUGE_VAL;
  double log_series_bound = -HUGE_VAL;  // log sum_{k<=K} 2^k budget(k)
  double total() const { return std::exp(log_total); }
};

// Disk-with-holes piece of the surface: the part of a host that persists once its children are grafted.
struct HostPiece {
  std::vector<Tri> body;
  std::vector<std::vector<Tri>> fillers;           // per child, used only while the child is not grafted
  std::vector<std::vector<std::uint32_t>> child_rims;
  std::vector<std::uint32_t> own_vertices;         // vertices created by this piece (rim excluded)
};

struct Graft {
  GraftSite site;
  Curve curve;  // rerooted branch, tau = its length
  Tentacle tentacle;
  std::vector<std::uint32_t> rim;  // shared with the host
  HostPiece piece;
  std::uint32_t tip = 0;           // vertex at the site center, equal to the anchor
  double tail_clearance = 0;       // distance from the curve to obstacles used to pick delta
  std::vector<Vec2> plateau_local;         // plateau boundary ring, local coordinates
  std::vector<std::uint32_t> plateau_ids;  // and its vertex ids
};

struct SurfaceApprox {
  int K = 0;
  BuildMode mode = BuildMode::Mesh;
  SurfaceConfig config;
  std::vector<Vec3> vertices;
  HostPiece base;
  std::map<BinaryIndex, Graft> grafts;        // mesh mode
  std::map<BinaryIndex, GraftSite> sites;     // both modes
  EnergyLedger ledger;

  // closed mesh f_k, k = 0..K; vertices are shared across stages
  Mesh stage(int k) const;
  // faces of stage k belonging to the site ball W_k(index) (the graft and its descendants up to stage k)
  std::vector<std::uint32_t> region_vertices(const BinaryIndex &index, int k) const;
};

// Base sphere: flat unit disk at z = 0 on a rounded puck. `holes` (center, radius) are cut from the disk and
// refilled; the result is closed. Pieces are appended to `vertices`.
HostPiece make_base(std::vector<Vec3> &vertices, const std::vector<std::pair<Vec2, double>> &holes, int angular,
                    int base_angular);
Mesh base_surface(int base_angular = 64, const std::vector<std::pair<Vec2, double>> &holes = {}, int angular = 24);

// Starts at `site`, leaves along `normal`, blends into J with a quintic over the first `frac` of its length
// and coincides with J afterwards. Throws RoutingFailure if the blend self-intersects or meets C.
Curve reroot_curve(const Curve &J, const Vec3 &site, const Vec3 &normal, double frac = 0.1);

SurfaceApprox build_surface(const CantorSystem &sys, const CantorTree &tree, int K, const SurfaceConfig &cfg = {});
// log-domain certificates for all 2^k sites, k <= K; branch lengths come from `tree` where it has them and are
// modeled as 2 (diam C_parent + 2^{-k+2}) elsewhere
SurfaceApprox build_analytic(const CantorSystem &sys, const CantorTree *tree, int K, const SurfaceConfig &cfg);

// Stabilized pointwise value f(x) for a point x of the base sphere. Throws DomainError "unresolved at this
// depth" naming the site when x lies in W_{K+1}.
struct Evaluation {
  Vec3 value{};
  int stage = 0;        // first k with x outside W_{k+1}
  BinaryIndex site;     // deepest site containing x
};
Evaluation evaluate_f(const SurfaceApprox &a, const Vec3 &x);
// code input: the limit pairing e_i -> c_i, with the cell diameter as error radius
std::pair<Vec3, double> evaluate_code(const CantorSystem &sys, const BinaryIndex &code, int resolve_depth);

struct BoxCountRow {
  int level = 0;
  double log_count = 0;   // log N = k log 2
  double log_inv_scale = 0;  // log(1 / delta_k)
  double estimate = 0;
};
struct ExceptionalSet {
  std::vector<BoxCountRow> rows;
  // from level 2 on; k ln2 / 2^k ties at k = 1, 2
  bool strictly_decreasing() const;
};
// N(delta_k) = 2^k boxes of size delta_k, from log(delta_k) values indexed by k = 1..
ExceptionalSet box_count(const std::vector<double> &log_deltas);
ExceptionalSet exceptional_set(const SurfaceApprox &a);
std::vector<double> double_exponential_schedule(int K);  // log delta_k = -2^k
std::vector<double> geometric_delta_schedule(int K, double ratio);  // log delta_k = k log ratio

} // namespace cantorsurf
