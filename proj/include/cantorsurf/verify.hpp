#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cantorsurf/cantor.hpp"
#include "cantorsurf/intersect.hpp"
#include "cantorsurf/mesh.hpp"
#include "cantorsurf/report.hpp"
#include "cantorsurf/surface.hpp"
#include "cantorsurf/tree.hpp"

namespace cantorsurf {

// r_k = 2^{-k+4} + diam C_parent
double image_lemma_bound(const CantorSystem &sys, const BinaryIndex &index);
// 2^{-k+4} + 2 diam C_parent
double continuity_bound(const CantorSystem &sys, const BinaryIndex &index);

// For each level-k site: max over the stage-K vertices of W_k(index) of an upper bound on dist(f(x), C_parent),
// plus the longest edge of the region's faces (the distance is 1-Lipschitz), against r_k. Level 1 carries an informational note and is left out of SuiteReport::pass: the root branches start
// at the origin, far from C.
LemmaReport verify_image_lemma(const SurfaceApprox &a, const CantorSystem &sys, int k);

// sup over the stage-K vertices of W_k(prefix) of |f(x) - c_code| plus the longest region edge and the code's
// error radius, against
// 2^{-k+4} + 2 diam C_parent, for the code extending `prefix` by zeros. Level 1 is informational as above.
LemmaReport continuity_modulus(const SurfaceApprox &a, const CantorSystem &sys, const BinaryIndex &prefix);
LemmaReport continuity_level(const SurfaceApprox &a, const CantorSystem &sys, int k);

struct BoundRow {
  int level = 0;
  double bound = 0;     // max over level-k prefixes
  double measured = 0;  // max over level-k prefixes, -1 when no site was measured
};
// bound table k = 1..K_table (analytic, any depth) with the measured maxima of the mesh levels
std::vector<BoundRow> continuity_table(const SurfaceApprox &a, const CantorSystem &sys, int k_table);
bool strictly_decreasing(const std::vector<BoundRow> &rows);

// Stage-k mesh against the tail branches T_k (order > k). Per branch, two certificates:
//   mesh: arcs [s0, s1] are split until dist(mid, mesh) > (s1 - s0) / 2, so the whole arc misses the mesh;
//   tube: dist(branch, axis_g) - delta_g over the grafts g of level <= k the branch is not attached to.
// A branch that starts on the mesh (a stage-k tip, or the origin at k = 0) skips its first delta'_host (0.05 at
// the origin) of arc length. Entry: measured = 0, bound = the smaller certified distance. Requires tree.depth > k.
LemmaReport tail_disjointness(const SurfaceApprox &a, const CantorTree &tree, int k);

struct LedgerLine {
  int level = 0;
  int count = 0;
  int passing = 0;       // tentacles with bound < budget
  double log_sum = 0;
  double log_cap = 0;    // log 2^k budget(k)
  double log_paper = 0;  // log 2^{-nk}, paper chain only
  bool pass = false;
};
struct LedgerReport {
  std::string schedule;
  std::vector<LedgerLine> lines;
  double log_total = 0;
  double log_series = 0;
  std::optional<double> log_target;  // optional extra cap on the total
  bool paper = false;
  bool pass() const;
  double total() const;
};
// per tentacle <= budget, per level <= 2^k budget(k), total <= series bound (and <= target when given); for the
// paper schedule also 2^k 4^{-nk} < 2^{-nk} per level
LedgerReport energy_ledger_check(const SurfaceApprox &a, std::optional<double> log_target = std::nullopt);

struct StageCheck {
  int stage = 0;
  TopologyReport topology;
  IntersectionReport intersections;
  bool tips_exact = true;
  bool pass() const { return topology.closed() && topology.oriented() && topology.euler == 2 && intersections.pass() && tips_exact; }
};
StageCheck check_stage(const SurfaceApprox &a, const CantorTree &tree, int k);

struct SuiteReport {
  std::vector<StageCheck> stages;
  std::vector<LemmaReport> image, continuity, tail;
  std::vector<BoundRow> table;
  LedgerReport ledger;
  bool pass() const;
};
SuiteReport run_suite(const SurfaceApprox &a, const CantorSystem &sys, const CantorTree &tree,
                      std::optional<double> log_target = std::nullopt);

// negative controls
SurfaceApprox offset_region(const SurfaceApprox &a, const BinaryIndex &index, const Vec3 &shift);
// records delta_g = factor * (distance from the axis of g to T_k); the mesh is left as is
SurfaceApprox widen_tentacle(const SurfaceApprox &a, const CantorTree &tree, const BinaryIndex &index, double factor);
// two overlapping tori in one mesh
Mesh merged_tori();

} // namespace cantorsurf
