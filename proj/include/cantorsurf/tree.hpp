#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "cantorsurf/binary_index.hpp"
#include "cantorsurf/cantor.hpp"
#include "cantorsurf/curve.hpp"
#include "cantorsurf/report.hpp"

namespace cantorsurf {

struct Anchor {
  BinaryIndex index;
  Vec3 position{};
  double clearance = 0;   // certified lower bound of dist(position, C)
  double cell_dist = 0;   // certified upper bound of dist(position, C_index)
};

struct BranchCurve {
  BinaryIndex index;  // length k+1
  Curve curve;
  double length = 0;
  double junction_angle = 0;  // between the incoming branch and this one at the start anchor
  double max_deviation = 0;   // from the chord
  double min_clearance = 0;   // certified lower bound of the distance to C over the curve
  int iterations = 0;
};

struct TreeConfig {
  std::uint64_t seed = 1;
  double angle_margin = 0.05;
  int deep_levels = 8;
  int samples = 400;
  int control_points = 32;
  int max_iterations = 200;
  int anchor_retries = 4000;
  double branch_clearance_frac = 1e-4;
  double anchor_branch_clearance = 0.05;  // times 2^-k
};

struct Obstacle {
  std::vector<Vec3> samples;
  std::optional<Vec3> shared;  // endpoint shared with the branch under construction
  double length = 0;
};

class CantorTree {
public:
  int depth = 0;
  std::map<BinaryIndex, Anchor> anchors;
  std::map<BinaryIndex, BranchCurve> branches;
  const BranchCurve &branch(const BinaryIndex &i) const { return branches.at(i); }
  const Anchor &anchor(const BinaryIndex &i) const { return anchors.at(i); }
  // start point of J_index: the parent anchor, or the origin for the root branches
  Vec3 branch_start(const BinaryIndex &i) const;
  // T_k: branches of order > k
  std::vector<const BranchCurve *> tail(int k) const;
};

// `reject` vetoes candidates (used to keep new anchors off existing branches)
Anchor select_anchor(const CantorSystem &sys, const BinaryIndex &index, std::uint64_t seed,
                     const TreeConfig &cfg = {}, const std::function<bool(const Vec3 &)> &reject = {});

// Routes J from `from` to `to` (level k: |to.index| = k+1) inside the 2^-k tube around the chord.
BranchCurve build_branch(const Vec3 &from, const std::optional<Vec3> &incoming, const Anchor &to, int k,
                         const std::vector<Obstacle> &obstacles, const CantorSystem &sys, const TreeConfig &cfg = {});

CantorTree build_tree(const CantorSystem &sys, int K, const TreeConfig &cfg = {});

// min distance between two sampled branches, ignoring samples near a shared endpoint
double branch_distance(const std::vector<Vec3> &a, double la, const std::vector<Vec3> &b, double lb,
                       const std::optional<Vec3> &shared);

LemmaReport verify_branch_proximity(const CantorTree &tree, const CantorSystem &sys, int k, int samples = 200);

struct TailReport {
  double eps = 0;
  LemmaReport report;
  bool decreasing = true;  // eps_j strictly decreasing for j = 0..k
};
double eps_k(const CantorSystem &sys, int k);
TailReport verify_tail_neighborhood(const CantorTree &tree, const CantorSystem &sys, int k, int samples = 200);

} // namespace cantorsurf
