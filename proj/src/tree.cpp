#include "cantorsurf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t index_seed(std::uint64_t seed, const BinaryIndex &i) {
  return splitmix(seed ^ splitmix((std::uint64_t(i.size()) << 48) ^ i.ordinal()));
}

double pow2(int e) { return std::ldexp(1.0, e); }

// start direction as close to the chord as the junction margin allows
Vec3 start_direction(const std::optional<Vec3> &incoming, const Vec3 &chord_dir, double margin) {
  if (!incoming) return chord_dir;
  const Vec3 &t = *incoming;
  const double target = std::sin(margin) + 0.1;
  double p = dot(t, chord_dir);
  if (p >= target) return chord_dir;
  Vec3 c = chord_dir;
  if (p < -1 + 1e-9) c = any_orthogonal(t);  // chord points straight back
  p = dot(t, c);
  double lo = 0, hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    double a = 0.5 * (lo + hi);
    double f = (p + a) / std::sqrt(1 + 2 * a * p + a * a);
    (f < target ? lo : hi) = a;
  }
  return normalized(c + hi * t);
}

double seg_dist(const Vec3 &x, const Vec3 &a, const Vec3 &b) { return point_segment_dist(x, a, b); }

} // namespace

Vec3 CantorTree::branch_start(const BinaryIndex &i) const {
  if (i.size() <= 1) return {0, 0, 0};
  return anchors.at(i.parent()).position;
}

std::vector<const BranchCurve *> CantorTree::tail(int k) const {
  std::vector<const BranchCurve *> out;
  for (const auto &[idx, b] : branches)
    if (idx.size() > k) out.push_back(&b);
  return out;
}

Anchor select_anchor(const CantorSystem &sys, const BinaryIndex &index, std::uint64_t seed, const TreeConfig &cfg,
                     const std::function<bool(const Vec3 &)> &reject) {
  const int k = index.size();
  const int d = std::min(k + cfg.deep_levels, sys.max_depth());
  CantorCell c = sys.cell(index);
  const double bound = pow2(-k);
  auto accept = [&](const Vec3 &x, Anchor &out) {
    if (reject && reject(x)) return false;
    double up = sys.dist_upper({x}, index, d)[0];
    if (!(up < bound)) return false;
    double low = sys.dist_lower({x}, d)[0];
    if (!(low > 0)) return false;
    out = {index, x, low, up};
    return true;
  };
  Anchor a;
  if (accept(sys.preferred_anchor(index), a)) return a;
  std::mt19937_64 rng(index_seed(seed, index));
  std::uniform_real_distribution<double> U(-1, 1);
  const double R = c.radius + bound;
  for (int attempt = 0; attempt < cfg.anchor_retries; ++attempt) {
    Vec3 v{U(rng), U(rng), U(rng)};
    if (norm2(v) > 1) continue;
    if (accept(c.center + R * v, a)) return a;
  }
  throw SamplingFailure("no anchor for cell '" + index.str() + "' within 2^-" + std::to_string(k) + " after " +
                        std::to_string(cfg.anchor_retries) + " samples");
}

double branch_distance(const std::vector<Vec3> &a, double la, const std::vector<Vec3> &b, double lb,
                       const std::optional<Vec3> &shared) {
  PointsSoA pa, pb;
  const double rex = shared ? 0.05 * std::min(la, lb) : 0.0;
  for (const auto &p : a)
    if (!shared || dist(p, *shared) > rex) pa.push(p);
  for (const auto &p : b)
    if (!shared || dist(p, *shared) > rex) pb.push(p);
  if (!pa.size() || !pb.size()) return std::numeric_limits<double>::infinity();
  return min_dist(pa, pb);
}

BranchCurve build_branch(const Vec3 &from, const std::optional<Vec3> &incoming, const Anchor &to, int k,
                         const std::vector<Obstacle> &obstacles, const CantorSystem &sys, const TreeConfig &cfg) {
  const Vec3 B = to.position;
  const Vec3 chord = B - from;
  const double ell = norm(chord);
  if (!(ell > 0)) throw ParameterError("branch endpoints coincide");
  const Vec3 cdir = chord / ell;
  const double tube = pow2(-k);
  const int d = std::min(to.index.size() + cfg.deep_levels, sys.max_depth());

  const Vec3 T0 = start_direction(incoming, cdir, cfg.angle_margin);
  const Vec3 T1 = cdir;
  const double clear_a = sys.dist_lower({from}, d)[0];
  const double clear_min = std::min(clear_a, to.clearance);
  const double c_req = 0.25 * clear_min;
  const int ns = std::clamp(int(std::ceil(2 * ell / std::max(c_req, 1e-300))), cfg.samples, 20000);
  const double c_branch = cfg.branch_clearance_frac * ell;

  const int N = cfg.control_points;
  std::vector<Vec3> ctrl(N + 1);
  CurvePiece h = hermite_cubic(from, ell * T0, B, ell * T1);
  for (int i = 0; i <= N; ++i) ctrl[i] = h.pos(double(i) / N);

  auto chord_dist = [&](const Vec3 &p) { return seg_dist(p, from, B); };
  auto perp = [&](Vec3 v) {
    v = v - dot(v, cdir) * cdir;
    double n = norm(v);
    return n > 1e-14 * ell ? v / n : any_orthogonal(cdir);
  };

  std::string last_blockers;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    Curve curve = Curve::spline(ctrl, T0, T1);
    auto S = curve.sample(ns);
    const double step = curve.length() / ns;
    auto dl = sys.dist_lower(S, d);

    std::vector<Vec3> push(N + 1);
    bool ok = true;
    std::ostringstream blockers;
    double min_clear = std::numeric_limits<double>::infinity(), max_dev = 0;
    for (int i = 0; i <= ns; ++i) {
      min_clear = std::min(min_clear, dl[i]);
      double dev = chord_dist(S[i]);
      max_dev = std::max(max_dev, dev);
      int ci = std::clamp(int(std::lround(double(i) / ns * N)), 1, N - 1);
      if (dl[i] < std::max(c_req, 0.51 * step)) {
        ok = false;
        Vec3 q = sys.nearest_point(S[i], d);
        Vec3 dir = perp(S[i] - q);
        push[ci] += (std::max(c_req, 0.51 * step) * 1.5 - dl[i]) * dir;
        blockers << " C@" << i;
      }
      if (dev + 0.5 * step > 0.98 * tube) {
        ok = false;
        Vec3 proj = from + dot(S[i] - from, cdir) * cdir;
        push[ci] += -(dev + 0.5 * step - 0.9 * tube) * perp(S[i] - proj);
      }
    }
    for (std::size_t o = 0; o < obstacles.size(); ++o) {
      const Obstacle &ob = obstacles[o];
      double bd = branch_distance(S, curve.length(), ob.samples, ob.length, ob.shared);
      if (bd > c_branch) continue;
      ok = false;
      blockers << " branch#" << o;
      const double rex = ob.shared ? 0.05 * std::min(curve.length(), ob.length) : 0.0;
      PointsSoA obs;
      for (const auto &p : ob.samples)
        if (!ob.shared || dist(p, *ob.shared) > rex) obs.push(p);
      for (int i = 0; i <= ns; ++i) {
        if (ob.shared && dist(S[i], *ob.shared) <= rex) continue;
        PointsSoA one;
        one.push(S[i]);
        double di = std::sqrt(nearest_dist2(one, obs)[0]);
        if (di > 3 * c_branch) continue;
        Vec3 q{};
        double best = 1e300;
        for (std::size_t j = 0; j < obs.size(); ++j)
          if (double dd = dist(S[i], obs[j]); dd < best) { best = dd; q = obs[j]; }
        int ci = std::clamp(int(std::lround(double(i) / ns * N)), 1, N - 1);
        push[ci] += (3 * c_branch - di) * perp(S[i] - q);
      }
    }
    if (ok) {
      BranchCurve bc;
      bc.index = to.index;
      bc.curve = std::move(curve);
      bc.length = bc.curve.length();
      bc.junction_angle = incoming ? std::acos(std::clamp(-dot(*incoming, T0), -1.0, 1.0)) : std::numbers::pi;
      bc.max_deviation = max_dev + 0.5 * step;
      bc.min_clearance = min_clear - 0.5 * step;
      bc.iterations = it;
      return bc;
    }
    last_blockers = blockers.str();
    // spread the pushes so the control polygon stays smooth
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<Vec3> sm = push;
      for (int i = 1; i < N; ++i) sm[i] = 0.5 * push[i] + 0.25 * (push[i - 1] + push[i + 1]);
      push = sm;
    }
    for (int i = 1; i < N; ++i) {
      ctrl[i] += push[i];
      double dev = chord_dist(ctrl[i]);
      if (dev > 0.9 * tube) {
        Vec3 proj = from + std::clamp(dot(ctrl[i] - from, cdir), 0.0, ell) * cdir;
        ctrl[i] = proj + (0.9 * tube / dev) * (ctrl[i] - proj);
      }
    }
  }
  throw RoutingFailure("branch '" + to.index.str() + "' could not be routed inside its 2^-" + std::to_string(k) +
                       " tube; blocking:" + last_blockers);
}

CantorTree build_tree(const CantorSystem &sys, int K, const TreeConfig &cfg) {
  if (K < 1) throw ParameterError("tree depth K must be >= 1");
  CantorTree tree;
  tree.depth = K;
  std::vector<Obstacle> done;
  PointsSoA all_samples;
  for (int k = 1; k <= K; ++k) {
    const double keep_off = cfg.anchor_branch_clearance * pow2(-k);
    auto reject = [&](const Vec3 &x) {
      if (!all_samples.size()) return false;
      PointsSoA one;
      one.push(x);
      return nearest_dist2(one, all_samples)[0] < keep_off * keep_off;
    };
    for (const auto &idx : all_indices(k)) {
      Anchor a = select_anchor(sys, idx, cfg.seed, cfg, reject);
      for (const auto &[other, b] : tree.anchors)
        if (b.position == a.position) throw SamplingFailure("anchors of '" + other.str() + "' and '" + idx.str() + "' coincide");
      tree.anchors[idx] = a;
    }
    for (const auto &idx : all_indices(k)) {
      Vec3 from = tree.branch_start(idx);
      std::optional<Vec3> incoming;
      if (k > 1) {
        const BranchCurve &pb = tree.branches.at(idx.parent());
        incoming = pb.curve.tangent(pb.length);
      }
      std::vector<Obstacle> obs = done;
      for (auto &o : obs)
        if (o.samples.front() == from || o.samples.back() == from) o.shared = from;
      BranchCurve b = build_branch(from, incoming, tree.anchors.at(idx), k - 1, obs, sys, cfg);
      Obstacle ob;
      ob.samples = b.curve.sample(cfg.samples);
      ob.samples.front() = from;
      ob.samples.back() = tree.anchors.at(idx).position;
      ob.length = b.length;
      for (const auto &p : ob.samples) all_samples.push(p);
      done.push_back(std::move(ob));
      tree.branches[idx] = std::move(b);
    }
  }
  return tree;
}

LemmaReport verify_branch_proximity(const CantorTree &tree, const CantorSystem &sys, int k, int samples) {
  LemmaReport rep;
  rep.lemma = "l1";
  rep.level = k;
  rep.samples_per_item = samples + 1;
  const int d = std::min(k + 1 + 8, sys.max_depth());
  for (const auto &idx : all_indices(k + 1)) {
    auto it = tree.branches.find(idx);
    if (it == tree.branches.end()) continue;
    BinaryIndex cellidx = idx.prefix(k);
    auto S = it->second.curve.sample(samples);
    auto up = sys.dist_upper(S, cellidx, d);
    double measured = *std::max_element(up.begin(), up.end());
    double bound = pow2(-k + 2) + sys.cell(cellidx).diameter;
    rep.add(idx.str(), measured, bound);
  }
  if (k == 0) rep.note = "root branches start at the origin; no anchor A_() exists, so the lemma's argument does not cover them";
  return rep;
}

double eps_k(const CantorSystem &sys, int k) { return pow2(-k + 2) + sys.max_cell_diameter(k); }

TailReport verify_tail_neighborhood(const CantorTree &tree, const CantorSystem &sys, int k, int samples) {
  TailReport tr;
  tr.eps = eps_k(sys, k);
  tr.report.lemma = "c1";
  tr.report.level = k;
  tr.report.samples_per_item = samples + 1;
  for (int j = 1; j <= k; ++j)
    if (!(eps_k(sys, j) < eps_k(sys, j - 1))) tr.decreasing = false;
  const int d = std::min(k + 8, sys.max_depth());
  for (const BranchCurve *b : tree.tail(k)) {
    auto S = b->curve.sample(samples);
    auto up = sys.dist_upper(S, BinaryIndex{}, d);
    tr.report.add(b->index.str(), *std::max_element(up.begin(), up.end()), tr.eps);
  }
  return tr;
}

} // namespace cantorsurf
