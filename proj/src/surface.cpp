#include "cantorsurf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "cantorsurf/error.hpp"
#include "cantorsurf/kernels.hpp"
#include "cantorsurf/parallel.hpp"
#include "cantorsurf/profile.hpp"
#include "cantorsurf/triangulate.hpp"

namespace cantorsurf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGolden = 2.39996322972865332;
constexpr double kLn2 = 0.69314718055994530942;

double logaddexp(double a, double b) {
  if (a == -HUGE_VAL) return b;
  if (b == -HUGE_VAL) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// a host surface patch: maps local plateau coordinates to space
struct Host {
  BinaryIndex index;
  int level = 0;
  double plateau = 1;       // delta', linear (mesh mode)
  double log_plateau = 0;
  Vec3 origin{}, e1{1, 0, 0}, e2{0, 1, 0}, normal{0, 0, 1};
  std::function<Vec3(Vec2)> map;
};

std::uint32_t push_vertex(std::vector<Vec3> &v, const Vec3 &p) {
  v.push_back(p);
  return std::uint32_t(v.size() - 1);
}

// ring of `m` points around `c` in local coordinates, mapped and appended
std::vector<std::uint32_t> add_ring(std::vector<Vec3> &verts, std::vector<Vec2> &local, std::vector<std::uint32_t> &ids,
                                    Vec2 c, double r, int m, const std::function<Vec3(Vec2)> &map,
                                    std::vector<std::uint32_t> *own) {
  std::vector<std::uint32_t> ring;
  for (Vec2 p : circle_points(c, r, m)) {
    std::uint32_t id = push_vertex(verts, map(p));
    ring.push_back(std::uint32_t(local.size()));
    local.push_back(p);
    ids.push_back(id);
    if (own) own->push_back(id);
  }
  return ring;
}

std::vector<Tri> to_global(const std::vector<Tri> &t, const std::vector<std::uint32_t> &ids) {
  std::vector<Tri> out;
  out.reserve(t.size());
  for (auto f : t) out.push_back({ids[f[0]], ids[f[1]], ids[f[2]]});
  return out;
}

struct HoleSpec {
  Vec2 center;
  double radius;
};

// Plateau disk bounded by `outer` (local indices) with child holes, graded rings around each hole, fillers and
// an optional tip vertex at the local origin.
void plateau_piece(std::vector<Vec3> &verts, std::vector<Vec2> &local, std::vector<std::uint32_t> &ids,
                   const std::vector<std::uint32_t> &outer, double R, const std::vector<HoleSpec> &holes, int m,
                   const std::function<Vec3(Vec2)> &map, const std::optional<Vec3> &tip, HostPiece &piece,
                   std::uint32_t *tip_id) {
  std::vector<std::uint32_t> *own = &piece.own_vertices;
  if (holes.empty()) {
    std::vector<std::uint32_t> prev = outer;
    for (double f : {0.6, 0.3}) {
      auto ring = add_ring(verts, local, ids, {0, 0}, f * R, int(outer.size()), map, own);
      auto s = ring_strip(local, prev, ring);
      auto g = to_global(s, ids);
      piece.body.insert(piece.body.end(), g.begin(), g.end());
      prev = ring;
    }
    std::uint32_t c = push_vertex(verts, tip ? *tip : map({0, 0}));
    own->push_back(c);
    if (tip_id) *tip_id = c;
    for (std::size_t j = 0; j < prev.size(); ++j)
      piece.body.push_back({ids[prev[j]], ids[prev[(j + 1) % prev.size()]], c});
    return;
  }
  std::vector<std::vector<std::uint32_t>> clip_holes;
  for (std::size_t h = 0; h < holes.size(); ++h) {
    const HoleSpec &hs = holes[h];
    double lim = R - norm(hs.center);
    for (std::size_t o = 0; o < holes.size(); ++o)
      if (o != h) lim = std::min(lim, norm(hs.center - holes[o].center) / 2);
    lim *= 0.9;
    if (!(hs.radius < lim)) throw InternalError("child hole does not fit inside the plateau");
    auto rim = add_ring(verts, local, ids, hs.center, hs.radius, m, map, own);
    std::vector<std::uint32_t> rim_global;
    for (auto i : rim) rim_global.push_back(ids[i]);
    piece.child_rims.push_back(rim_global);
    // filler: half ring and the site center
    std::vector<Tri> filler;
    {
      auto half = add_ring(verts, local, ids, hs.center, hs.radius / 2, m, map, own);
      auto s = to_global(ring_strip(local, rim, half), ids);
      filler.insert(filler.end(), s.begin(), s.end());
      std::uint32_t c = push_vertex(verts, map(hs.center));
      own->push_back(c);
      for (std::size_t j = 0; j < half.size(); ++j) filler.push_back({ids[half[j]], ids[half[(j + 1) % m]], c});
    }
    piece.fillers.push_back(std::move(filler));
    std::vector<std::uint32_t> prev = rim;
    for (double r = hs.radius * 1.5; r <= lim; r *= 1.5) {
      auto ring = add_ring(verts, local, ids, hs.center, r, m, map, own);
      auto s = to_global(ring_strip(local, ring, prev), ids);
      piece.body.insert(piece.body.end(), s.begin(), s.end());
      prev = ring;
    }
    clip_holes.push_back(prev);
  }
  auto tris = triangulate_with_holes(local, outer, clip_holes);
  if (tip) {
    local.push_back({0, 0});
    std::uint32_t c = push_vertex(verts, *tip);
    ids.push_back(c);
    own->push_back(c);
    if (tip_id) *tip_id = c;
    insert_point(tris, local, std::uint32_t(local.size() - 1));
  }
  auto g = to_global(tris, ids);
  piece.body.insert(piece.body.end(), g.begin(), g.end());
}

Vec2 site_direction(const CantorTree *tree, const BinaryIndex &host, const Vec3 &e1, const Vec3 &e2, int level) {
  if (tree) {
    auto b0 = tree->branches.find(host.child(0)), b1 = tree->branches.find(host.child(1));
    if (b0 != tree->branches.end() && b1 != tree->branches.end()) {
      Vec3 d = b0->second.curve.tangent(0) - b1->second.curve.tangent(0);
      Vec2 u{dot(d, e1), dot(d, e2)};
      double nu = norm(u);
      if (nu > 1e-9) return u * (1 / nu);
    }
  }
  double a = kGolden * level;
  return {std::cos(a), std::sin(a)};
}

std::vector<Vec3> sample_curve(const Curve &c, double spacing, int lo = 64, int hi = 40000) {
  int n = std::clamp(int(std::ceil(c.length() / spacing)), lo, hi);
  return c.sample(n);
}

double sample_step(const Curve &c, const std::vector<Vec3> &s) { return c.length() / double(s.size() - 1); }

// Ring coordinates over the profile band, c0 excluded, c1 included. Steps keep the radius ratio >= e^-0.25, at
// least 8 rings, and the axial step below min(tau / 8, 0.2 / kappa, sqrt(8 sag / kappa)) with kappa the local
// curvature at both ends and the middle. Empty when more than max_rings are needed.
std::vector<double> band_coords(const RadialProfile &p, const Curve &curve, double sag, int max_rings) {
  const double tau = p.tau;
  auto kap_at = [&](double t) { return std::max(norm(curve.accel(std::clamp(t, 0.0, tau))), 1e-12); };
  auto hax = [&](double kap) { return std::min({tau / 8, 0.2 / kap, std::sqrt(8 * sag / kap)}); };
  std::vector<double> out;
  const double dmax = std::min(0.25, p.band / 8);
  double c = p.c0;
  while (c < p.c1()) {
    double dc = std::min(dmax, p.c1() - c);
    const double t0 = p.value_c(c);
    for (int it = 0; it < 200; ++it) {
      const double t1 = p.value_c(c + dc);
      const double kap = std::max({kap_at(t0), kap_at(t1), kap_at((t0 + t1) / 2)});
      if (std::fabs(t1 - t0) <= hax(kap)) break;
      dc /= 2;
    }
    c = dc >= p.c1() - c ? p.c1() : c + dc;
    out.push_back(c);
    if (int(out.size()) > max_rings) return {};
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------------------------------------- schedule

double BudgetSchedule::log_budget(int k) const {
  if (kind == Kind::Paper) return -double(n) * k * std::log(4.0);
  return std::log(a) + k * std::log(r);
}

double BudgetSchedule::budget(int k) const { return std::exp(log_budget(k)); }

bool BudgetSchedule::summable() const {
  if (kind == Kind::Paper) return n >= 1;
  return a > 0 && r > 0 && 2 * r < 1;
}

double BudgetSchedule::log_series(int K) const {
  const double la = kind == Kind::Paper ? 0.0 : std::log(a);
  const double lq = kLn2 + (kind == Kind::Paper ? -double(n) * std::log(4.0) : std::log(r));
  if (K == 0) return -HUGE_VAL;
  if (lq >= 0) return K < 0 ? HUGE_VAL : la + std::log(double(K)) + K * lq;  // loose when q > 1, unused
  // q (1 - q^K) / (1 - q)
  double tail = K < 0 ? 0.0 : std::exp(K * lq);
  return la + lq + std::log1p(-tail) - std::log1p(-std::exp(lq));
}

std::string BudgetSchedule::name() const {
  if (kind == Kind::Paper) return n == 2 ? "paper" : "paper(" + std::to_string(n) + ")";
  std::ostringstream s;
  s.precision(17);
  s << "geometric(" << a << "," << r << ")";
  return s.str();
}

// ---------------------------------------------------------------------------------------------- base

HostPiece make_base(std::vector<Vec3> &verts, const std::vector<std::pair<Vec2, double>> &holes, int angular,
                    int base_angular) {
  if (base_angular < 16 || angular < 8) throw ParameterError("base resolution too small");
  const int M0 = base_angular;
  const double a = 0.25;   // edge rounding radius
  const int ne = 20;       // edge steps over pi
  HostPiece piece;
  std::vector<Vec2> local;
  std::vector<std::uint32_t> ids;
  auto flat = [](Vec2 p) { return Vec3{p.x, p.y, 0.0}; };

  // outward sequence of rings in a planar parameter disk; the top disk is the identity chart
  struct Ring {
    std::vector<std::uint32_t> loc;
  };
  std::vector<Ring> rings;
  const double top_radii[3] = {0.6, 0.8, 1.0};
  for (double r : top_radii) rings.push_back({add_ring(verts, local, ids, {0, 0}, r, M0, flat, &piece.own_vertices)});
  // rounded edge and bottom, parameter radius = 1 + arc length
  auto param_ring = [&](double pr, const std::function<Vec3(double)> &pos) {
    Ring R;
    for (int j = 0; j < M0; ++j) {
      double th = 2 * kPi * j / M0;
      Vec3 q = pos(th);
      std::uint32_t id = push_vertex(verts, q);
      piece.own_vertices.push_back(id);
      R.loc.push_back(std::uint32_t(local.size()));
      local.push_back({pr * std::cos(th), pr * std::sin(th)});
      ids.push_back(id);
    }
    rings.push_back(R);
  };
  for (int i = 1; i <= ne; ++i) {
    double phi = kPi * i / ne;
    double rr = 1 + a * std::sin(phi), z = -a + a * std::cos(phi);
    if (i == ne) rr = 1;
    param_ring(1 + a * phi, [&](double th) { return Vec3{rr * std::cos(th), rr * std::sin(th), z}; });
  }
  for (int j = 1; j <= 4; ++j) {
    double rb = 1 - 0.2 * j;
    param_ring(1 + a * kPi + (1 - rb), [&](double th) { return Vec3{rb * std::cos(th), rb * std::sin(th), -2 * a}; });
  }
  for (std::size_t i = 0; i + 1 < rings.size(); ++i) {
    auto s = to_global(ring_strip(local, rings[i + 1].loc, rings[i].loc), ids);
    piece.body.insert(piece.body.end(), s.begin(), s.end());
  }
  std::uint32_t bottom = push_vertex(verts, {0, 0, -2 * a});
  piece.own_vertices.push_back(bottom);
  const auto &last = rings.back().loc;
  for (int j = 0; j < M0; ++j) piece.body.push_back({bottom, ids[last[(j + 1) % M0]], ids[last[j]]});

  std::vector<HoleSpec> hs;
  for (auto [c, r] : holes) hs.push_back({c, r});
  plateau_piece(verts, local, ids, rings[0].loc, top_radii[0], hs, angular, flat, std::nullopt, piece, nullptr);
  return piece;
}

Mesh base_surface(int base_angular, const std::vector<std::pair<Vec2, double>> &holes, int angular) {
  Mesh m;
  HostPiece p = make_base(m.vertices, holes, angular, base_angular);
  m.faces = p.body;
  for (const auto &f : p.fillers) m.faces.insert(m.faces.end(), f.begin(), f.end());
  return m.compacted();
}

// ---------------------------------------------------------------------------------------------- reroot

Curve reroot_curve(const Curve &J, const Vec3 &site, const Vec3 &normal, double frac) {
  if (!(frac > 0 && frac < 1)) throw ParameterError("reroot blend fraction must lie in (0, 1)");
  const double L = J.length();
  const double sb = frac * L;
  const Vec3 P1 = J.pos(sb), T1 = J.tangent(sb), A1 = J.accel(sb);
  const double ell = norm(P1 - site);
  if (!(ell > 0)) throw RoutingFailure("reroot site coincides with the blend end");
  const Vec3 n = normalized(normal);
  CurvePiece q = hermite_quintic(site, ell * n, Vec3{}, P1, ell * T1, ell * ell * A1);
  Curve out = Curve({q}).append(J.tail_from(sb));
  if (dot(out.tangent(0), n) < 0.999) throw InternalError("rerooted curve does not leave orthogonally");
  try {
    FrameField fr = frame_along(out, any_orthogonal(n), std::min(0.25, out.length() / 256));
    max_tube_radius(out, fr);
  } catch (const InfeasibleGeometry &e) {
    throw RoutingFailure(std::string("reroot blend collides with the branch: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------------------------- build

namespace {

struct Child {
  BinaryIndex index;
  GraftSite site;
  Curve curve;
  std::vector<Vec3> samples;
  double step = 0;
  double cap = 0;
  double clearance = 0;
};

void finish_ledger(EnergyLedger &L, int K) {
  std::sort(L.entries.begin(), L.entries.end(), [](const LedgerEntry &a, const LedgerEntry &b) {
    return a.level != b.level ? a.level < b.level : a.index < b.index;
  });
  L.levels.clear();
  L.log_total = -HUGE_VAL;
  for (int k = 1; k <= K; ++k) {
    LedgerLevel lv;
    lv.level = k;
    lv.log_sum = -HUGE_VAL;
    lv.log_cap = k * kLn2 + L.schedule.log_budget(k);
    for (const auto &e : L.entries)
      if (e.level == k) {
        ++lv.count;
        lv.log_sum = logaddexp(lv.log_sum, e.log_bound);
      }
    L.log_total = logaddexp(L.log_total, lv.log_sum);
    L.levels.push_back(lv);
  }
  L.log_series_bound = L.schedule.log_series(K);
}

// log-domain Minkowski certificate with the a-priori frame bound |DPhi|_HS <= sqrt(n + 1.9^2)
struct AnalyticCert {
  double log_delta, log_delta_prime, s, log_bound;
};

AnalyticCert analytic_certificate(double log_delta_cap, double tau, const BudgetSchedule &sch, int k, double width) {
  const int n = 2;
  const double D = 1.1 * std::sqrt(n + 1.9 * 1.9);
  const double logK = std::log(std::pow(std::sqrt(double(n)), n) * std::pow(D, n));
  const double lb = sch.log_budget(k);
  const double lhalf = 0.5 * (lb - logK);  // log sqrt(budget / K)
  // flat part at most half of the room
  double log_delta = std::min({-std::ldexp(1.0, k), lhalf - 0.5 * std::log(kPi) + std::log(0.5), log_delta_cap,
                               -k * kLn2, -1.0001});
  double log_room = lhalf + std::log1p(-std::exp(0.5 * std::log(kPi) + log_delta - lhalf));
  const double slack = smoothing_slack(width, n);
  SolveResult sr = solve_s_log(log_delta, tau, n, 2 * log_room + std::log(0.99), slack);
  double logE = log_truncation_energy(sr.s, tau, n) + std::log1p(slack);
  double log_bound = logK + 2 * logaddexp(0.5 * std::log(kPi) + log_delta, 0.5 * logE);
  return {log_delta, -std::exp(sr.s + tau), sr.s, log_bound};
}

double modeled_length(const CantorSystem &sys, const CantorTree *tree, const BinaryIndex &idx) {
  if (tree) {
    auto it = tree->branches.find(idx);
    if (it != tree->branches.end()) return it->second.length;
  }
  // branch inside the 2^{-k+1} tube of a chord across the parent cell
  int k = idx.size();
  double diam = k >= 2 ? sys.cell(idx.parent()).diameter : sys.cell(BinaryIndex{}).diameter;
  return 2 * (diam + std::ldexp(1.0, -(k - 1) + 1));
}

} // namespace

SurfaceApprox build_analytic(const CantorSystem &sys, const CantorTree *tree, int K, const SurfaceConfig &cfg) {
  if (K < 0) throw ParameterError("K must be >= 0");
  if (!cfg.schedule.summable()) throw ParameterError("budget schedule is not summable");
  SurfaceApprox A;
  A.K = K;
  A.mode = BuildMode::Analytic;
  A.config = cfg;
  A.ledger.schedule = cfg.schedule;
  std::map<BinaryIndex, double> log_plateau{{BinaryIndex{}, 0.0}};
  for (int k = 1; k <= K + 1; ++k) {
    for (const auto &idx : all_indices(k)) {
      const BinaryIndex host = idx.parent();
      GraftSite s;
      s.index = idx;
      s.level = k;
      Vec2 u = site_direction(tree, host, {1, 0, 0}, {0, 1, 0}, k);
      s.offset = u * (idx[k - 1] == 0 ? cfg.site_offset : -cfg.site_offset);
      const double cap = std::log(cfg.child_ratio) + log_plateau.at(host);
      if (k == K + 1) {
        s.log_delta = cap;  // pending site: container of W_{K+1}
        s.log_delta_prime = cap;
        A.sites[idx] = s;
        continue;
      }
      AnalyticCert c = analytic_certificate(cap, modeled_length(sys, tree, idx), cfg.schedule, k, cfg.smoothing_width);
      s.log_delta = c.log_delta;
      s.log_delta_prime = c.log_delta_prime;
      s.delta = std::exp(c.log_delta);
      log_plateau[idx] = c.log_delta_prime;
      A.sites[idx] = s;
      LedgerEntry e;
      e.index = idx;
      e.level = k;
      e.log_bound = c.log_bound;
      e.log_budget = cfg.schedule.log_budget(k);
      A.ledger.entries.push_back(e);
    }
  }
  finish_ledger(A.ledger, K);
  return A;
}

SurfaceApprox build_surface(const CantorSystem &sys, const CantorTree &tree, int K, const SurfaceConfig &cfg) {
  if (K < 0) throw ParameterError("K must be >= 0");
  if (!cfg.schedule.summable()) throw ParameterError("budget schedule is not summable");
  if (cfg.mode == BuildMode::Analytic) return build_analytic(sys, &tree, K, cfg);
  if (tree.depth < K) throw ParameterError("tree depth " + std::to_string(tree.depth) + " < K = " + std::to_string(K));

  SurfaceApprox A;
  A.K = K;
  A.mode = BuildMode::Mesh;
  A.config = cfg;
  A.ledger.schedule = cfg.schedule;
  const int M = cfg.angular;

  std::vector<Host> hosts;
  {
    Host b;
    b.map = [](Vec2 p) { return Vec3{p.x, p.y, 0.0}; };
    hosts.push_back(b);
  }
  const int exclusion_depth_extra = 8;

  for (int k = 1; k <= K + 1; ++k) {
    // sites and rerooted curves for every child of the current hosts
    std::vector<Child> children;
    for (const Host &h : hosts) {
      Vec2 u = site_direction(&tree, h.index, h.e1, h.e2, k);
      for (int b = 0; b < 2; ++b) {
        Child c;
        c.index = h.index.child(b);
        GraftSite &s = c.site;
        s.index = c.index;
        s.level = k;
        s.offset = u * (b == 0 ? cfg.site_offset : -cfg.site_offset);
        s.image = h.map(s.offset * h.plateau);
        s.normal = h.normal;
        s.e1 = h.e1;
        s.e2 = h.e2;
        c.cap = std::min(cfg.child_ratio * h.plateau, std::ldexp(1.0, -k));
        if (k <= K) {
          const BranchCurve &J = tree.branch(c.index);
          c.curve = reroot_curve(J.curve, s.image, s.normal, cfg.blend_frac);
          c.samples = sample_curve(c.curve, std::min(0.05 * c.cap, c.curve.length() / 400));
          c.step = sample_step(c.curve, c.samples);
        }
        children.push_back(std::move(c));
      }
    }
    if (k == K + 1) {
      for (auto &c : children) {
        c.site.delta = c.cap;
        c.site.log_delta = std::log(c.cap);
        c.site.log_delta_prime = c.site.log_delta;
        A.sites[c.index] = c.site;
      }
      break;
    }

    // radii from clearances
    const int dd = std::min(k + exclusion_depth_extra, sys.max_depth());
    // same-level distances are symmetric, one pass per pair
    std::vector<double> same(children.size(), HUGE_VAL);
    for (std::size_t i = 0; i < children.size(); ++i)
      for (std::size_t j = i + 1; j < children.size(); ++j) {
        double tol = 0.02 * std::min(children[i].cap, children[j].cap);
        double d = curve_distance(children[i].curve, children[j].curve, tol);
        same[i] = std::min(same[i], d);
        same[j] = std::min(same[j], d);
      }
    for (std::size_t i = 0; i < children.size(); ++i) {
      Child &c = children[i];
      double clear = same[i] * cfg.clearance_frac;
      // earlier tentacles other than the host
      for (const auto &[gi, g] : A.grafts) {
        if (gi.is_prefix_of(c.index) && gi.size() == c.index.size() - 1) continue;
        double d = curve_distance(c.curve, g.curve, 0.02 * c.cap);
        clear = std::min(clear, 0.9 * (d - g.tentacle.delta));
      }
      // tail branches; an own child shares the tip, so both ends near it are trimmed
      for (const BranchCurve *b : tree.tail(k)) {
        const double Lc = c.curve.length(), Lb = b->curve.length();
        const bool shared = b->index.size() == k + 1 && c.index.is_prefix_of(b->index);
        const double e = shared ? 0.05 * std::min(Lc, Lb) : 0.0;
        double d = curve_distance(c.curve, 0, Lc - e, b->curve, e, Lb, 0.02 * c.cap);
        clear = std::min(clear, d * cfg.clearance_frac);
      }
      // the Cantor set
      auto lower = sys.dist_lower(c.samples, dd);
      double dc = *std::min_element(lower.begin(), lower.end()) - c.step / 2;
      clear = std::min(clear, dc * cfg.clearance_frac);
      if (!(clear > 0))
        throw InfeasibleGeometry("no clearance for the tentacle along " + c.index.str() + " (" + std::to_string(clear) +
                                 ")");
      c.clearance = clear;
    }

    // tentacles
    std::vector<Graft> made(children.size());
    for (std::size_t i = 0; i < children.size(); ++i) {
      Child &c = children[i];
      double delta = std::min(c.cap, c.clearance);
      TubeMap probe = make_tube(c.curve, c.site.e1, delta);
      delta = std::min(delta, max_tube_radius(c.curve, probe.frames));
      TentacleOptions opt;
      opt.kind = ProfileKind::Log;
      opt.width = cfg.smoothing_width;
      opt.require_meshable = true;
      opt.step = probe.frames.step;
      Graft &g = made[i];
      g.tentacle = make_tentacle(c.curve, c.site.e1, {0, 0}, delta, 2, cfg.schedule.budget(k), opt);
      g.curve = c.curve;
      g.site = c.site;
      g.site.delta = delta;
      g.site.log_delta = std::log(delta);
      g.site.log_delta_prime = g.tentacle.profile.log_plateau_radius();
      g.tail_clearance = c.clearance;
      LedgerEntry e;
      e.index = c.index;
      e.level = k;
      e.log_bound = g.tentacle.cert.log_bound;
      e.log_budget = cfg.schedule.log_budget(k);
      if (cfg.tentacle_samples > 0) e.numeric = tentacle_energy(g.tentacle, cfg.tentacle_samples, 1e-8).numeric;
      A.ledger.entries.push_back(e);
    }

    // hosts of this level are now complete: mesh them with their holes
    for (std::size_t hi = 0; hi < hosts.size(); ++hi) {
      const Host &h = hosts[hi];
      std::vector<HoleSpec> holes;
      for (int b = 0; b < 2; ++b) {
        const Graft &g = made[2 * hi + b];
        holes.push_back({g.site.offset * h.plateau, g.site.delta});
      }
      HostPiece *piece = nullptr;
      if (h.index.empty()) {
        std::vector<std::pair<Vec2, double>> hv;
        for (auto &x : holes) hv.push_back({x.center, x.radius});
        A.base = make_base(A.vertices, hv, M, cfg.base_angular);
        piece = &A.base;
      } else {
        piece = &A.grafts.at(h.index).piece;
      }
      if (!h.index.empty()) {
        Graft &hg = A.grafts.at(h.index);
        std::vector<Vec2> local;
        std::vector<std::uint32_t> ids;
        // plateau ring is the last ring of the body, already built
        local = hg.plateau_local;
        ids = hg.plateau_ids;
        std::vector<std::uint32_t> outer(local.size());
        std::iota(outer.begin(), outer.end(), 0u);
        plateau_piece(A.vertices, local, ids, outer, h.plateau, holes, M, h.map,
                      tree.anchor(h.index).position, hg.piece, &hg.tip);
      }
      for (int b = 0; b < 2; ++b) made[2 * hi + b].rim = piece->child_rims[b];
    }

    // bodies of the new grafts down to their plateau rings
    std::vector<Host> next;
    for (auto &g : made) {
      const Tentacle &t = g.tentacle;
      const RadialProfile &p = t.profile;
      const double delta = t.delta;
      const double tau = p.tau;
      // axial sagitta: chord_tol * delta, or a tenth of the guaranteed gap to the obstacles that fixed delta
      const double cf = cfg.clearance_frac;
      const double gap = (1 - cf) / cf * g.tail_clearance - delta;
      const double sag = std::max(cfg.chord_tol * delta, 0.1 * gap);
      const std::vector<double> band = band_coords(p, g.curve, sag, cfg.max_rings);
      if (band.empty())
        throw InfeasibleGeometry("tentacle " + g.site.index.str() + " needs more than " +
                                 std::to_string(cfg.max_rings) + " rings");
      auto map = [&t](Vec2 y) { return t.eval(y); };
      std::vector<Vec2> local;
      std::vector<std::uint32_t> ids;
      std::vector<std::uint32_t> prev;
      for (int j = 0; j < M; ++j) {
        prev.push_back(std::uint32_t(local.size()));
        local.push_back(circle_points({0, 0}, delta, M)[j]);
        ids.push_back(g.rim[j]);
      }
      std::vector<double> radii = {0.75 * delta, 0.5 * delta};
      for (double cc : band) radii.push_back(std::exp(p.log_radius(cc)));
      for (double r : radii) {
        auto ring = add_ring(A.vertices, local, ids, {0, 0}, r, M, map, &g.piece.own_vertices);
        auto s = to_global(ring_strip(local, prev, ring), ids);
        g.piece.body.insert(g.piece.body.end(), s.begin(), s.end());
        prev = ring;
      }
      for (auto i : prev) {
        g.plateau_local.push_back(local[i]);
        g.plateau_ids.push_back(ids[i]);
      }
      Host h;
      h.index = g.site.index;
      h.level = k;
      h.log_plateau = p.log_plateau_radius();
      h.plateau = std::exp(h.log_plateau);
      Vec3 T = g.curve.tangent(tau);
      Frame f = t.tube.frames.at(tau, T);
      h.origin = tree.anchor(h.index).position;
      h.e1 = f.v1;
      h.e2 = f.v2;
      h.normal = T;
      next.push_back(h);
      A.sites[g.site.index] = g.site;
      A.grafts.emplace(g.site.index, std::move(g));
    }
    for (auto &h : next) {
      const Tentacle *t = &A.grafts.at(h.index).tentacle;
      h.map = [t](Vec2 y) { return t->eval(y); };
    }
    hosts = std::move(next);
  }

  // last level: plateaus without holes
  for (const Host &h : hosts) {
    Graft &g = A.grafts.at(h.index);
    std::vector<Vec2> local = g.plateau_local;
    std::vector<std::uint32_t> ids = g.plateau_ids;
    std::vector<std::uint32_t> outer(local.size());
    std::iota(outer.begin(), outer.end(), 0u);
    plateau_piece(A.vertices, local, ids, outer, h.plateau, {}, M, h.map, tree.anchor(h.index).position, g.piece,
                  &g.tip);
  }
  if (K == 0) A.base = make_base(A.vertices, {}, M, cfg.base_angular);
  finish_ledger(A.ledger, K);
  return A;
}

// ---------------------------------------------------------------------------------------------- stages

Mesh SurfaceApprox::stage(int k) const {
  if (mode != BuildMode::Mesh) throw ParameterError("analytic builds have no meshes");
  if (k < 0 || k > K) throw ParameterError("stage " + std::to_string(k) + " outside 0.." + std::to_string(K));
  Mesh m;
  m.vertices = vertices;
  m.faces = base.body;
  if (k == 0)
    for (const auto &f : base.fillers) m.faces.insert(m.faces.end(), f.begin(), f.end());
  for (const auto &[idx, g] : grafts) {
    if (g.site.level > k) continue;
    m.faces.insert(m.faces.end(), g.piece.body.begin(), g.piece.body.end());
    if (g.site.level == k)
      for (const auto &f : g.piece.fillers) m.faces.insert(m.faces.end(), f.begin(), f.end());
  }
  return m.compacted();
}

std::vector<std::uint32_t> SurfaceApprox::region_vertices(const BinaryIndex &index, int k) const {
  std::set<std::uint32_t> out;
  for (const auto &[idx, g] : grafts) {
    if (!index.is_prefix_of(idx) || g.site.level > k) continue;
    for (auto v : g.rim) out.insert(v);
    for (auto v : g.piece.own_vertices) out.insert(v);
  }
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------------------------- evaluation

Evaluation evaluate_f(const SurfaceApprox &a, const Vec3 &x) {
  Evaluation ev;
  ev.value = x;
  if (x.z != 0 || x.x * x.x + x.y * x.y > 1) return ev;
  Vec2 y{x.x, x.y};
  double plateau = 1;
  BinaryIndex host;
  const Graft *g = nullptr;
  for (int k = 1;; ++k) {
    const GraftSite *hit = nullptr;
    for (int b = 0; b < 2; ++b) {
      auto it = a.sites.find(host.child(b));
      if (it == a.sites.end()) continue;
      Vec2 c = it->second.offset * plateau;
      if (norm(y - c) < it->second.delta) {
        hit = &it->second;
        y = y - c;
        break;
      }
    }
    if (!hit) break;
    if (k > a.K) throw DomainError("unresolved at this depth: x lies in site " + hit->index.str());
    g = &a.grafts.at(hit->index);
    host = hit->index;
    plateau = std::exp(g->site.log_delta_prime);
    ev.stage = k;
    ev.site = host;
  }
  if (g) ev.value = norm(y) == 0 ? a.vertices[g->tip] : g->tentacle.eval(y);
  return ev;
}

std::pair<Vec3, double> evaluate_code(const CantorSystem &sys, const BinaryIndex &code, int resolve_depth) {
  return sys.point_of(code, resolve_depth);
}

// ---------------------------------------------------------------------------------------------- dimension

bool ExceptionalSet::strictly_decreasing() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].level < 2) continue;
    if (!(rows[i].estimate < rows[i - 1].estimate)) return false;
    ++n;
  }
  return n > 0;
}

ExceptionalSet box_count(const std::vector<double> &log_deltas) {
  ExceptionalSet e;
  for (std::size_t i = 0; i < log_deltas.size(); ++i) {
    BoxCountRow r;
    r.level = int(i) + 1;
    r.log_count = r.level * kLn2;
    r.log_inv_scale = -log_deltas[i];
    r.estimate = r.log_count / r.log_inv_scale;
    e.rows.push_back(r);
  }
  return e;
}

ExceptionalSet exceptional_set(const SurfaceApprox &a) {
  std::vector<double> ld;
  for (int k = 1; k <= a.K; ++k) {
    double m = -HUGE_VAL;
    for (const auto &[idx, s] : a.sites)
      if (s.level == k) m = std::max(m, s.log_delta);
    ld.push_back(m);
  }
  return box_count(ld);
}

std::vector<double> double_exponential_schedule(int K) {
  std::vector<double> v;
  for (int k = 1; k <= K; ++k) v.push_back(-std::ldexp(1.0, k));
  return v;
}

std::vector<double> geometric_delta_schedule(int K, double ratio) {
  std::vector<double> v;
  for (int k = 1; k <= K; ++k) v.push_back(k * std::log(ratio));
  return v;
}

} // namespace cantorsurf
