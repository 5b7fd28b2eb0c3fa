// One PASS/FAIL line per acceptance criterion, with the clause details and timings underneath.
// Exit status is the number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cantorsurf/error.hpp"
#include "cantorsurf/profile.hpp"
#include "cantorsurf/surface.hpp"
#include "cantorsurf/tentacle.hpp"
#include "cantorsurf/tree.hpp"
#include "cantorsurf/verify.hpp"

using namespace cantorsurf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Clause {
  std::string what;
  bool pass;
};

struct Outcome {
  std::vector<Clause> clauses;
  void add(const std::string &what, bool pass) { clauses.push_back({what, pass}); }
  bool pass() const {
    for (const auto &c : clauses)
      if (!c.pass) return false;
    return !clauses.empty();
  }
};

std::string fmt(const char *f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt2(const char *f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int failures = 0;

void criterion(int id, const char *title, double limit_s, const std::function<Outcome()> &body) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o.add(std::string("threw: ") + e.what(), false);
  }
  const double t = seconds_since(t0);
  o.add(fmt2("runtime %.2f s < %.0f s", t, limit_s), t < limit_s);
  const bool pass = o.pass();
  failures += !pass;
  std::printf("CRITERION %d: %s  %s\n", id, pass ? "PASS" : "FAIL", title);
  for (const auto &c : o.clauses) std::printf("    [%s] %s\n", c.pass ? "ok" : "FAIL", c.what.c_str());
  std::fflush(stdout);
}

const CantorSystem &ternary() {
  static CantorSystem sys = CantorSystem::ternary().place_default();
  return sys;
}

Curve random_branch(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1, 1), len(1.0, 4.0);
  const double L = len(rng);
  Vec3 bend{u(rng), u(rng), 0};
  std::vector<Vec3> pts;
  for (int i = 0; i <= 16; ++i) {
    double t = i / 16.0;
    pts.push_back(Vec3{0, 0, L * t} + (0.25 * L * std::sin(3.14159265358979 * t)) * bend);
  }
  return Curve::spline(pts, normalized(pts[1] - pts[0]), normalized(pts[16] - pts[15]));
}

struct MeshRun {
  CantorTree tree;
  SurfaceApprox a;
  double build_s = 0;
};

MeshRun mesh_run(const CantorSystem &sys, int K) {
  auto t0 = Clock::now();
  MeshRun r;
  r.tree = build_tree(sys, K + 1);
  r.a = build_surface(sys, r.tree, K);
  r.build_s = seconds_since(t0);
  return r;
}

// embedding, tail and ledger clauses of a mesh build
void build_clauses(Outcome &o, const MeshRun &r, int K, int expected_tentacles) {
  o.add(fmt("build %.2f s", r.build_s), true);
  o.add("tentacles " + std::to_string(r.a.grafts.size()) + " == " + std::to_string(expected_tentacles),
        int(r.a.grafts.size()) == expected_tentacles);
  for (int k = 0; k <= K; ++k) {
    StageCheck s = check_stage(r.a, r.tree, k);
    o.add("stage " + std::to_string(k) + ": faces " + std::to_string(s.topology.faces) + ", chi " +
              std::to_string(s.topology.euler) + ", closed " + std::to_string(s.topology.closed()) + ", oriented " +
              std::to_string(s.topology.oriented()) + ", intersecting pairs " +
              std::to_string(s.intersections.pairs.size()),
          s.topology.closed() && s.topology.oriented() && s.topology.euler == 2 && s.intersections.pass());
    o.add("stage " + std::to_string(k) + ": f_k(p_idx) == A_idx exactly", s.tips_exact);
    LemmaReport t = tail_disjointness(r.a, r.tree, k);
    o.add("stage " + std::to_string(k) + " disjoint from T_" + std::to_string(k) + " (" +
              std::to_string(t.entries.size()) + " branches, worst certified gap " + fmt("%.3g", t.worst_margin()) + ")",
          t.pass());
  }
  double series = 0;
  for (int k = 1; k <= K; ++k) series += std::pow(4.0, -k);
  const double target = 0.1 * series;
  LedgerReport l = energy_ledger_check(r.a, std::log(target));
  bool per_entry = true;
  for (const auto &line : l.lines) per_entry = per_entry && line.pass;
  o.add("ledger: every tentacle below its budget and every level below its cap (schedule " + l.schedule + ")", per_entry);
  o.add(fmt2("ledger total %.4g <= 0.1 * sum 4^-k = %.4g", l.total(), target), l.total() <= target);
}

void neighbourhood_clauses(Outcome &o, const SurfaceApprox &a, const CantorSystem &sys, int K) {
  for (int k = 1; k <= K; ++k) {
    LemmaReport im = verify_image_lemma(a, sys, k);
    LemmaReport co = continuity_level(a, sys, k);
    if (k == 1) {
      std::printf("    [info] level 1 (not counted): image worst margin %.4g, continuity worst margin %.4g; %s\n",
                  im.worst_margin(), co.worst_margin(), im.note.c_str());
      continue;
    }
    o.add("level " + std::to_string(k) + " r_k neighbourhood: " + std::to_string(im.entries.size()) +
              " regions, worst margin " + fmt("%.4g", im.worst_margin()) + ", samples " + std::to_string(im.samples_per_item),
          im.pass());
    o.add("level " + std::to_string(k) + " continuity modulus: worst margin " + fmt("%.4g", co.worst_margin()),
          co.pass());
  }
  auto rows = continuity_table(a, sys, 12);
  std::string tab;
  for (const auto &r : rows) tab += fmt(" %.4g", r.bound);
  o.add("continuity table decreasing:" + tab, strictly_decreasing(rows));
}

} // namespace

int main() {
  criterion(1, "profile energy oracle", 10, [] {
    Outcome o;
    double worst = 0;
    int cases = 0;
    for (int n : {2, 3, 4})
      for (double s = 1; s <= 20.0001; s += 0.5)
        for (double tau : {0.1, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0}) {
          RadialProfile p;
          p.n = n;
          p.tau = tau;
          p.band = tau;
          p.c0 = s;
          p.delta = 0.1;
          const double closed = sphere_area(n - 1) / (n - 1) * (std::exp(-s * (n - 1)) - std::exp(-(s + tau) * (n - 1)));
          worst = std::max(worst, std::fabs(profile_energy(p) - closed) / closed);
          ++cases;
        }
    o.add(std::to_string(cases) + " grid points, worst relative error " + fmt("%.3g", worst) + " < 1e-4", worst < 1e-4);
    return o;
  });

  criterion(2, "solve_s contract", 5, [] {
    Outcome o;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ld(std::log(1e-3), std::log(0.3)), tu(0.1, 5);
    std::uniform_int_distribution<int> nn(2, 4);
    int ok_energy = 0, ok_support = 0;
    double worst = -HUGE_VAL;
    for (int i = 0; i < 100; ++i) {
      const double d = std::exp(ld(rng)), tau = tu(rng);
      const int n = nn(rng);
      RadialProfile p = loglog_profile(d, tau, n, std::pow(d, n), 0.1);
      const double le = std::log(profile_energy(p)) - n * std::log(d);
      worst = std::max(worst, le);
      ok_energy += le < 0;
      ok_support += p.log_support_radius() <= std::log(d / 2);
    }
    o.add(std::to_string(ok_energy) + "/100 smoothed energies < delta^n (worst log ratio " + fmt("%.3g", worst) + ")",
          ok_energy == 100);
    o.add(std::to_string(ok_support) + "/100 supports <= delta/2 (log domain)", ok_support == 100);
    return o;
  });

  criterion(3, "tentacle certificate chain", 30, [] {
    Outcome o;
    std::mt19937_64 rng(3);
    int chain_ok = 0;
    double worst_det = 0;
    for (int i = 0; i < 20; ++i) {
      Curve c = random_branch(rng);
      const double budget = 0.2;
      Tentacle t = make_tentacle(c, {1, 0, 0}, {0, 0}, 0.05, 2, budget);
      TentacleEnergy e = tentacle_energy(t);
      chain_ok += e.numeric <= e.bound && e.bound <= budget;
      for (int j = 0; j < 64; ++j) {
        const double z = c.length() * j / 63;
        auto J = t.tube.jacobian({0, 0, z});
        worst_det = std::max(worst_det, std::fabs(dot(cross(J[0], J[1]), J[2]) - 1));
      }
    }
    o.add(std::to_string(chain_ok) + "/20 curves: numeric <= certified bound <= budget", chain_ok == 20);
    o.add("axis Jacobian determinant within " + fmt("%.3g", worst_det) + " of 1 (64 points per curve)", worst_det < 1e-6);
    return o;
  });

  criterion(4, "branch proximity and tail neighbourhood, ternary depth 6", 30, [] {
    Outcome o;
    const auto &sys = ternary();
    CantorTree tree = build_tree(sys, 6);
    LemmaReport r0 = verify_branch_proximity(tree, sys, 0);
    std::printf("    [info] root level (not counted): worst margin %.4g; %s\n", r0.worst_margin(), r0.note.c_str());
    for (int k = 1; k <= 5; ++k) {
      LemmaReport r = verify_branch_proximity(tree, sys, k);
      o.add("level " + std::to_string(k) + ": " + std::to_string(r.entries.size()) +
                " branches within 2^{-k+2} + diam, worst margin " + fmt("%.4g", r.worst_margin()),
            r.pass());
    }
    for (int k = 1; k <= 5; ++k) {
      TailReport t = verify_tail_neighborhood(tree, sys, k);
      o.add("T_" + std::to_string(k) + " within eps_k = " + fmt("%.6g", t.eps) + " of C, eps decreasing",
            t.report.pass() && t.decreasing);
    }
    const double e3 = eps_k(sys, 3), exact = 0.5 + 1.0 / 27;
    o.add(fmt2("eps_3 = %.17g, 0.5 + 1/27 = %.17g", e3, exact), e3 == exact);
    return o;
  });

  MeshRun ternary4;
  criterion(5, "ternary mesh build K=4", 300, [&] {
    Outcome o;
    ternary4 = mesh_run(ternary(), 4);
    build_clauses(o, ternary4, 4, 30);
    return o;
  });

  criterion(6, "paper schedule n=2, K=12, analytic", 1, [] {
    Outcome o;
    SurfaceConfig cfg;
    cfg.mode = BuildMode::Analytic;
    cfg.schedule = BudgetSchedule::paper(2);
    SurfaceApprox a = build_analytic(ternary(), nullptr, 12, cfg);
    LedgerReport l = energy_ledger_check(a, std::log(1.0 / 3));
    bool per_tentacle = true, finite = std::isfinite(a.ledger.log_total);
    for (const auto &e : a.ledger.entries) {
      per_tentacle = per_tentacle && e.log_bound < -2.0 * e.level * std::log(4.0);
      finite = finite && std::isfinite(e.log_bound);
    }
    bool per_level = l.lines.size() == 12;
    for (const auto &line : l.lines) per_level = per_level && line.log_sum < -2.0 * line.level * std::log(2.0);
    o.add(std::to_string(a.ledger.entries.size()) + " tentacles, each < 4^{-2k}", per_tentacle && a.ledger.entries.size() == 8190);
    o.add("every level sum < 2^{-2k}", per_level);
    o.add(fmt("total %.6g < 1/3", l.total()), l.log_total < std::log(1.0 / 3));
    o.add("all logs finite (no underflow)", finite);
    return o;
  });

  criterion(7, "image neighbourhood and continuity on the K=4 build", 60, [&] {
    Outcome o;
    if (ternary4.a.grafts.empty()) throw InternalError("the K=4 build is missing");
    neighbourhood_clauses(o, ternary4.a, ternary(), 4);
    return o;
  });

  criterion(8, "exceptional set box counts", 1, [] {
    Outcome o;
    ExceptionalSet e = box_count(double_exponential_schedule(6));
    const double e6 = e.rows.back().estimate;
    o.add(fmt("delta_k = e^{-2^k}: estimate at k=6 %.4f", e6), fmt("%.4f", e6) == "0.0650" &&
                                                                  std::fabs(e6 - 6 * std::log(2.0) / 64) < 1e-12);
    o.add("strictly decreasing (ties k ln2 / 2^k at k=1,2 excepted)", e.strictly_decreasing());
    ExceptionalSet c = box_count(geometric_delta_schedule(12, 1.0 / 3));
    o.add(fmt("control 3^{-k}: estimate %.4f -> 0.6309", c.rows.back().estimate),
          std::fabs(c.rows.back().estimate - std::log(2.0) / std::log(3.0)) < 1e-12 &&
              fmt("%.4f", c.rows.back().estimate) == "0.6309");
    return o;
  });

  criterion(9, "Antoine necklaces and a K=3 build over m=4", 300, [] {
    Outcome o;
    for (int m : {4, 8}) {
      AntoineParams p;
      p.m = m;
      p.depth = 2;
      ChainCertificate c = certify_chain(build_antoine_chain(p));
      o.add("m=" + std::to_string(m) + ": linking +-1 for " + std::to_string(c.consecutive_ok) + "/" +
                std::to_string(c.consecutive_pairs) + " consecutive pairs, 0 for " + std::to_string(c.other_ok) + "/" +
                std::to_string(c.other_pairs) + " others, contained " + std::to_string(c.contained) + "/" +
                std::to_string(c.children),
            c.ok());
    }
    AntoineParams p;
    p.m = 4;
    p.depth = 2;
    CantorSystem sys = CantorSystem::antoine(p).place_default();
    MeshRun r = mesh_run(sys, 3);
    build_clauses(o, r, 3, 14);
    neighbourhood_clauses(o, r.a, sys, 3);
    return o;
  });

  criterion(10, "negative controls", 30, [] {
    Outcome o;
    const auto &sys = ternary();
    MeshRun r = mesh_run(sys, 2);
    o.add("unmodified K=2 build passes the suite", run_suite(r.a, sys, r.tree).pass());

    CantorTree bent = r.tree;
    BranchCurve &b = bent.branches.at(BinaryIndex("01"));
    auto S = b.curve.sample(40);
    for (auto &q : S) q = q + Vec3{0, 5, 0};
    b.curve = Curve::spline(S, b.curve.tangent(0), b.curve.tangent(b.length));
    o.add("offset branch: branch proximity flags it", !verify_branch_proximity(bent, sys, 1).pass());

    SurfaceApprox off = offset_region(r.a, BinaryIndex("01"), {10, 10, 10});
    o.add("offset grafted region: image neighbourhood flags it", !verify_image_lemma(off, sys, 2).pass());

    SurfaceApprox wide = widen_tentacle(r.a, r.tree, BinaryIndex("0"), 1.5);
    o.add("widened tentacle: tail disjointness flags it", !tail_disjointness(wide, r.tree, 1).pass());

    Mesh m = merged_tori();
    IntersectionReport ir = self_intersection(m);
    o.add("merged tori: " + std::to_string(ir.pairs.size()) + " intersecting pairs flagged", !ir.pass());
    return o;
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
