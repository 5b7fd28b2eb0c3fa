#include <doctest.h>

#include <cmath>
#include <set>

#include "cantorsurf/cantor.hpp"
#include "cantorsurf/error.hpp"

using namespace cantorsurf;

namespace {

std::vector<Vec3> circle(Vec3 c, Vec3 u, Vec3 v, double r, int n = 256) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) {
    double t = 2 * M_PI * i / n;
    out.push_back(c + r * std::cos(t) * u + r * std::sin(t) * v);
  }
  return out;
}

std::vector<Vec3> torus_surface(const Torus &t, int ring = 8) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < t.core.size(); ++i)
    for (int j = 0; j < ring; ++j) {
      double a = 2 * M_PI * j / ring;
      out.push_back(t.core[i] + t.tube * (std::cos(a) * t.n1[i] + std::sin(a) * t.n2[i]));
    }
  return out;
}

double brute_diameter(const std::vector<Vec3> &pts) {
  double d = 0;
  for (std::size_t i = 0; i < pts.size(); i += 3)
    for (std::size_t j = i + 1; j < pts.size(); j += 3) d = std::max(d, dist(pts[i], pts[j]));
  return d;
}

const CantorSystem &antoine8() {
  static CantorSystem sys = [] {
    AntoineParams p;
    p.m = 8;
    p.depth = 2;
    return CantorSystem::antoine(p);
  }();
  return sys;
}

} // namespace

TEST_CASE("ternary intervals") {
  Interval r = ternary_interval(BinaryIndex(""));
  CHECK(r.a == 0.0);
  CHECK(r.b == 1.0);
  Interval z = ternary_interval(BinaryIndex("0"));
  CHECK(z.a == 0.0);
  CHECK(z.b == doctest::Approx(1.0 / 3));
  Interval t = ternary_interval(BinaryIndex("10"));
  CHECK(t.a == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(t.b == doctest::Approx(7.0 / 9).epsilon(1e-15));
  // direct middle-third recursion
  for (const auto &idx : all_indices(6)) {
    double a = 0, b = 1;
    for (int i = 0; i < idx.size(); ++i) {
      double third = (b - a) / 3;
      if (idx[i]) a = b - third;
      else b = a + third;
    }
    Interval iv = ternary_interval(idx);
    CHECK(iv.a == doctest::Approx(a).epsilon(1e-13));
    CHECK(iv.b == doctest::Approx(b).epsilon(1e-13));
  }
}

TEST_CASE("ternary cells") {
  CantorSystem sys = CantorSystem::ternary(30);
  CantorCell root = sys.cell(BinaryIndex(""));
  CHECK(root.geometry.kind == GeometryKind::Segment);
  CHECK(root.diameter == 1.0);
  CHECK(root.geometry.a == Vec3{0, 0, 0});
  CHECK(root.geometry.b == Vec3{1, 0, 0});
  CantorCell c = sys.cell(BinaryIndex("11"));
  CHECK(c.geometry.a.x == doctest::Approx(8.0 / 9));
  CHECK(c.geometry.b.x == doctest::Approx(1.0));
  CHECK(c.diameter == doctest::Approx(1.0 / 9));
  for (int k = 0; k <= 30; ++k) CHECK(sys.max_cell_diameter(k) == std::pow(3.0, -k));
  CHECK(sys.max_cell_diameter(3) == doctest::Approx(1.0 / 27).epsilon(1e-15));
  try {
    sys.cell(BinaryIndex(std::string(31, '0')));
    FAIL("expected DepthExceeded");
  } catch (const DepthExceeded &e) {
    CHECK(e.max_depth == 30);
    CHECK(std::string(e.what()).find("30") != std::string::npos);
  }
  CHECK_THROWS_AS(sys.max_cell_diameter(31), DepthExceeded);
}

TEST_CASE("ternary point_of") {
  CantorSystem sys = CantorSystem::ternary();
  auto [p0, r0] = sys.point_of(BinaryIndex("0"), 10);
  CHECK(std::fabs(p0.x) <= std::pow(3.0, -10));
  CHECK(r0 == doctest::Approx(std::pow(3.0, -10)));
  auto [p1, r1] = sys.point_of(BinaryIndex(std::string(20, '1')), 20);
  CHECK(std::fabs(p1.x - 1) <= std::pow(3.0, -20));
  CHECK(r1 > 0);
  CHECK_THROWS_AS(sys.point_of(BinaryIndex("0"), 31), DepthExceeded);
}

TEST_CASE("children nested and disjoint") {
  CantorSystem tern = CantorSystem::ternary();
  for (int k = 0; k < 6; ++k)
    for (const auto &idx : all_indices(k)) {
      Interval p = ternary_interval(idx), a = ternary_interval(idx.child(0)), b = ternary_interval(idx.child(1));
      CHECK(a.a >= p.a);
      CHECK(b.b <= p.b);
      CHECK(a.b < b.a);
    }
  CantorSystem ifs = CantorSystem::default_ifs();
  for (int k = 0; k < 6; ++k)
    for (const auto &idx : all_indices(k)) {
      CantorCell p = ifs.cell(idx), a = ifs.cell(idx.child(0)), b = ifs.cell(idx.child(1));
      CHECK(dist(a.center, p.center) + a.radius <= p.radius * (1 + 1e-12));
      CHECK(dist(b.center, p.center) + b.radius <= p.radius * (1 + 1e-12));
      CHECK(dist(a.center, b.center) > a.radius + b.radius);
      CHECK(a.diameter <= p.diameter);
    }
  for (int k = 0; k < 12; ++k) CHECK(ifs.max_cell_diameter(k + 1) <= ifs.max_cell_diameter(k));
}

TEST_CASE("linking numbers") {
  auto a = circle({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 1);
  auto b = circle({0, 0, 10}, {1, 0, 0}, {0, 1, 0}, 1);
  CHECK(linking_number(a, b) == 0);
  // Hopf pair: unit circle in xz-plane through the center of the first
  auto h = circle({1, 0, 0}, {1, 0, 0}, {0, 0, 1}, 1);
  CHECK(std::abs(linking_number(a, h)) == 1);
  CHECK(std::fabs(std::fabs(linking_raw(a, h)) - 1) < 1e-3);
  // touching curves: refuses to round and reports the raw value
  auto t = circle({2, 0, 0}, {1, 0, 0}, {0, 1, 0}, 1);
  try {
    linking_number(a, t);
    FAIL("expected DomainError");
  } catch (const DomainError &e) {
    CHECK(std::string(e.what()).find("raw") != std::string::npos);
  }
}

TEST_CASE("antoine m=4 depth 1") {
  AntoineParams p;
  p.m = 4;
  p.depth = 1;
  TorusChain c = build_antoine_chain(p);
  CHECK(c.by_stage.size() == 2);
  CHECK(c.by_stage[1].size() == 4);
  const auto &kids = c.tori[0].children;
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(linking_number(c.tori[kids[j]].core, c.tori[kids[(j + 1) % 4]].core)) == 1);
    CHECK(linking_number(c.tori[kids[j]].core, c.tori[kids[(j + 2) % 4]].core) == 0);
  }
  CHECK(certify_chain(c).ok());
}

TEST_CASE("antoine depth 0 is the seed torus") {
  AntoineParams p;
  p.m = 4;
  p.depth = 0;
  CantorSystem sys = CantorSystem::antoine(p);
  CHECK(sys.max_depth() == 0);
  CantorCell root = sys.cell(BinaryIndex(""));
  CHECK(root.geometry.kind == GeometryKind::TorusUnion);
  CHECK(root.geometry.tori == std::vector<int>{0});
}

TEST_CASE("antoine parameter errors") {
  AntoineParams p;
  p.m = 5;
  CHECK_THROWS_AS(build_antoine_chain(p), ParameterError);
  p.m = 2;
  CHECK_THROWS_AS(build_antoine_chain(p), ParameterError);
  p.m = 4;
  p.offset_frac = 1.5;  // links stick out of the parent tube
  CHECK_THROWS_AS(build_antoine_chain(p), InfeasibleGeometry);
}

TEST_CASE("antoine m=8 depth 2") {
  const CantorSystem &sys = antoine8();
  const TorusChain &c = *sys.chain();
  CHECK(c.by_stage[1].size() == 8);
  CHECK(c.by_stage[2].size() == 64);
  ChainCertificate cert = certify_chain(c);
  CHECK(cert.ok());
  CHECK(cert.consecutive_pairs == 8 * 9);

  // "1" is the second arc of the first chain: chain positions 4..7
  CantorCell one = sys.cell(BinaryIndex("1"));
  std::vector<int> expect(c.tori[0].children.begin() + 4, c.tori[0].children.end());
  CHECK(one.geometry.tori == expect);
  std::vector<Vec3> pts;
  for (int id : one.geometry.tori) {
    auto s = torus_surface(c.tori[id]);
    pts.insert(pts.end(), s.begin(), s.end());
  }
  double brute = brute_diameter(pts);
  CantorSystem raw = CantorSystem::antoine([] {
    AntoineParams p;
    p.m = 8;
    p.depth = 2;
    return p;
  }());
  CHECK(raw.cell(BinaryIndex("1")).diameter >= brute);

  // single tori of stage 1 sit at binary depth 3, of stage 2 at depth 6
  CHECK(sys.max_cell_diameter(6) < sys.max_cell_diameter(3));
  for (int k = 0; k < sys.max_depth(); ++k) CHECK(sys.max_cell_diameter(k + 1) <= sys.max_cell_diameter(k));
}

TEST_CASE("antoine point_of lies in its group") {
  const CantorSystem &sys = antoine8();
  auto [pt, rad] = sys.point_of(BinaryIndex("0"), 4);
  CantorCell group = sys.cell(BinaryIndex("0"));
  double best = 1e300;
  for (int id : group.geometry.tori) {
    Torus t = sys.torus_ambient(id);
    for (std::size_t i = 0; i < t.core.size(); ++i)
      best = std::min(best, point_segment_dist(pt, t.core[i], t.core[(i + 1) % t.core.size()]) - t.tube);
  }
  CHECK(best <= rad);
  CHECK(rad == doctest::Approx(sys.cell(BinaryIndex("0000")).diameter));
}

TEST_CASE("default placement puts C about 150 from the origin") {
  std::vector<CantorSystem> systems = {CantorSystem::ternary(), CantorSystem::default_ifs(), antoine8()};
  for (auto &s : systems) {
    s.place_default();
    CHECK(s.max_cell_diameter(0) == doctest::Approx(1.0).epsilon(1e-9));
    int d = std::min(s.max_depth(), 8);
    double lo = s.dist_lower({Vec3{0, 0, 0}}, d)[0];
    double hi = s.dist_upper({Vec3{0, 0, 0}}, BinaryIndex(""), d)[0];
    CHECK(lo >= 100);
    CHECK(hi <= 200);
    CHECK(lo <= hi);
  }
}

TEST_CASE("distance bounds bracket sampled truth") {
  CantorSystem s = CantorSystem::ternary();
  std::vector<Vec3> xs = {{0.5, 0.2, 0}, {0.1, 0, 0.3}, {2, 1, 1}};
  auto lo = s.dist_lower(xs, 12);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double truth = 1e300;
    for (const auto &c : s.cells_at(12)) truth = std::min(truth, dist(xs[i], c.geometry.a));
    CHECK(lo[i] <= truth);
    CHECK(s.dist_upper({xs[i]}, BinaryIndex(""), 12)[0] >= truth - 1e-12);
  }
}
