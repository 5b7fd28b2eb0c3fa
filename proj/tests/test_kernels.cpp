#include <doctest.h>

#include <cmath>
#include <random>

#include "cantorsurf/kernels.hpp"
#include "cantorsurf/predicates.hpp"
#include "cantorsurf/vec.hpp"

using namespace cantorsurf;

namespace {

std::vector<Vec3> cloud(std::mt19937_64 &rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec3> out(n);
  for (auto &p : out) p = {u(rng), u(rng), u(rng)};
  return out;
}

} // namespace

TEST_CASE("scalar kernels against brute force") {
  std::mt19937_64 rng(3);
  auto q = cloud(rng, 37, 2), p = cloud(rng, 53, 2);
  auto d2 = nearest_dist2(PointsSoA(q), PointsSoA(p));
  for (std::size_t i = 0; i < q.size(); ++i) {
    double best = 1e300;
    for (const auto &x : p) best = std::min(best, dot(q[i] - x, q[i] - x));
    CHECK(d2[i] == doctest::Approx(best).epsilon(1e-12));
  }
  SegmentsSoA segs;
  for (int j = 0; j + 1 < 20; ++j) segs.push(p[j], p[j + 1]);
  auto s2 = segment_dist2(PointsSoA(q), segs);
  for (std::size_t i = 0; i < q.size(); ++i) {
    double best = 1e300;
    for (int j = 0; j + 1 < 20; ++j) best = std::min(best, point_segment_dist(q[i], p[j], p[j + 1]));
    CHECK(std::sqrt(s2[i]) == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("avx2 kernels match scalar") {
  const KernelTable *v = avx2_kernels();
  if (!v) {
    MESSAGE("avx2 not available on this cpu, equivalence skipped");
    return;
  }
  const KernelTable &s = scalar_kernels();
  std::mt19937_64 rng(11);
  for (int n : {1, 3, 4, 5, 17, 64, 301}) {
    auto q = cloud(rng, n, 5), p = cloud(rng, n + 2, 5);
    PointsSoA Q(q), P(p);
    std::vector<double> a(n), b(n);
    s.nearest_dist2(Q.x.data(), Q.y.data(), Q.z.data(), Q.size(), P.x.data(), P.y.data(), P.z.data(), P.size(), a.data());
    v->nearest_dist2(Q.x.data(), Q.y.data(), Q.z.data(), Q.size(), P.x.data(), P.y.data(), P.z.data(), P.size(), b.data());
    for (int i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));

    SegmentsSoA S;
    for (int j = 0; j + 1 < int(p.size()); ++j) S.push(p[j], p[j + 1]);
    s.segment_dist2(Q.x.data(), Q.y.data(), Q.z.data(), Q.size(), S.a.x.data(), S.a.y.data(), S.a.z.data(), S.b.x.data(),
                    S.b.y.data(), S.b.z.data(), S.size(), a.data());
    v->segment_dist2(Q.x.data(), Q.y.data(), Q.z.data(), Q.size(), S.a.x.data(), S.a.y.data(), S.a.z.data(), S.b.x.data(),
                     S.b.y.data(), S.b.z.data(), S.size(), b.data());
    for (int i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));

    double gs = s.gauss_sum(Q.x.data(), Q.y.data(), Q.z.data(), Q.size(), P.x.data(), P.y.data(), P.z.data(), P.size());
    double gv = v->gauss_sum(Q.x.data(), Q.y.data(), Q.z.data(), Q.size(), P.x.data(), P.y.data(), P.z.data(), P.size());
    CHECK(gv == doctest::Approx(gs).epsilon(1e-10));
  }
}

TEST_CASE("segment-segment distance") {
  CHECK(segment_segment_dist({0, 0, 0}, {1, 0, 0}, {0.5, -1, 1}, {0.5, 1, 1}) == doctest::Approx(1.0));
  CHECK(segment_segment_dist({0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}) == doctest::Approx(1.0));
  CHECK(segment_segment_dist({0, 0, 0}, {1, 0, 0}, {0, 0, 0}, {0, 1, 0}) == doctest::Approx(0.0));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto p = cloud(rng, 4, 1);
    double d = segment_segment_dist(p[0], p[1], p[2], p[3]), brute = 1e300;
    for (int i = 0; i <= 400; ++i) brute = std::min(brute, point_segment_dist(p[0] + (i / 400.0) * (p[1] - p[0]), p[2], p[3]));
    CHECK(d <= brute + 1e-12);
    CHECK(d >= brute - 1e-2);
  }
}

TEST_CASE("exact predicates") {
  Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  CHECK(orient3d(a, b, c, {0, 0, 1}) != 0);
  CHECK(orient3d(a, b, c, {0, 0, -1}) == -orient3d(a, b, c, {0, 0, 1}));
  CHECK(orient3d(a, b, c, {0.3, 0.3, 0}) == 0);
  // nearly coplanar point that needs the exact fallback
  Vec3 d{0.1, 0.1, 1e-300};
  CHECK(orient3d(a, b, c, d) == -orient3d(a, b, c, {0.1, 0.1, -1e-300}));
  CHECK(orient3d(a, b, c, d) != 0);
  CHECK(orient2d(0, 0, 1, 0, 0.5, 1e-300) == -orient2d(0, 0, 1, 0, 0.5, -1e-300));
  CHECK(orient2d(0, 0, 1, 0, 0.5, 1e-300) != 0);
  CHECK(orient2d(0, 0, 1, 1, 3, 3) == 0);
  CHECK(orient2d(0.1, 0.1, 0.3, 0.3, 0.7, 0.7) == 0);
}
