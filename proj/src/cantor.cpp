#include "cantorsurf/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 rotate_about(const Vec3 &v, const Vec3 &axis, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return c * v + s * cross(axis, v) + (1 - c) * dot(axis, v) * axis;
}

std::vector<double> cumulative_length(const std::vector<Vec3> &pts, bool closed) {
  std::vector<double> s(pts.size() + (closed ? 1 : 0), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) s[i] = s[i - 1] + dist(pts[i - 1], pts[i % pts.size()]);
  return s;
}

// rotation-minimizing frame around a closed polyline with the holonomy spread linearly
void closed_frames(Torus &t) {
  const auto &v = t.core;
  const std::size_t n = v.size();
  std::vector<Vec3> T(n);
  for (std::size_t i = 0; i < n; ++i) T[i] = normalized(v[(i + 1) % n] - v[(i + n - 1) % n]);
  std::vector<Vec3> r(n + 1);
  r[0] = any_orthogonal(T[0]);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = (i + 1) % n;
    Vec3 v1 = v[j] - v[i];
    double c1 = dot(v1, v1);
    Vec3 rl = r[i] - (2 / c1) * dot(v1, r[i]) * v1;
    Vec3 tl = T[i] - (2 / c1) * dot(v1, T[i]) * v1;
    Vec3 v2 = T[j] - tl;
    double c2 = dot(v2, v2);
    Vec3 rn = c2 > 0 ? rl - (2 / c2) * dot(v2, rl) * v2 : rl;
    rn = normalized(rn - dot(rn, T[j]) * T[j]);
    r[i + 1] = rn;
  }
  double phi = std::atan2(dot(cross(r[n], r[0]), T[0]), dot(r[n], r[0]));
  auto s = cumulative_length(v, true);
  double L = s.back();
  t.n1.resize(n);
  t.n2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 a = normalized(rotate_about(r[i], T[i], phi * s[i] / L));
    t.n1[i] = a;
    t.n2[i] = cross(T[i], a);
  }
}

struct CoreSampler {
  const Torus &t;
  std::vector<double> s;
  double L;
  explicit CoreSampler(const Torus &tt) : t(tt), s(cumulative_length(tt.core, true)), L(s.back()) {}
  // position and frame at arc length sigma (periodic)
  void eval(double sigma, Vec3 &p, Vec3 &a, Vec3 &b) const {
    sigma = std::fmod(sigma, L);
    if (sigma < 0) sigma += L;
    std::size_t i = std::upper_bound(s.begin(), s.end(), sigma) - s.begin();
    i = std::clamp<std::size_t>(i, 1, s.size() - 1) - 1;
    std::size_t n = t.core.size(), j = (i + 1) % n;
    double u = (sigma - s[i]) / (s[i + 1] - s[i]);
    p = (1 - u) * t.core[i] + u * t.core[j];
    Vec3 T = normalized(t.core[j] - t.core[i]);
    a = (1 - u) * t.n1[i] + u * t.n1[j];
    a = normalized(a - dot(a, T) * T);
    b = cross(T, a);
  }
};

Torus make_link(const Torus &parent, int j, int m, double w, double tube, int samples) {
  CoreSampler cs(parent);
  double dc = cs.L / m;
  double h = (dc - w) / 2;
  double c = j * dc;
  double perim = 4 * h + 2 * kPi * w;
  Torus link;
  link.tube = tube;
  link.stage = parent.stage + 1;
  link.chain_pos = j;
  link.core.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    double q = perim * i / samples;
    double sig, y;
    if (q < 2 * h) {
      sig = c - h + q; y = w;
    } else if (q < 2 * h + kPi * w) {
      double th = kPi / 2 - (q - 2 * h) / w;
      sig = c + h + w * std::cos(th); y = w * std::sin(th);
    } else if (q < 4 * h + kPi * w) {
      sig = c + h - (q - 2 * h - kPi * w); y = -w;
    } else {
      double th = -kPi / 2 - (q - 4 * h - kPi * w) / w;
      sig = c - h + w * std::cos(th); y = w * std::sin(th);
    }
    Vec3 p, a, b;
    cs.eval(sig, p, a, b);
    link.core.push_back(p + y * (j % 2 == 0 ? a : b));
  }
  closed_frames(link);
  return link;
}

double max_edge(const std::vector<Vec3> &c) {
  double e = 0;
  for (std::size_t i = 0; i < c.size(); ++i) e = std::max(e, dist(c[i], c[(i + 1) % c.size()]));
  return e;
}

SegmentsSoA closed_segments(const std::vector<Vec3> &c) {
  SegmentsSoA s;
  for (std::size_t i = 0; i < c.size(); ++i) s.push(c[i], c[(i + 1) % c.size()]);
  return s;
}

// max over child core points of (distance to parent core) plus half an edge
double containment_extent(const Torus &child, const Torus &parent) {
  auto d2 = segment_dist2(PointsSoA(child.core), closed_segments(parent.core));
  double mx = 0;
  for (double v : d2) mx = std::max(mx, std::sqrt(v));
  return mx + max_edge(child.core) / 2;
}

std::string pair_name(int stage, int parent, int i, int j) {
  std::ostringstream os;
  os << "stage " << stage << " parent torus " << parent << " links (" << i << "," << j << ")";
  return os.str();
}

} // namespace

Interval ternary_interval(const BinaryIndex &index) {
  // integer numerator over 3^k keeps the endpoints exact up to k = 33
  const int k = index.size();
  if (k > 33) {
    double a = 0, p = 1;
    for (int j = 0; j < k; ++j) { p /= 3; a += 2 * index[j] * p; }
    return {a, a + p};
  }
  std::uint64_t num = 0, den = 1;
  for (int j = 0; j < k; ++j) { num = 3 * num + 2 * index[j]; den *= 3; }
  return {double(num) / double(den), double(num + 1) / double(den)};
}

double Torus::core_length() const { return cumulative_length(core, true).back(); }

Vec3 IfsMap::apply(const Vec3 &p) const {
  Vec3 r{rot[0][0] * p.x + rot[0][1] * p.y + rot[0][2] * p.z, rot[1][0] * p.x + rot[1][1] * p.y + rot[1][2] * p.z,
         rot[2][0] * p.x + rot[2][1] * p.y + rot[2][2] * p.z};
  return ratio * r + translation;
}

TorusChain build_antoine_chain(const AntoineParams &p) {
  if (p.m < 4 || p.m % 2 != 0) throw ParameterError("Antoine link count m must be even and >= 4");
  if (p.depth < 0) throw ParameterError("Antoine depth must be >= 0");
  if (!(p.seed_tube > 0 && p.seed_tube < p.seed_major)) throw ParameterError("seed torus needs 0 < tube < major radius");
  TorusChain chain;
  chain.m = p.m;
  chain.stages = p.depth;
  Torus seed;
  seed.tube = p.seed_tube;
  const int ns = std::max(p.samples, 64);
  for (int i = 0; i < ns; ++i) {
    double a = 2 * kPi * i / ns;
    seed.core.push_back({p.seed_major * std::cos(a), p.seed_major * std::sin(a), 0});
  }
  closed_frames(seed);
  chain.tori.push_back(seed);
  chain.by_stage.push_back({0});

  double tube_frac = p.tube_frac;
  for (int stage = 1; stage <= p.depth; ++stage) {
    std::vector<int> next;
    const auto parents = chain.by_stage.back();
    for (int pid : parents) {
      const Torus parent = chain.tori[pid];
      const double w = p.offset_frac * parent.tube;
      if (parent.core_length() / p.m <= w)
        throw InfeasibleGeometry("link spacing below link width at stage " + std::to_string(stage));
      std::vector<Torus> links;
      // shrink the tube until the chain certifies, as long as linking itself is right
      for (int attempt = 0;; ++attempt) {
        links.clear();
        double tube = tube_frac * w;
        for (int j = 0; j < p.m; ++j) links.push_back(make_link(parent, j, p.m, w, tube, ns));
        std::string bad;
        bool geometric_only = true;
        for (int i = 0; i < p.m && bad.empty(); ++i) {
          if (containment_extent(links[i], parent) + tube >= parent.tube) {
            bad = "stage " + std::to_string(stage) + " parent torus " + std::to_string(pid) + " link " +
                  std::to_string(i) + " escapes parent";
            break;
          }
          for (int j = i + 1; j < p.m; ++j) {
            bool consecutive = (j == i + 1) || (i == 0 && j == p.m - 1);
            double d = polyline_distance_lower(links[i].core, links[j].core);
            if (d <= 2 * tube) { bad = pair_name(stage, pid, i, j) + " overlap"; break; }
            int lk = linking_number(links[i].core, links[j].core);
            if ((consecutive && std::abs(lk) != 1) || (!consecutive && lk != 0)) {
              bad = pair_name(stage, pid, i, j) + " linking number " + std::to_string(lk);
              geometric_only = false;
              break;
            }
          }
        }
        if (bad.empty()) break;
        if (!geometric_only || attempt >= 8) throw InfeasibleGeometry(bad);
        tube_frac *= 0.8;
      }
      for (auto &l : links) {
        l.parent = pid;
        int id = int(chain.tori.size());
        chain.tori.push_back(std::move(l));
        chain.tori[pid].children.push_back(id);
        next.push_back(id);
      }
    }
    chain.by_stage.push_back(next);
  }

  // Each link spans its strip [c-h-w, c+h+w] and consecutive strips overlap, so every parent core point has a
  // child core point within w + e/2. Summing over stages, with the rule continued past the stored depth,
  // bounds the distance from any core point to C.
  const int D = p.depth;
  std::vector<double> w(D + 1), e(D + 2, 0.0), L(D + 1);
  for (int S = 0; S <= D; ++S) {
    double tube = chain.tori[chain.by_stage[S][0]].tube, emax = 0, lmax = 0;
    for (int id : chain.by_stage[S]) {
      emax = std::max(emax, max_edge(chain.tori[id].core));
      lmax = std::max(lmax, chain.tori[id].core_length());
    }
    w[S] = p.offset_frac * tube;
    e[S] = emax;
    L[S] = lmax;
  }
  const double q = p.offset_frac * tube_frac;
  double tail = 0, wj = w[D], Lj = L[D];
  for (int j = 0; j < 200; ++j) {
    double Lnext = 2 * Lj / p.m + (2 * kPi - 2) * wj;
    double enext = 2 * Lnext / ns;  // strip-to-space distortion stays below 2
    tail += wj + enext / 2;
    Lj = Lnext;
    wj *= q;
  }
  chain.reach.assign(D + 1, 0.0);
  chain.reach[D] = tail;
  for (int S = D - 1; S >= 0; --S) chain.reach[S] = w[S] + e[S + 1] / 2 + chain.reach[S + 1];
  return chain;
}

double polyline_distance_lower(const std::vector<Vec3> &c1, const std::vector<Vec3> &c2) {
  auto one = [](const std::vector<Vec3> &a, const std::vector<Vec3> &b) {
    auto d2 = segment_dist2(PointsSoA(a), closed_segments(b));
    double mn = std::numeric_limits<double>::infinity();
    for (double v : d2) mn = std::min(mn, v);
    return std::sqrt(mn) - max_edge(a) / 2;
  };
  return std::max(one(c1, c2), one(c2, c1));
}

static std::vector<Vec3> subdivide_closed(const std::vector<Vec3> &c, double max_len) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 &a = c[i], &b = c[(i + 1) % c.size()];
    int pieces = std::max(1, int(std::ceil(dist(a, b) / max_len)));
    for (int k = 0; k < pieces; ++k) out.push_back(a + (double(k) / pieces) * (b - a));
  }
  return out;
}

double linking_raw(const std::vector<Vec3> &c1, const std::vector<Vec3> &c2) {
  return gauss_linking_raw(PointsSoA(c1), PointsSoA(c2));
}

int linking_number(const std::vector<Vec3> &c1, const std::vector<Vec3> &c2) {
  if (c1.size() < 3 || c2.size() < 3) throw ParameterError("linking number needs closed polylines with >= 3 vertices");
  double sep = polyline_distance_lower(c1, c2);
  double scale = std::max(max_edge(c1), max_edge(c2));
  if (!(sep > 1e-9 * scale)) {
    std::ostringstream os;
    os << "curves too close for a reliable linking number (separation bound " << sep << ", raw value "
       << linking_raw(c1, c2) << ")";
    throw DomainError(os.str());
  }
  // edges well below the separation make the midpoint rule accurate
  double target = sep / 3;
  auto a = subdivide_closed(c1, target), b = subdivide_closed(c2, target);
  if (a.size() > 20000 || b.size() > 20000) {
    a = subdivide_closed(c1, max_edge(c1) / 1.0);
    b = subdivide_closed(c2, max_edge(c2) / 1.0);
  }
  double raw = linking_raw(a, b);
  double r = std::round(raw);
  if (std::fabs(raw - r) > 0.1) {
    std::ostringstream os;
    os << "Gauss sum did not settle near an integer (raw value " << raw << ")";
    throw DomainError(os.str());
  }
  return int(r);
}

ChainCertificate certify_chain(const TorusChain &c) {
  ChainCertificate cert;
  for (const auto &parent : c.tori) {
    const auto &ch = parent.children;
    const int m = int(ch.size());
    for (int i = 0; i < m; ++i) {
      ++cert.children;
      const Torus &ti = c.tori[ch[i]];
      if (containment_extent(ti, parent) + ti.tube < parent.tube) ++cert.contained;
      for (int j = i + 1; j < m; ++j) {
        const Torus &tj = c.tori[ch[j]];
        bool consecutive = (j == i + 1) || (i == 0 && j == m - 1);
        bool disjoint = polyline_distance_lower(ti.core, tj.core) > ti.tube + tj.tube;
        int lk = linking_number(ti.core, tj.core);
        if (consecutive) {
          ++cert.consecutive_pairs;
          if (disjoint && std::abs(lk) == 1) ++cert.consecutive_ok;
        } else {
          ++cert.other_pairs;
          if (disjoint && lk == 0) ++cert.other_ok;
        }
      }
    }
  }
  return cert;
}

// ---------------------------------------------------------------------------

CantorSystem CantorSystem::ternary(int max_depth) {
  CantorSystem s;
  s.kind_ = GeneratorKind::Ternary;
  s.max_depth_ = max_depth;
  return s;
}

CantorSystem CantorSystem::ifs(std::vector<IfsMap> maps, int max_depth) {
  if (maps.size() != 2) throw ParameterError("the binary cell structure needs exactly two IFS maps");
  double lam = maps[0].ratio;
  for (const auto &m : maps)
    if (!(m.ratio > 0 && m.ratio < 1) || m.ratio != lam) throw ParameterError("IFS maps must share one ratio in (0,1)");
  CantorSystem s;
  s.kind_ = GeneratorKind::Ifs;
  s.max_depth_ = max_depth;
  s.maps_ = std::move(maps);
  // invariant ball around the midpoint of the fixed points
  Vec3 c = 0.5 * (s.maps_[0].translation + s.maps_[1].translation) / (1 - lam);
  double r = 0;
  for (const auto &m : s.maps_) r = std::max(r, dist(m.apply(c), c) / (1 - lam));
  s.ifs_center_ = c;
  s.ifs_radius_ = r;
  Vec3 c0 = s.maps_[0].apply(c), c1 = s.maps_[1].apply(c);
  if (dist(c0, c1) <= 2 * lam * r) throw InfeasibleGeometry("IFS first-level balls overlap (maps (0,1))");
  return s;
}

CantorSystem CantorSystem::default_ifs(int max_depth) {
  IfsMap f0, f1;
  f0.ratio = f1.ratio = 0.3;
  // quarter turns about z and y: the attractor is a 3D dust and no grandchild center lies on a parent chord
  double rz[3][3] = {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}};
  double ry[3][3] = {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}};
  std::copy(&rz[0][0], &rz[0][0] + 9, &f0.rot[0][0]);
  std::copy(&ry[0][0], &ry[0][0] + 9, &f1.rot[0][0]);
  f0.translation = {-1, 0, 0};
  f1.translation = {1, 0, 0};
  return ifs({f0, f1}, max_depth);
}

CantorSystem CantorSystem::antoine(const AntoineParams &p) {
  CantorSystem s;
  s.kind_ = GeneratorKind::Antoine;
  s.chain_ = std::make_shared<TorusChain>(build_antoine_chain(p));
  // deepest binary level at which every cell still exists
  const int m = p.m;
  std::function<int(int, int)> g;
  std::function<int(int)> f = [&](int stage) -> int {
    if (stage >= p.depth) return 0;
    return 1 + std::min(g((m + 1) / 2, stage), g(m / 2, stage));
  };
  g = [&](int len, int stage) -> int {
    if (len == 1) return f(stage + 1);
    return 1 + std::min(g((len + 1) / 2, stage), g(len / 2, stage));
  };
  s.max_depth_ = f(0);
  return s;
}

CantorSystem &CantorSystem::place_default(double d) {
  xf_ = AmbientTransform{};
  CantorCell root = cell(BinaryIndex{});
  double sc = 1.0 / root.diameter;
  xf_.scale = sc;
  xf_.translation = Vec3{0, 0, d} - sc * root.center;
  cache_ = std::make_shared<Cache>();
  return *this;
}

Torus CantorSystem::torus_ambient(int id) const {
  Torus t = chain_->tori.at(id);
  for (auto &v : t.core) v = xf_.apply(v);
  t.tube *= xf_.scale;
  return t;
}

CantorSystem::AntoineState CantorSystem::resolve(const BinaryIndex &index) const {
  AntoineState st{0, -1, -1};
  const auto &tori = chain_->tori;
  for (int i = 0; i < index.size(); ++i) {
    if (st.lo < 0) {
      if (tori[st.torus].children.empty()) throw DepthExceeded(index.size(), max_depth_);
      st.lo = 0;
      st.hi = int(tori[st.torus].children.size());
    }
    int len = st.hi - st.lo, mid = st.lo + (len + 1) / 2;
    if (index[i] == 0) st.hi = mid; else st.lo = mid;
    if (st.hi - st.lo == 1) st = {tori[st.torus].children[st.lo], -1, -1};
  }
  return st;
}

std::vector<int> CantorSystem::state_tori(const AntoineState &s) const {
  if (s.lo < 0) return {s.torus};
  const auto &ch = chain_->tori[s.torus].children;
  return std::vector<int>(ch.begin() + s.lo, ch.begin() + s.hi);
}

CantorCell CantorSystem::make_torus_union_cell(const BinaryIndex &index, const std::vector<int> &ids) const {
  CantorCell c;
  c.index = index;
  c.geometry.kind = GeometryKind::TorusUnion;
  c.geometry.tori = ids;
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  double tube = 0;
  for (int id : ids) {
    const Torus &t = chain_->tori[id];
    tube = std::max(tube, t.tube);
    for (const auto &v : t.core) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
  }
  Vec3 ctr = 0.5 * (lo + hi);
  double r = 0;
  for (int id : ids)
    for (const auto &v : chain_->tori[id].core) r = std::max(r, dist(v, ctr));
  r += tube;
  c.center = xf_.apply(ctr);
  c.radius = r * xf_.scale;
  c.diameter = 2 * c.radius;
  return c;
}

CantorCell CantorSystem::cell(const BinaryIndex &index) const {
  if (index.size() > max_depth_) throw DepthExceeded(index.size(), max_depth_);
  CantorCell c;
  c.index = index;
  switch (kind_) {
  case GeneratorKind::Ternary: {
    Interval iv = ternary_interval(index);
    c.geometry.kind = GeometryKind::Segment;
    c.geometry.a = xf_.apply({iv.a, 0, 0});
    c.geometry.b = xf_.apply({iv.b, 0, 0});
    c.center = 0.5 * (c.geometry.a + c.geometry.b);
    c.diameter = (iv.b - iv.a) * xf_.scale;
    c.radius = c.diameter / 2;
    return c;
  }
  case GeneratorKind::Ifs: {
    Vec3 p = ifs_center_;
    double r = ifs_radius_;
    for (int i = index.size() - 1; i >= 0; --i) {
      p = maps_[index[i]].apply(p);
      r *= maps_[index[i]].ratio;
    }
    c.geometry.kind = GeometryKind::Ball;
    c.geometry.ball_center = c.center = xf_.apply(p);
    c.geometry.ball_radius = c.radius = r * xf_.scale;
    c.diameter = 2 * c.radius;
    return c;
  }
  case GeneratorKind::Antoine:
    return make_torus_union_cell(index, state_tori(resolve(index)));
  }
  throw InternalError("unknown generator");
}

std::vector<CantorCell> CantorSystem::descendants(const BinaryIndex &index, int d) const {
  if (d > max_depth_) throw DepthExceeded(d, max_depth_);
  std::vector<CantorCell> out;
  const int extra = d - index.size();
  if (extra < 0) throw ParameterError("descendant depth above the cell depth");
  out.reserve(std::size_t(1) << extra);
  for (std::uint64_t v = 0; v < (std::uint64_t(1) << extra); ++v) {
    BinaryIndex w = index;
    for (int i = extra - 1; i >= 0; --i) w = w.child(int((v >> i) & 1u));
    out.push_back(cell(w));
  }
  return out;
}

std::vector<CantorCell> CantorSystem::cells_at(int k) const { return descendants(BinaryIndex{}, k); }

double CantorSystem::max_cell_diameter(int k) const {
  if (k > max_depth_) throw DepthExceeded(k, max_depth_);
  switch (kind_) {
  case GeneratorKind::Ternary: return std::pow(3.0, -k) * xf_.scale;
  case GeneratorKind::Ifs: return 2 * ifs_radius_ * std::pow(maps_[0].ratio, k) * xf_.scale;
  case GeneratorKind::Antoine: {
    double mx = 0;
    for (const auto &c : cells_at(k)) mx = std::max(mx, c.diameter);
    return mx;
  }
  }
  return 0;
}

std::pair<Vec3, double> CantorSystem::point_of(const BinaryIndex &code, int resolve_depth) const {
  if (resolve_depth < code.size()) throw ParameterError("resolve depth below code length");
  if (resolve_depth > max_depth_) throw DepthExceeded(resolve_depth, max_depth_);
  BinaryIndex w = code;
  while (w.size() < resolve_depth) w = w.child(0);
  CantorCell c = cell(w);
  return {c.center, c.diameter};
}

std::shared_ptr<const CantorSystem::Exclusion> CantorSystem::exclusion(int d) const {
  {
    std::lock_guard<std::mutex> lk(cache_->mu);
    auto it = cache_->by_depth.find(d);
    if (it != cache_->by_depth.end()) return it->second;
  }
  auto ex = std::make_shared<Exclusion>();
  if (kind_ == GeneratorKind::Ternary) {
    SegmentsSoA segs;
    for (const auto &c : cells_at(d)) segs.push(c.geometry.a, c.geometry.b);
    ex->segment_groups.push_back({0.0, std::move(segs)});
  } else if (kind_ == GeneratorKind::Ifs) {
    for (const auto &c : cells_at(d)) {
      ex->ball_centers.push(c.center);
      ex->ball_radius = c.radius;
    }
  } else {
    std::vector<int> ids;
    for (const auto &c : cells_at(d))
      for (int id : c.geometry.tori) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int id : ids) {
      Torus t = torus_ambient(id);
      auto &g = ex->segment_groups;
      auto it = std::find_if(g.begin(), g.end(), [&](auto &e) { return e.first == t.tube; });
      if (it == g.end()) { g.push_back({t.tube, {}}); it = g.end() - 1; }
      for (std::size_t i = 0; i < t.core.size(); ++i) it->second.push(t.core[i], t.core[(i + 1) % t.core.size()]);
    }
  }
  std::lock_guard<std::mutex> lk(cache_->mu);
  cache_->by_depth[d] = ex;
  return ex;
}

std::vector<double> CantorSystem::dist_lower(const std::vector<Vec3> &xs, int d) const {
  d = std::min(d, max_depth_);
  auto ex = exclusion(d);
  PointsSoA q(xs);
  std::vector<double> out(xs.size(), std::numeric_limits<double>::infinity());
  for (const auto &[r, segs] : ex->segment_groups) {
    auto d2 = segment_dist2(q, segs);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::min(out[i], std::max(0.0, std::sqrt(d2[i]) - r));
  }
  if (ex->ball_centers.size()) {
    auto d2 = nearest_dist2(q, ex->ball_centers);
    for (std::size_t i = 0; i < xs.size(); ++i)
      out[i] = std::min(out[i], std::max(0.0, std::sqrt(d2[i]) - ex->ball_radius));
  }
  return out;
}

std::vector<double> CantorSystem::dist_upper(const std::vector<Vec3> &xs, const BinaryIndex &index, int d) const {
  d = std::max(index.size(), std::min(d, max_depth_));
  auto cells = descendants(index, d);
  std::vector<double> out(xs.size(), std::numeric_limits<double>::infinity());
  if (kind_ == GeneratorKind::Antoine) {
    std::map<int, SegmentsSoA> by_stage;
    for (const auto &c : cells)
      for (int id : c.geometry.tori) {
        Torus t = torus_ambient(id);
        auto &segs = by_stage[t.stage];
        for (std::size_t i = 0; i < t.core.size(); ++i) segs.push(t.core[i], t.core[(i + 1) % t.core.size()]);
      }
    PointsSoA q(xs);
    for (const auto &[stage, segs] : by_stage) {
      auto d2 = segment_dist2(q, segs);
      double r = chain_->reach[stage] * xf_.scale;
      for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::min(out[i], std::sqrt(d2[i]) + r);
    }
    return out;
  }
  // every descendant meets C, so |x - center| + radius bounds the distance
  double r0 = cells.front().radius;
  bool uniform = std::all_of(cells.begin(), cells.end(), [&](const CantorCell &c) { return c.radius == r0; });
  if (uniform) {
    PointsSoA ctr;
    for (const auto &c : cells) ctr.push(c.center);
    auto d2 = nearest_dist2(PointsSoA(xs), ctr);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::sqrt(d2[i]) + r0;
  } else {
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (const auto &c : cells) out[i] = std::min(out[i], dist(xs[i], c.center) + c.radius);
  }
  return out;
}

Vec3 CantorSystem::nearest_point(const Vec3 &x, int d) const {
  d = std::min(d, max_depth_);
  auto ex = exclusion(d);
  Vec3 best{};
  double bd = std::numeric_limits<double>::infinity();
  for (const auto &[r, segs] : ex->segment_groups)
    for (std::size_t i = 0; i < segs.size(); ++i) {
      Vec3 a = segs.a[i], b = segs.b[i], ab = b - a;
      double l2 = norm2(ab);
      double t = l2 > 0 ? std::clamp(dot(x - a, ab) / l2, 0.0, 1.0) : 0.0;
      Vec3 q = a + t * ab;
      double dd = dist(x, q) - r;
      if (dd < bd) { bd = dd; best = q; }
    }
  for (std::size_t i = 0; i < ex->ball_centers.size(); ++i) {
    double dd = dist(x, ex->ball_centers[i]);
    if (dd < bd) { bd = dd; best = ex->ball_centers[i]; }
  }
  return best;
}

Vec3 CantorSystem::preferred_anchor(const BinaryIndex &index) const {
  const int k = index.size();
  switch (kind_) {
  case GeneratorKind::Ternary: {
    CantorCell c = cell(index);
    return c.center - Vec3{0, 0, 0.9 * std::ldexp(1.0, -k)};
  }
  case GeneratorKind::Ifs:
    return cell(index).center;
  case GeneratorKind::Antoine: {
    AntoineState st = resolve(index);
    int owner = st.torus, lo = st.lo, hi = st.hi;
    const Torus &t = chain_->tori[owner];
    int m = int(t.children.size());
    if (m == 0) {
      // deepest stage: any core point is as good as another
      return xf_.apply(t.core[0]);
    }
    if (lo < 0) { lo = 0; hi = m; }
    int j = lo + (hi - lo - 1) / 2;
    CoreSampler cs(t);
    Vec3 p, a, b;
    cs.eval(j * cs.L / m, p, a, b);
    return xf_.apply(p);
  }
  }
  return {};
}

} // namespace cantorsurf
