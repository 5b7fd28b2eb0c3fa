#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "cantorsurf/binary_index.hpp"
#include "cantorsurf/kernels.hpp"
#include "cantorsurf/vec.hpp"

namespace cantorsurf {

struct Interval {
  double a = 0, b = 1;
};

Interval ternary_interval(const BinaryIndex &index);

// Similarity x -> scale * x + translation applied to every generator's model geometry.
struct AmbientTransform {
  double scale = 1;
  Vec3 translation{};
  Vec3 apply(const Vec3 &p) const { return scale * p + translation; }
};

enum class GeometryKind { Segment, Ball, TorusUnion };

struct CellGeometry {
  GeometryKind kind = GeometryKind::Segment;
  Vec3 a{}, b{};          // segment endpoints
  Vec3 ball_center{};     // ball
  double ball_radius = 0;
  std::vector<int> tori;  // torus ids for TorusUnion
};

struct CantorCell {
  BinaryIndex index;
  CellGeometry geometry;
  double diameter = 0;  // exact or certified upper bound of the stored geometry
  Vec3 center{};        // bounding-ball center
  double radius = 0;    // bounding-ball radius, geometry subset of ball(center, radius)
};

// Solid torus: tube of radius `tube` around a closed polyline core.
struct Torus {
  std::vector<Vec3> core;
  std::vector<Vec3> n1, n2;  // unit normal frame per core vertex
  double tube = 0;
  int stage = 0;
  int parent = -1;
  int chain_pos = 0;
  std::vector<int> children;  // chain order
  double core_length() const;
};

struct TorusChain {
  int m = 4;
  int stages = 1;
  std::vector<Torus> tori;  // tori[0] is the seed
  std::vector<std::vector<int>> by_stage;
  // reach[S]: every core point of a stage-S torus is within reach[S] of C inside that torus
  std::vector<double> reach;
};

struct IfsMap {
  double ratio = 0.3;
  double rot[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Vec3 translation{};
  Vec3 apply(const Vec3 &p) const;
};

struct AntoineParams {
  int m = 8;
  int depth = 2;
  double seed_major = 1.0;
  double seed_tube = 0.5;
  double offset_frac = 0.6;  // link half-width w relative to parent tube radius
  double tube_frac = 0.25;   // child tube relative to w, shrunk on failure
  int samples = 192;         // core vertices per link
};

enum class GeneratorKind { Ternary, Ifs, Antoine };

class CantorSystem {
public:
  static CantorSystem ternary(int max_depth = 30);
  static CantorSystem ifs(std::vector<IfsMap> maps, int max_depth = 30);
  static CantorSystem default_ifs(int max_depth = 30);
  static CantorSystem antoine(const AntoineParams &p);

  // scale the root cell to unit diameter and put its bounding center at distance `d` above the origin
  CantorSystem &place_default(double d = 150.0);
  CantorSystem &set_transform(const AmbientTransform &t) {
    xf_ = t;
    cache_ = std::make_shared<Cache>();
    return *this;
  }
  const AmbientTransform &transform() const { return xf_; }

  GeneratorKind kind() const { return kind_; }
  int max_depth() const { return max_depth_; }
  CantorCell cell(const BinaryIndex &index) const;
  std::vector<CantorCell> cells_at(int k) const;
  // descendants of `index` at absolute depth d (d >= |index|)
  std::vector<CantorCell> descendants(const BinaryIndex &index, int d) const;
  double max_cell_diameter(int k) const;

  // center of the cell extending `code` by zeros to `resolve_depth`, with the cell diameter as error radius
  std::pair<Vec3, double> point_of(const BinaryIndex &code, int resolve_depth) const;

  // lower bound for dist(x, C) from the cells at depth d
  std::vector<double> dist_lower(const std::vector<Vec3> &xs, int d) const;
  // upper bound for dist(x, C_index) from its descendants at depth d
  std::vector<double> dist_upper(const std::vector<Vec3> &xs, const BinaryIndex &index, int d) const;

  // nearest point of the depth-d exclusion geometry (segment point, ball center, torus core point)
  Vec3 nearest_point(const Vec3 &x, int d) const;

  // structured anchor candidate for the cell; verified by the tree module
  Vec3 preferred_anchor(const BinaryIndex &index) const;

  const TorusChain *chain() const { return chain_.get(); }
  const std::vector<IfsMap> &maps() const { return maps_; }
  // ambient image of torus data
  Torus torus_ambient(int id) const;

private:
  struct AntoineState {
    int torus;
    int lo, hi;  // arc inside the torus' child chain; lo == hi == -1 when the state is the torus itself
  };
  AntoineState resolve(const BinaryIndex &index) const;
  CantorCell make_torus_union_cell(const BinaryIndex &index, const std::vector<int> &ids) const;
  std::vector<int> state_tori(const AntoineState &s) const;

  GeneratorKind kind_ = GeneratorKind::Ternary;
  int max_depth_ = 30;
  AmbientTransform xf_{};
  std::vector<IfsMap> maps_;
  Vec3 ifs_center_{};
  double ifs_radius_ = 1;
  std::shared_ptr<const TorusChain> chain_;

  // per-depth exclusion geometry, cleared when the transform changes
  struct Exclusion {
    std::vector<std::pair<double, SegmentsSoA>> segment_groups;  // (inflation radius, segments)
    PointsSoA ball_centers;
    double ball_radius = 0;
  };
  std::shared_ptr<const Exclusion> exclusion(int d) const;
  struct Cache {
    std::mutex mu;
    std::map<int, std::shared_ptr<const Exclusion>> by_depth;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// Builds the necklace; throws InfeasibleGeometry naming the first offending pair.
TorusChain build_antoine_chain(const AntoineParams &p);

// Gauss linking number of two closed polylines. Throws DomainError carrying the raw value when it refuses to round.
int linking_number(const std::vector<Vec3> &c1, const std::vector<Vec3> &c2);
double linking_raw(const std::vector<Vec3> &c1, const std::vector<Vec3> &c2);

// certified lower bound of the distance between two closed polylines
double polyline_distance_lower(const std::vector<Vec3> &c1, const std::vector<Vec3> &c2);

struct ChainCertificate {
  int consecutive_pairs = 0, consecutive_ok = 0;
  int other_pairs = 0, other_ok = 0;
  int contained = 0, children = 0;
  bool ok() const { return consecutive_ok == consecutive_pairs && other_ok == other_pairs && contained == children; }
};
ChainCertificate certify_chain(const TorusChain &c);

} // namespace cantorsurf
