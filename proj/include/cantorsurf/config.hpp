#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "cantorsurf/cantor.hpp"
#include "cantorsurf/surface.hpp"
#include "cantorsurf/tree.hpp"

namespace cantorsurf {

inline constexpr int kConfigSchema = 1;

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Ternary;
  int antoine_m = 4;
  int antoine_depth = 2;
  double placement = 150.0;  // distance of the root cell center above the origin
};

// delta_k used by the exceptional-set report: the built radii, or a fixed schedule
struct DeltaSchedule {
  enum class Kind { Built, DoubleExponential, Geometric };
  Kind kind = Kind::Built;
  double ratio = 0.125;
  std::string name() const;
};

struct RunConfig {
  int schema = kConfigSchema;
  GeneratorSpec generator;
  int depth = 2;
  BuildMode mode = BuildMode::Mesh;
  BudgetSchedule schedule = SurfaceConfig{}.schedule;
  DeltaSchedule delta;
  int angular = 24;
  int base_angular = 64;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::optional<double> ledger_target;  // optional cap on the ledger total

  // throws ConfigError unless K >= 1, the schedule is summable and the resolutions are sane
  void validate() const;
  SurfaceConfig surface() const;
  TreeConfig tree() const;
  CantorSystem system() const;
};

// "paper", "paper(n)", "geometric(a, r)"
BudgetSchedule parse_schedule(const std::string &s);
// "built", "double_exponential", "geometric(r)"
DeltaSchedule parse_delta_schedule(const std::string &s);

RunConfig load_config(const std::string &path);
RunConfig parse_config(const std::string &yaml_text);
std::string dump_config(const RunConfig &c);
nlohmann::ordered_json to_json(const RunConfig &c);

} // namespace cantorsurf
