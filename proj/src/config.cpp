#include "cantorsurf/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

namespace {

const std::string kNum = R"(\s*([-+0-9.eE]+)\s*)";

double to_double(const std::string &s, const std::string &what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError(what + ": not a number: '" + s + "'");
  return v;
}

void reject_unknown(const YAML::Node &n, const std::set<std::string> &known, const std::string &where) {
  if (!n.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto &kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) {
      std::string list;
      for (const auto &k : known) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError("unknown key '" + key + "' in " + where + " (expected one of: " + list + ")");
    }
  }
}

template <class T> T get(const YAML::Node &n, const std::string &key, const std::string &where) {
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception &) {
    throw ConfigError(where + "." + key + ": bad value '" + YAML::Dump(n[key]) + "'");
  }
}

std::string kind_name(GeneratorKind k) {
  switch (k) {
  case GeneratorKind::Ternary: return "ternary";
  case GeneratorKind::Ifs: return "ifs";
  case GeneratorKind::Antoine: return "antoine";
  }
  return "?";
}

} // namespace

std::string DeltaSchedule::name() const {
  switch (kind) {
  case Kind::Built: return "built";
  case Kind::DoubleExponential: return "double_exponential";
  case Kind::Geometric: {
    std::ostringstream s;
    s.precision(17);
    s << "geometric(" << ratio << ")";
    return s.str();
  }
  }
  return "?";
}

BudgetSchedule parse_schedule(const std::string &s) {
  std::smatch m;
  if (s == "paper") return BudgetSchedule::paper(2);
  if (std::regex_match(s, m, std::regex(R"(paper\(\s*([0-9]+)\s*\))"))) return BudgetSchedule::paper(std::stoi(m[1]));
  if (std::regex_match(s, m, std::regex("geometric\\(" + kNum + "," + kNum + "\\)")))
    return BudgetSchedule::geometric(to_double(m[1], "schedule"), to_double(m[2], "schedule"));
  throw ConfigError("unknown schedule '" + s + "' (expected paper, paper(n) or geometric(a, r))");
}

DeltaSchedule parse_delta_schedule(const std::string &s) {
  std::smatch m;
  if (s == "built") return {};
  if (s == "double_exponential") return {DeltaSchedule::Kind::DoubleExponential};
  if (std::regex_match(s, m, std::regex("geometric\\(" + kNum + "\\)"))) {
    DeltaSchedule d{DeltaSchedule::Kind::Geometric, to_double(m[1], "delta_schedule")};
    if (!(d.ratio > 0 && d.ratio < 1)) throw ConfigError("delta_schedule ratio must lie in (0, 1)");
    return d;
  }
  throw ConfigError("unknown delta_schedule '" + s + "' (expected built, double_exponential or geometric(r))");
}

void RunConfig::validate() const {
  if (schema != kConfigSchema)
    throw ConfigError("schema " + std::to_string(schema) + " is not supported (this build reads schema " +
                      std::to_string(kConfigSchema) + ")");
  if (depth < 1) throw ConfigError("depth must be >= 1, got " + std::to_string(depth));
  if (!schedule.summable())
    throw ConfigError("schedule " + schedule.name() + " is not summable: sum 2^k budget(k) diverges (need a > 0, 0 < r < 1/2)");
  if (angular < 8 || base_angular < 16) throw ConfigError("mesh resolution too small (angular >= 8, base_angular >= 16)");
  if (generator.kind == GeneratorKind::Antoine && (generator.antoine_m < 4 || generator.antoine_m % 2))
    throw ConfigError("antoine m must be even and >= 4");
  if (generator.kind == GeneratorKind::Antoine && generator.antoine_depth < 1)
    throw ConfigError("antoine depth must be >= 1");
  if (!(generator.placement > 0)) throw ConfigError("generator placement must be positive");
  if (ledger_target && !(*ledger_target > 0)) throw ConfigError("ledger_target must be positive");
  if (out.empty()) throw ConfigError("out must not be empty");
}

SurfaceConfig RunConfig::surface() const {
  SurfaceConfig c;
  c.mode = mode;
  c.schedule = schedule;
  c.angular = angular;
  c.base_angular = base_angular;
  return c;
}

TreeConfig RunConfig::tree() const {
  TreeConfig t;
  t.seed = seed;
  return t;
}

CantorSystem RunConfig::system() const {
  switch (generator.kind) {
  case GeneratorKind::Ternary: return CantorSystem::ternary().place_default(generator.placement);
  case GeneratorKind::Ifs: return CantorSystem::default_ifs().place_default(generator.placement);
  case GeneratorKind::Antoine: {
    AntoineParams p;
    p.m = generator.antoine_m;
    p.depth = generator.antoine_depth;
    return CantorSystem::antoine(p).place_default(generator.placement);
  }
  }
  throw InternalError("unknown generator kind");
}

RunConfig parse_config(const std::string &text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception &e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("config is empty");
  reject_unknown(root,
                 {"schema", "generator", "depth", "mode", "schedule", "delta_schedule", "mesh", "seed", "out",
                  "ledger_target"},
                 "config");
  if (!root["schema"]) throw ConfigError("config lacks the 'schema' field (use schema: " + std::to_string(kConfigSchema) + ")");
  RunConfig c;
  c.schema = get<int>(root, "schema", "config");
  if (auto node = root["generator"]) {
    YAML::Node g = node.IsScalar() ? YAML::Node(YAML::NodeType::Map) : node;
    if (node.IsScalar()) g["kind"] = node.as<std::string>();
    reject_unknown(g, {"kind", "m", "depth", "placement"}, "generator");
    const auto kind = g["kind"] ? get<std::string>(g, "kind", "generator") : "ternary";
    if (kind == "ternary") c.generator.kind = GeneratorKind::Ternary;
    else if (kind == "ifs") c.generator.kind = GeneratorKind::Ifs;
    else if (kind == "antoine") c.generator.kind = GeneratorKind::Antoine;
    else throw ConfigError("unknown generator kind '" + kind + "' (expected ternary, ifs or antoine)");
    if (g["m"]) c.generator.antoine_m = get<int>(g, "m", "generator");
    if (g["depth"]) c.generator.antoine_depth = get<int>(g, "depth", "generator");
    if (g["placement"]) c.generator.placement = get<double>(g, "placement", "generator");
    if (c.generator.kind != GeneratorKind::Antoine && (g["m"] || g["depth"]))
      throw ConfigError("generator.m and generator.depth apply to antoine only");
  }
  if (root["depth"]) c.depth = get<int>(root, "depth", "config");
  if (root["mode"]) {
    const auto m = get<std::string>(root, "mode", "config");
    if (m == "mesh") c.mode = BuildMode::Mesh;
    else if (m == "analytic") c.mode = BuildMode::Analytic;
    else throw ConfigError("unknown mode '" + m + "' (expected mesh or analytic)");
  }
  if (root["schedule"]) c.schedule = parse_schedule(get<std::string>(root, "schedule", "config"));
  if (root["delta_schedule"]) c.delta = parse_delta_schedule(get<std::string>(root, "delta_schedule", "config"));
  if (auto m = root["mesh"]) {
    reject_unknown(m, {"angular", "base_angular"}, "mesh");
    if (m["angular"]) c.angular = get<int>(m, "angular", "mesh");
    if (m["base_angular"]) c.base_angular = get<int>(m, "base_angular", "mesh");
  }
  if (root["seed"]) c.seed = get<std::uint64_t>(root, "seed", "config");
  if (root["out"]) c.out = get<std::string>(root, "out", "config");
  if (root["ledger_target"]) c.ledger_target = get<double>(root, "ledger_target", "config");
  c.validate();
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig &c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "schema" << YAML::Value << c.schema;
  e << YAML::Key << "generator" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << kind_name(c.generator.kind);
  if (c.generator.kind == GeneratorKind::Antoine) {
    e << YAML::Key << "m" << YAML::Value << c.generator.antoine_m;
    e << YAML::Key << "depth" << YAML::Value << c.generator.antoine_depth;
  }
  e << YAML::Key << "placement" << YAML::Value << c.generator.placement;
  e << YAML::EndMap;
  e << YAML::Key << "depth" << YAML::Value << c.depth;
  e << YAML::Key << "mode" << YAML::Value << (c.mode == BuildMode::Mesh ? "mesh" : "analytic");
  e << YAML::Key << "schedule" << YAML::Value << c.schedule.name();
  e << YAML::Key << "delta_schedule" << YAML::Value << c.delta.name();
  e << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "angular" << YAML::Value << c.angular;
  e << YAML::Key << "base_angular" << YAML::Value << c.base_angular;
  e << YAML::EndMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "out" << YAML::Value << c.out;
  if (c.ledger_target) e << YAML::Key << "ledger_target" << YAML::Value << *c.ledger_target;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

nlohmann::ordered_json to_json(const RunConfig &c) {
  nlohmann::ordered_json j;
  j["schema"] = c.schema;
  j["generator"]["kind"] = kind_name(c.generator.kind);
  if (c.generator.kind == GeneratorKind::Antoine) {
    j["generator"]["m"] = c.generator.antoine_m;
    j["generator"]["depth"] = c.generator.antoine_depth;
  }
  j["generator"]["placement"] = c.generator.placement;
  j["depth"] = c.depth;
  j["mode"] = c.mode == BuildMode::Mesh ? "mesh" : "analytic";
  j["schedule"] = c.schedule.name();
  j["delta_schedule"] = c.delta.name();
  j["mesh"]["angular"] = c.angular;
  j["mesh"]["base_angular"] = c.base_angular;
  j["seed"] = c.seed;
  j["out"] = c.out;
  if (c.ledger_target) j["ledger_target"] = *c.ledger_target;
  return j;
}

} // namespace cantorsurf
