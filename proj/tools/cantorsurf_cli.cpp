// cantorsurf: build, verify, export and report finite-depth Cantor-swallowing surfaces.
// Exit codes: 0 success, 1 a check failed, 2 bad usage or config, 3 construction or I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cantorsurf/config.hpp"
#include "cantorsurf/error.hpp"
#include "cantorsurf/io.hpp"
#include "cantorsurf/verify.hpp"

namespace fs = std::filesystem;
using namespace cantorsurf;

namespace {

constexpr int kOk = 0, kCheckFailed = 1, kUsage = 2, kFailure = 3;

struct Options {
  std::string config, out, schedule, format = "obj";
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Options &o, bool from_out) {
  RunConfig c;
  if (!o.config.empty()) c = load_config(o.config);
  else if (from_out && !o.out.empty() && fs::exists(fs::path(o.out) / "config.yaml"))
    c = load_config((fs::path(o.out) / "config.yaml").string());
  if (!o.out.empty()) c.out = o.out;
  if (o.depth) c.depth = *o.depth;
  if (!o.schedule.empty()) c.schedule = parse_schedule(o.schedule);
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

struct Built {
  CantorSystem sys;
  CantorTree tree;
  SurfaceApprox a;
};

Built construct(const RunConfig &c) {
  Built b{c.system(), {}, {}};
  if (c.mode == BuildMode::Mesh) {
    // one level deeper than the surface, so the tail T_K is non-empty
    b.tree = build_tree(b.sys, c.depth + 1, c.tree());
    b.a = build_surface(b.sys, b.tree, c.depth, c.surface());
  } else {
    b.a = build_analytic(b.sys, nullptr, c.depth, c.surface());
  }
  return b;
}

ExceptionalSet exceptional(const RunConfig &c, const SurfaceApprox &a) {
  switch (c.delta.kind) {
  case DeltaSchedule::Kind::Built: return exceptional_set(a);
  case DeltaSchedule::Kind::DoubleExponential: return box_count(double_exponential_schedule(c.depth));
  case DeltaSchedule::Kind::Geometric: return box_count(geometric_delta_schedule(c.depth, c.delta.ratio));
  }
  throw InternalError("unknown delta schedule");
}

std::string in_out(const RunConfig &c, const std::string &name) { return (fs::path(c.out) / name).string(); }

ojson artifact(const RunConfig &c, const std::string &name) {
  return {{"file", name}, {"digest", file_digest(in_out(c, name))}};
}

int cmd_build(const Options &o) {
  RunConfig c = resolve(o, false);
  const MeshFormat fmt = parse_mesh_format(o.format);
  Built b = construct(c);
  fs::create_directories(c.out);

  {
    std::ofstream cf(in_out(c, "config.yaml"));
    cf << dump_config(c);
  }
  ojson m;
  m["schema"] = kConfigSchema;
  m["tool"] = "cantorsurf";
  m["config"] = to_json(c);
  m["seeds"] = {{"tree", c.seed}};
  auto stages = ojson::array();
  if (c.mode == BuildMode::Mesh) {
    for (int k = 0; k <= c.depth; ++k) {
      const std::string name = "stage_" + std::to_string(k) + "." + extension(fmt);
      Mesh s = b.a.stage(k);
      write_mesh(s, in_out(c, name), fmt);
      ojson e = artifact(c, name);
      e["stage"] = k;
      e["format"] = extension(fmt);
      e["vertices"] = s.vertices.size();
      e["faces"] = s.faces.size();
      stages.push_back(std::move(e));
    }
    write_json(tree_json(b.tree), in_out(c, "tree.json"));
    write_tree_obj(b.tree, in_out(c, "tree.obj"));
  }
  m["stages"] = std::move(stages);
  write_json(ledger_json(b.a.ledger), in_out(c, "ledger.json"));
  write_json(sites_json(b.a), in_out(c, "sites.json"));
  write_json(cells_json(b.sys, std::min(c.depth, b.sys.max_depth())), in_out(c, "cells.json"));
  write_json(exceptional_json(exceptional(c, b.a)), in_out(c, "exceptional.json"));

  auto budgets = ojson::array();
  for (int k = 1; k <= c.depth; ++k) budgets.push_back({{"level", k}, {"log_budget", c.schedule.log_budget(k)}});
  ojson ledger = artifact(c, "ledger.json");
  ledger["schedule"] = c.schedule.name();
  ledger["log_total"] = b.a.ledger.log_total;
  ledger["log_series_bound"] = b.a.ledger.log_series_bound;
  ledger["budgets"] = std::move(budgets);
  m["ledger"] = std::move(ledger);
  ojson arts;
  arts["config"] = artifact(c, "config.yaml");
  arts["sites"] = artifact(c, "sites.json");
  arts["cells"] = artifact(c, "cells.json");
  arts["exceptional"] = artifact(c, "exceptional.json");
  if (c.mode == BuildMode::Mesh) {
    arts["tree"] = artifact(c, "tree.json");
    arts["tree_obj"] = artifact(c, "tree.obj");
  }
  m["artifacts"] = std::move(arts);
  m["verification"] = nullptr;
  write_json(m, in_out(c, "manifest.json"));

  std::cout << "built " << (c.mode == BuildMode::Mesh ? "mesh" : "analytic") << " approximation K=" << c.depth
            << " in " << c.out << "\n";
  std::cout << "ledger total " << b.a.ledger.total() << " (schedule " << c.schedule.name() << ")\n";
  return kOk;
}

bool same_mesh(const Mesh &a, const Mesh &b) {
  if (a.vertices.size() != b.vertices.size() || a.faces != b.faces) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i)
    if (!(a.vertices[i] == b.vertices[i])) return false;
  return true;
}

// every artifact listed in the manifest exists and matches its digest; meshes match the rebuilt stages
bool check_artifacts(const RunConfig &c, const Built &b, ojson &out) {
  const std::string mpath = in_out(c, "manifest.json");
  if (!fs::exists(mpath)) {
    out["manifest"] = "absent";
    return true;
  }
  auto m = read_json(mpath);
  bool ok = true;
  auto rows = ojson::array();
  auto check = [&](const ojson &e) {
    const std::string name = e.at("file");
    bool exists = fs::exists(in_out(c, name));
    bool digest = exists && file_digest(in_out(c, name)) == e.at("digest").get<std::string>();
    ok = ok && exists && digest;
    rows.push_back({{"file", name}, {"exists", exists}, {"digest_match", digest}});
  };
  for (const auto &s : m.at("stages")) {
    check(s);
    const int k = s.at("stage");
    bool same = c.mode == BuildMode::Mesh && k <= b.a.K && fs::exists(in_out(c, s.at("file"))) &&
                same_mesh(read_mesh(in_out(c, s.at("file"))), b.a.stage(k));
    rows.back()["matches_rebuild"] = same;
    ok = ok && same;
  }
  check(m.at("ledger"));
  for (const auto &[key, e] : m.at("artifacts").items()) check(e);
  out["manifest"] = "present";
  out["files"] = std::move(rows);
  out["pass"] = ok;
  return ok;
}

int cmd_verify(const Options &o) {
  RunConfig c = resolve(o, true);
  Built b = construct(c);
  std::optional<double> target;
  if (c.ledger_target) target = std::log(*c.ledger_target);
  SuiteReport s = run_suite(b.a, b.sys, b.tree, target);
  ExceptionalSet ex = exceptional(c, b.a);

  ojson j = suite_json(s);
  j["exceptional_set"] = exceptional_json(ex);
  ojson arts;
  bool artifacts_ok = check_artifacts(c, b, arts);
  j["artifacts"] = std::move(arts);
  const bool pass = s.pass() && artifacts_ok;
  j["pass"] = pass;

  std::string text = suite_text(s);
  text += std::string("artifacts: ") + (artifacts_ok ? "PASS" : "FAIL") + "\n";
  text += std::string("verify: ") + (pass ? "PASS" : "FAIL") + "\n";
  fs::create_directories(c.out);
  write_json(j, in_out(c, "verify.json"));
  {
    std::ofstream t(in_out(c, "verify.txt"));
    t << text;
  }
  const std::string mpath = in_out(c, "manifest.json");
  if (fs::exists(mpath)) {
    ojson m = read_json(mpath);
    ojson v = artifact(c, "verify.json");
    v["pass"] = pass;
    m["verification"] = std::move(v);
    write_json(m, mpath);
  }
  std::cout << text;
  return pass ? kOk : kCheckFailed;
}

int cmd_export(const Options &o) {
  if (o.out.empty()) throw ConfigError("export needs --out <dir> of a previous build");
  const MeshFormat fmt = parse_mesh_format(o.format);
  const fs::path dir(o.out);
  if (!fs::exists(dir / "manifest.json")) throw ConfigError("no manifest.json in '" + o.out + "' (run build first)");
  auto m = read_json((dir / "manifest.json").string());
  const fs::path exp = dir / "export";
  fs::create_directories(exp);
  bool ok = true;
  for (const auto &s : m.at("stages")) {
    const std::string src = (dir / s.at("file").get<std::string>()).string();
    Mesh mesh = read_mesh(src);
    const std::string dst = (exp / ("stage_" + std::to_string(s.at("stage").get<int>()) + "." + extension(fmt))).string();
    write_mesh(mesh, dst, fmt);
    bool same = same_mesh(read_mesh(dst), mesh);
    ok = ok && same;
    std::cout << src << " -> " << dst << ": " << mesh.faces.size() << " faces, round trip " << (same ? "ok" : "MISMATCH") << "\n";
  }
  if (m.at("stages").empty()) std::cout << "no stage meshes in this build (analytic mode)\n";
  return ok ? kOk : kCheckFailed;
}

int cmd_report(const Options &o) {
  if (o.out.empty()) throw ConfigError("report needs --out <dir> of a previous build");
  const fs::path dir(o.out);
  if (!fs::exists(dir / "ledger.json")) throw ConfigError("no ledger.json in '" + o.out + "' (run build first)");
  auto l = read_json((dir / "ledger.json").string());
  std::cout << "energy ledger, schedule " << l.at("schedule").get<std::string>() << "\n";
  std::cout << "  level  count     log_sum     log_cap  pass\n";
  for (const auto &v : l.at("levels")) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %5d  %5d  %10.4f  %10.4f  %s\n", v.at("level").get<int>(), v.at("count").get<int>(),
                  v.at("log_sum").get<double>(), v.at("log_cap").get<double>(), v.at("pass").get<bool>() ? "yes" : "NO");
    std::cout << buf;
  }
  const auto &lt = l.at("log_total");
  std::cout << "  total " << (lt.is_null() ? 0.0 : std::exp(lt.get<double>())) << "\n";
  if (fs::exists(dir / "exceptional.json")) {
    auto e = read_json((dir / "exceptional.json").string());
    std::cout << "exceptional set box counts\n  level  estimate\n";
    for (const auto &r : e.at("rows")) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  %5d  %8.4f\n", r.at("level").get<int>(), r.at("estimate").get<double>());
      std::cout << buf;
    }
  }
  if (fs::exists(dir / "verify.txt")) {
    std::ifstream t(dir / "verify.txt");
    std::cout << "lemma tables (last verify)\n" << t.rdbuf();
    auto v = read_json((dir / "verify.json").string());
    return v.at("pass").get<bool>() ? kOk : kCheckFailed;
  }
  std::cout << "no verification yet (run verify)\n";
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Finite-depth approximations of a Sobolev sphere swallowing a Cantor set, with certificates"};
  app.require_subcommand(1, 1);
  Options o;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", o.config, "YAML config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--depth", o.depth, "approximation depth K")->check(CLI::PositiveNumber);
    sub->add_option("--schedule", o.schedule, "budget schedule: paper, paper(n), geometric(a, r)");
    sub->add_option("--seed", o.seed, "tree routing seed");
    sub->add_option("--format", o.format, "mesh format")->check(CLI::IsMember({"obj", "ply", "json"}));
  };
  auto *build = app.add_subcommand("build", "construct stages and write meshes, ledger and manifest");
  auto *verify = app.add_subcommand("verify", "run the certification suite");
  auto *exp = app.add_subcommand("export", "re-emit the stage meshes of a build in another format");
  auto *report = app.add_subcommand("report", "print the ledger and lemma tables of a build");
  for (auto *s : {build, verify, exp, report}) add_common(s);
  app.footer("environment: CANTORSURF_THREADS overrides the worker thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    if (build->parsed()) return cmd_build(o);
    if (verify->parsed()) return cmd_verify(o);
    if (exp->parsed()) return cmd_export(o);
    return cmd_report(o);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
