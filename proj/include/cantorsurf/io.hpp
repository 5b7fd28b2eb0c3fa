#pragma once

#include <string>

#include <json.hpp>

#include "cantorsurf/cantor.hpp"
#include "cantorsurf/mesh.hpp"
#include "cantorsurf/surface.hpp"
#include "cantorsurf/tree.hpp"
#include "cantorsurf/verify.hpp"

namespace cantorsurf {

using ojson = nlohmann::ordered_json;

enum class MeshFormat { Obj, Ply, Json };
MeshFormat parse_mesh_format(const std::string &s);
std::string extension(MeshFormat f);

ojson mesh_json(const Mesh &m);
Mesh mesh_from_json(const ojson &j);
void write_mesh(const Mesh &m, const std::string &path, MeshFormat f);
// format from the extension
Mesh read_mesh(const std::string &path);

ojson cells_json(const CantorSystem &sys, int depth);
// anchors, sampled branch polylines and junction angles
ojson tree_json(const CantorTree &tree, int samples = 32);
// branch polylines as OBJ lines
void write_tree_obj(const CantorTree &tree, const std::string &path, int samples = 64);

ojson ledger_json(const EnergyLedger &l);
ojson sites_json(const SurfaceApprox &a);
ojson exceptional_json(const ExceptionalSet &e);

ojson report_json(const LemmaReport &r);
ojson stage_json(const StageCheck &s);
ojson ledger_report_json(const LedgerReport &r);
ojson suite_json(const SuiteReport &s);

std::string ledger_text(const LedgerReport &r);
std::string suite_text(const SuiteReport &s);

// pretty JSON with a trailing newline; non-finite doubles become null
void write_json(const ojson &j, const std::string &path);
ojson read_json(const std::string &path);

// FNV-1a 64 of the file bytes, hex
std::string file_digest(const std::string &path);

} // namespace cantorsurf
