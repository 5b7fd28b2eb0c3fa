#pragma once

#include <string>
#include <vector>

namespace cantorsurf {

struct LemmaEntry {
  std::string index;
  double measured = 0;
  double bound = 0;
  double margin() const { return bound - measured; }
  bool pass = false;
};

// measured < bound for every entry <=> pass
struct LemmaReport {
  std::string lemma;  // l1 | c1 | l2 | continuity | tail-disjoint
  int level = 0;
  std::vector<LemmaEntry> entries;
  std::string note;
  int samples_per_item = 0;
  bool pass() const {
    for (const auto &e : entries)
      if (!e.pass) return false;
    return !entries.empty();
  }
  double worst_margin() const {
    double m = 1e300;
    for (const auto &e : entries) m = e.margin() < m ? e.margin() : m;
    return m;
  }
  void add(const std::string &idx, double measured, double bound) {
    entries.push_back({idx, measured, bound, measured < bound});
  }
};

} // namespace cantorsurf
