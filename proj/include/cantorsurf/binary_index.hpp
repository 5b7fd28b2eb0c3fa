#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cantorsurf/error.hpp"

namespace cantorsurf {

// Finite word over {0,1}. The empty word is the root.
class BinaryIndex {
public:
  BinaryIndex() = default;
  explicit BinaryIndex(const std::string &bits) {
    for (char c : bits) {
      if (c != '0' && c != '1') throw ParameterError("binary index must contain only 0/1: " + bits);
      bits_.push_back(c == '1');
    }
  }
  static BinaryIndex from_bits(std::uint64_t v, int len) {
    BinaryIndex b;
    for (int i = len - 1; i >= 0; --i) b.bits_.push_back((v >> i) & 1u);
    return b;
  }

  int size() const { return int(bits_.size()); }
  bool empty() const { return bits_.empty(); }
  int operator[](int i) const { return bits_[i]; }

  BinaryIndex child(int bit) const {
    BinaryIndex c = *this;
    c.bits_.push_back(bit != 0);
    return c;
  }
  BinaryIndex parent() const {
    BinaryIndex p = *this;
    if (!p.bits_.empty()) p.bits_.pop_back();
    return p;
  }
  BinaryIndex prefix(int k) const {
    BinaryIndex p;
    p.bits_.assign(bits_.begin(), bits_.begin() + k);
    return p;
  }
  bool is_prefix_of(const BinaryIndex &o) const {
    if (size() > o.size()) return false;
    for (int i = 0; i < size(); ++i)
      if (bits_[i] != o.bits_[i]) return false;
    return true;
  }
  // position among the 2^k words of its length, lexicographic
  std::uint64_t ordinal() const {
    std::uint64_t v = 0;
    for (bool b : bits_) v = (v << 1) | (b ? 1u : 0u);
    return v;
  }
  std::string str() const {
    std::string s;
    for (bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const BinaryIndex &, const BinaryIndex &) = default;
  friend bool operator<(const BinaryIndex &a, const BinaryIndex &b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.bits_ < b.bits_;
  }

private:
  std::vector<bool> bits_;
};

// all words of length k in lexicographic order
inline std::vector<BinaryIndex> all_indices(int k) {
  std::vector<BinaryIndex> out;
  out.reserve(std::size_t(1) << k);
  for (std::uint64_t v = 0; v < (std::uint64_t(1) << k); ++v) out.push_back(BinaryIndex::from_bits(v, k));
  return out;
}

} // namespace cantorsurf
