#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sospl/variables.hpp"

namespace sospl {

// Sparse power product, entries sorted by VariableId with positive exponents.
class Monomial {
public:
  using Entry = std::pair<VariableId, std::uint32_t>;

  Monomial() = default;

  static Monomial variable(VariableId v, std::uint32_t exp = 1) {
    Monomial m;
    if (exp > 0) m.entries_.push_back({v, exp});
    return m;
  }

  static Monomial from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    Monomial m;
    for (const Entry& e : entries) {
      if (e.second == 0) continue;
      if (!m.entries_.empty() && m.entries_.back().first == e.first)
        m.entries_.back().second += e.second;
      else
        m.entries_.push_back(e);
    }
    return m;
  }

  bool is_one() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const Entry& e : entries_) d += e.second;
    return d;
  }

  std::uint32_t exponent(VariableId v) const {
    for (const Entry& e : entries_)
      if (e.first == v) return e.second;
    return 0;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.entries_.reserve(a.entries_.size() + b.entries_.size());
    std::size_t i = 0, j = 0;
    while (i < a.entries_.size() && j < b.entries_.size()) {
      if (a.entries_[i].first < b.entries_[j].first)
        out.entries_.push_back(a.entries_[i++]);
      else if (b.entries_[j].first < a.entries_[i].first)
        out.entries_.push_back(b.entries_[j++]);
      else {
        out.entries_.push_back({a.entries_[i].first,
                                a.entries_[i].second + b.entries_[j].second});
        ++i, ++j;
      }
    }
    while (i < a.entries_.size()) out.entries_.push_back(a.entries_[i++]);
    while (j < b.entries_.size()) out.entries_.push_back(b.entries_[j++]);
    return out;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.entries_ == b.entries_;
  }
  friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }

  // Graded order: by total degree, then x^2 before x*y before y^2.
  friend bool operator<(const Monomial& a, const Monomial& b) {
    std::uint32_t da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    for (std::size_t i = 0; i < a.entries_.size() && i < b.entries_.size(); ++i) {
      if (a.entries_[i].first != b.entries_[i].first)
        return a.entries_[i].first < b.entries_[i].first;
      if (a.entries_[i].second != b.entries_[i].second)
        return a.entries_[i].second > b.entries_[i].second;
    }
    return a.entries_.size() < b.entries_.size();
  }

  std::size_t hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (const Entry& e : entries_) {
      h ^= (static_cast<std::size_t>(e.first.index) << 20) ^ e.second;
      h *= 0x100000001b3ull;
    }
    return h;
  }

private:
  std::vector<Entry> entries_;
};

// Boolean exponent collapse: x^k -> x for Boolean literals.
inline Monomial reduce(const Monomial& m, const VariableSet& vars) {
  std::vector<Monomial::Entry> out;
  out.reserve(m.entries().size());
  for (const auto& e : m.entries()) {
    if (vars.is_boolean_like(e.first))
      out.push_back({e.first, 1});
    else
      out.push_back(e);
  }
  return Monomial::from_entries(std::move(out));
}

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

}  // namespace sospl
