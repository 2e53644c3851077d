#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "sospl/common.hpp"

namespace sospl {

enum class VarKind : std::uint8_t { Boolean, BooleanNegation, BoundedReal };

struct VariableId {
  std::uint32_t index = 0;

  friend bool operator==(VariableId a, VariableId b) { return a.index == b.index; }
  friend bool operator!=(VariableId a, VariableId b) { return a.index != b.index; }
  friend bool operator<(VariableId a, VariableId b) { return a.index < b.index; }
};

struct VariableInfo {
  std::string name;
  VarKind kind = VarKind::Boolean;
  std::uint32_t partner = UINT32_MAX;  // twin literal for Boolean/BooleanNegation
  double lo = 0.0;
  double hi = 1.0;
};

// Registry of declared variables. A Boolean declaration always creates the
// literal and its negation as adjacent entries.
class VariableSet {
public:
  std::size_t size() const { return vars_.size(); }
  const VariableInfo& info(VariableId v) const { return vars_.at(v.index); }

  bool is_boolean_like(VariableId v) const {
    VarKind k = info(v).kind;
    return k == VarKind::Boolean || k == VarKind::BooleanNegation;
  }

  Interval range(VariableId v) const {
    const VariableInfo& i = info(v);
    return {i.lo, i.hi};
  }

  VariableId partner(VariableId v) const {
    const VariableInfo& i = info(v);
    if (i.partner == UINT32_MAX)
      throw domain_error("variable '" + i.name + "' has no negation twin");
    return {i.partner};
  }

  // Display name; negations print with a '~' prefix.
  std::string display_name(VariableId v) const {
    const VariableInfo& i = info(v);
    if (i.kind == VarKind::BooleanNegation) return "~" + vars_[i.partner].name;
    return i.name;
  }

  bool has(const std::string& name) const { return by_name_.count(name) != 0; }

  VariableId find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw domain_error("undeclared variable '" + name + "'");
    return {it->second};
  }

  // Resolves a literal as written in text: "name" or "~name".
  VariableId find_literal(const std::string& text) const {
    if (!text.empty() && text[0] == '~') return partner(find(text.substr(1)));
    return find(text);
  }

  std::pair<VariableId, VariableId> add_boolean(const std::string& name) {
    check_fresh(name);
    std::uint32_t pos = static_cast<std::uint32_t>(vars_.size());
    vars_.push_back({name, VarKind::Boolean, pos + 1, 0.0, 1.0});
    vars_.push_back({name, VarKind::BooleanNegation, pos, 0.0, 1.0});
    by_name_.emplace(name, pos);
    return {{pos}, {pos + 1}};
  }

  VariableId add_bounded(const std::string& name, double lo, double hi) {
    check_fresh(name);
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw domain_error("range of '" + name + "' must be finite");
    if (lo > hi)
      throw domain_error("range of '" + name + "' has L > B");
    std::uint32_t pos = static_cast<std::uint32_t>(vars_.size());
    vars_.push_back({name, VarKind::BoundedReal, UINT32_MAX, lo, hi});
    by_name_.emplace(name, pos);
    return {pos};
  }

  std::vector<VariableId> all_ids() const {
    std::vector<VariableId> out;
    out.reserve(vars_.size());
    for (std::uint32_t i = 0; i < vars_.size(); ++i) out.push_back({i});
    return out;
  }

private:
  void check_fresh(const std::string& name) const {
    if (name.empty()) throw domain_error("empty variable name");
    if (by_name_.count(name))
      throw domain_error("duplicate variable name '" + name + "'");
  }

  std::vector<VariableInfo> vars_;
  std::unordered_map<std::string, std::uint32_t> by_name_;
};

}  // namespace sospl
