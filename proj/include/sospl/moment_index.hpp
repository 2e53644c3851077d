#pragma once

#include <unordered_map>

#include "sospl/constraint_system.hpp"

namespace sospl {

// Ordered list of reduced monomials of degree <= d over the declared
// variables, graded order, position 0 the empty monomial. Boolean exponents
// collapse before indexing, so every product of two indexed monomials of
// degree <= d/2 is itself indexed.
class MomentIndex {
public:
  static constexpr std::size_t kDefaultCap = 200000;

  MomentIndex() = default;

  MomentIndex(const VariableSet& vars, std::uint32_t d, std::size_t cap = kDefaultCap)
      : MomentIndex(vars, vars.all_ids(), d, cap) {}

  // Index over a subset of the declared variables (per-example restrictions).
  MomentIndex(const VariableSet& vars, const std::vector<VariableId>& ids,
              std::uint32_t d, std::size_t cap = kDefaultCap)
      : degree_(d) {
    std::vector<Monomial> acc{Monomial{}};
    enumerate(vars, ids, 0, d, Monomial{}, acc, cap);
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    monomials_ = std::move(acc);
    positions_.reserve(monomials_.size() * 2);
    for (std::size_t i = 0; i < monomials_.size(); ++i) positions_[monomials_[i]] = i;
  }

  std::uint32_t degree() const { return degree_; }
  std::size_t size() const { return monomials_.size(); }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  const Monomial& at(std::size_t i) const { return monomials_[i]; }

  std::size_t position(const Monomial& reduced) const {
    auto it = positions_.find(reduced);
    if (it == positions_.end())
      throw domain_error("monomial not indexed at degree " + std::to_string(degree_));
    return it->second;
  }
  bool contains(const Monomial& reduced) const { return positions_.count(reduced) != 0; }

  // Monomials of degree <= k form a prefix of the graded order.
  std::size_t prefix_size(std::uint32_t k) const {
    std::size_t n = 0;
    while (n < monomials_.size() && monomials_[n].degree() <= k) ++n;
    return n;
  }

private:
  static void enumerate(const VariableSet& vars, const std::vector<VariableId>& ids,
                        std::size_t at, std::uint32_t remaining, Monomial current,
                        std::vector<Monomial>& out, std::size_t cap) {
    if (at == ids.size()) return;
    enumerate(vars, ids, at + 1, remaining, current, out, cap);
    std::uint32_t max_exp = vars.is_boolean_like(ids[at]) ? 1u : remaining;
    Monomial grown = current;
    for (std::uint32_t e = 1; e <= max_exp && e <= remaining; ++e) {
      grown = grown * Monomial::variable(ids[at]);
      if (out.size() >= cap)
        throw resource_error("moment index exceeds cap of " + std::to_string(cap) +
                             " monomials");
      out.push_back(grown);
      enumerate(vars, ids, at + 1, remaining - e, grown, out, cap);
    }
  }

  std::uint32_t degree_ = 0;
  std::vector<Monomial> monomials_;
  std::unordered_map<Monomial, std::size_t, MonomialHash> positions_;
};

inline MomentIndex build_index(const ConstraintSystem& sys, std::uint32_t d,
                               std::size_t cap = MomentIndex::kDefaultCap) {
  return MomentIndex(sys.variables, d, cap);
}

}  // namespace sospl
