#pragma once

#include <cmath>
#include <map>
#include <optional>

#include "sospl/monomial.hpp"

namespace sospl {

// Partial assignment of declared variables; absent means unknown.
class PartialAssignment {
public:
  PartialAssignment() = default;

  static PartialAssignment of(const VariableSet& vars,
                              std::initializer_list<std::pair<VariableId, double>> vals) {
    PartialAssignment rho;
    for (const auto& [v, x] : vals) rho.assign(vars, v, x);
    return rho;
  }

  bool has(VariableId v) const { return values_.count(v) != 0; }
  std::optional<double> get(VariableId v) const {
    auto it = values_.find(v);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t assigned_count() const { return values_.size(); }
  const std::map<VariableId, double>& values() const { return values_; }

  // Range-checks the value and keeps negation twins consistent.
  void assign(const VariableSet& vars, VariableId v, double value) {
    const VariableInfo& info = vars.info(v);
    if (vars.is_boolean_like(v)) {
      if (value != 0.0 && value != 1.0)
        throw domain_error("Boolean '" + vars.display_name(v) +
                           "' assigned non-0/1 value " + format_double(value));
      VariableId tw = vars.partner(v);
      auto it = values_.find(tw);
      if (it != values_.end() && it->second + value != 1.0)
        throw domain_error("literal pair for '" + info.name + "' does not sum to 1");
    } else {
      if (!(value >= info.lo && value <= info.hi))
        throw domain_error("value " + format_double(value) + " outside [" +
                           format_double(info.lo) + ", " + format_double(info.hi) +
                           "] for '" + info.name + "'");
    }
    values_[v] = value;
  }

  friend bool operator==(const PartialAssignment& a, const PartialAssignment& b) {
    return a.values_ == b.values_;
  }
  friend bool operator<(const PartialAssignment& a, const PartialAssignment& b) {
    return a.values_ < b.values_;
  }

private:
  std::map<VariableId, double> values_;
};

// Sparse polynomial with canonical (graded) term order.
class Polynomial {
public:
  Polynomial() = default;
  /* implicit */ Polynomial(double c) {
    if (c != 0.0) terms_[Monomial{}] = c;
  }

  static Polynomial variable(VariableId v) {
    Polynomial p;
    p.terms_[Monomial::variable(v)] = 1.0;
    return p;
  }
  static Polynomial term(const Monomial& m, double c) {
    Polynomial p;
    if (c != 0.0) p.terms_[m] = c;
    return p;
  }

  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Monomial, double>& terms() const { return terms_; }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  double coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double constant_term() const { return coefficient(Monomial{}); }

  void add_term(const Monomial& m, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = terms_.try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.terms_ == b.terms_;
  }

  // Full evaluation; every variable that occurs must be assigned.
  double evaluate(const PartialAssignment& z) const {
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (const auto& [v, e] : m.entries()) {
        auto val = z.get(v);
        if (!val) throw domain_error("evaluate: unassigned variable");
        t *= std::pow(*val, static_cast<double>(e));
      }
      acc += t;
    }
    return acc;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

private:
  std::map<Monomial, double> terms_;
};

// p with assigned variables substituted and terms collected.
inline Polynomial partial_eval(const Polynomial& p, const PartialAssignment& rho) {
  Polynomial out;
  for (const auto& [m, c] : p.terms()) {
    double coeff = c;
    std::vector<Monomial::Entry> residual;
    for (const auto& [v, e] : m.entries()) {
      if (auto val = rho.get(v))
        coeff *= std::pow(*val, static_cast<double>(e));
      else
        residual.push_back({v, e});
    }
    out.add_term(Monomial::from_entries(std::move(residual)), coeff);
  }
  return out;
}

inline Polynomial reduce(const Polynomial& p, const VariableSet& vars) {
  Polynomial out;
  for (const auto& [m, c] : p.terms()) out.add_term(reduce(m, vars), c);
  return out;
}

}  // namespace sospl
