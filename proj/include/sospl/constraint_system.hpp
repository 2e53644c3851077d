#pragma once

#include "sospl/poly_text.hpp"

namespace sospl {

enum class ConstraintTag : std::uint8_t {
  User,             // support constraint given explicitly
  Clause,           // CNF clause encoding
  BooleanAxiom,     // x^2 - x = 0
  Complementarity,  // x + ~x - 1 = 0
  RangeAxiom,       // max{B^2,L^2} - x^2 >= 0
  BoundingAxiom     // monomial interval bound
};

inline bool is_axiom(ConstraintTag t) {
  return t != ConstraintTag::User && t != ConstraintTag::Clause;
}

struct SupportConstraint {
  Polynomial poly;
  ConstraintTag tag = ConstraintTag::User;
};

enum class BoundDir : std::uint8_t { LessEq, GreaterEq };

struct MomentBound {
  Polynomial poly;
  BoundDir dir = BoundDir::LessEq;
  double gamma = 0.0;
};

struct Literal {
  VariableId var;  // the positive Boolean
  bool positive = true;
};

struct Clause {
  std::vector<Literal> literals;
};

enum class ClauseEncoding : std::uint8_t { Linear, MonomialEquality };

// Variable declarations plus support inequalities g >= 0, support equalities
// h = 0, and one-sided moment bounds on E[p].
class ConstraintSystem {
public:
  VariableSet variables;
  std::vector<SupportConstraint> inequalities;  // each means poly >= 0
  std::vector<SupportConstraint> equalities;    // each means poly = 0
  std::vector<MomentBound> moment_bounds;

  // Creates x and ~x and registers x^2 - x = 0, (~x)^2 - ~x = 0, x + ~x - 1 = 0.
  std::pair<VariableId, VariableId> declare_boolean(const std::string& name) {
    auto [x, nx] = variables.add_boolean(name);
    Polynomial px = Polynomial::variable(x);
    Polynomial pnx = Polynomial::variable(nx);
    Polynomial x2 = Polynomial::term(Monomial::variable(x, 2), 1.0);
    Polynomial nx2 = Polynomial::term(Monomial::variable(nx, 2), 1.0);
    equalities.push_back({x2 - px, ConstraintTag::BooleanAxiom});
    equalities.push_back({nx2 - pnx, ConstraintTag::BooleanAxiom});
    equalities.push_back({px + pnx - Polynomial(1.0), ConstraintTag::Complementarity});
    return {x, nx};
  }

  // Registers the range inequality max{B^2, L^2} - x^2 >= 0.
  VariableId declare_bounded(const std::string& name, double lo, double hi) {
    VariableId v = variables.add_bounded(name, lo, hi);
    double m2 = std::max(hi * hi, lo * lo);
    Polynomial sq = Polynomial::term(Monomial::variable(v, 2), 1.0);
    inequalities.push_back({Polynomial(m2) - sq, ConstraintTag::RangeAxiom});
    return v;
  }

  void add_support_inequality(Polynomial p) {
    inequalities.push_back({std::move(p), ConstraintTag::User});
  }
  void add_support_equality(Polynomial p) {
    equalities.push_back({std::move(p), ConstraintTag::User});
  }
  void add_moment_bound(Polynomial p, BoundDir dir, double gamma) {
    moment_bounds.push_back({std::move(p), dir, gamma});
  }

  // Linear encoding: sum of literals - 1 >= 0; the empty clause gives -1 >= 0.
  // The monomial encoding registers the equality prod of negated literals = 0.
  void add_clause(const Clause& c, ClauseEncoding enc = ClauseEncoding::Linear) {
    for (const Literal& l : c.literals) {
      if (variables.info(l.var).kind != VarKind::Boolean)
        throw domain_error("clause literal must be a declared Boolean");
    }
    for (std::size_t i = 0; i < c.literals.size(); ++i)
      for (std::size_t j = i + 1; j < c.literals.size(); ++j)
        if (c.literals[i].var == c.literals[j].var)
          throw domain_error("duplicate variable in clause");
    if (enc == ClauseEncoding::Linear) {
      Polynomial sum(-1.0);
      for (const Literal& l : c.literals) {
        VariableId use = l.positive ? l.var : variables.partner(l.var);
        sum += Polynomial::variable(use);
      }
      inequalities.push_back({std::move(sum), ConstraintTag::Clause});
    } else {
      Monomial prod;
      for (const Literal& l : c.literals) {
        VariableId falsifier = l.positive ? variables.partner(l.var) : l.var;
        prod = prod * Monomial::variable(falsifier);
      }
      equalities.push_back({Polynomial::term(prod, 1.0), ConstraintTag::Clause});
    }
  }
};

namespace detail {

inline void enumerate_multilinear(const std::vector<VariableId>& ids, std::size_t at,
                                  std::uint32_t remaining, Monomial current,
                                  std::vector<Monomial>& out) {
  if (at == ids.size()) {
    out.push_back(current);
    return;
  }
  enumerate_multilinear(ids, at + 1, remaining, current, out);
  if (remaining > 0)
    enumerate_multilinear(ids, at + 1, remaining - 1,
                          current * Monomial::variable(ids[at]), out);
}

}  // namespace detail

// Interval bounds B_alpha - x^alpha >= 0 and x^alpha - L_alpha >= 0 for
// multilinear monomials of degree <= d. Degree-1 bounds for Boolean literals
// are omitted; those follow from the axioms.
inline std::vector<SupportConstraint> generate_bounding_inequalities(
    const ConstraintSystem& sys, std::uint32_t d) {
  if (d < 1) throw domain_error("bounding inequalities need degree >= 1");
  std::vector<Monomial> monos;
  detail::enumerate_multilinear(sys.variables.all_ids(), 0, d, Monomial{}, monos);
  std::sort(monos.begin(), monos.end());
  std::vector<SupportConstraint> out;
  for (const Monomial& m : monos) {
    if (m.is_one()) continue;
    if (m.degree() == 1 && sys.variables.is_boolean_like(m.entries()[0].first)) continue;
    Interval b = monomial_bounds(m, sys.variables);
    Polynomial xm = Polynomial::term(m, 1.0);
    out.push_back({Polynomial(b.hi) - xm, ConstraintTag::BoundingAxiom});
    out.push_back({xm - Polynomial(b.lo), ConstraintTag::BoundingAxiom});
  }
  return out;
}

}  // namespace sospl
