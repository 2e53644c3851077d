#pragma once

// Seeded generators shared by the property tests and the acceptance suite.

#include <random>

#include "sospl/cnf.hpp"
#include "sospl/constraint_system.hpp"

namespace sospl::testing {

struct RandomSystem {
  ConstraintSystem sys;
  std::vector<VariableId> booleans;
};

// n Boolean pairs with random clauses and random one-sided moment bounds on
// single literals; biased so a fair share of instances stay satisfiable.
inline RandomSystem random_boolean_system(std::mt19937_64& rng, int n, int max_clauses,
                                          int max_bounds) {
  RandomSystem out;
  for (int i = 0; i < n; ++i)
    out.booleans.push_back(out.sys.declare_boolean("x" + std::to_string(i)).first);
  std::uniform_int_distribution<int> nclause(0, max_clauses);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int clauses = nclause(rng);
  for (int c = 0; c < clauses; ++c) {
    Clause cl;
    for (int i = 0; i < n; ++i) {
      double r = unif(rng);
      if (r < 0.55) continue;
      cl.literals.push_back({out.booleans[static_cast<std::size_t>(i)], coin(rng) == 1});
    }
    if (cl.literals.empty())
      cl.literals.push_back({out.booleans[0], coin(rng) == 1});
    out.sys.add_clause(cl);
  }
  std::uniform_int_distribution<int> nbound(0, max_bounds);
  int bounds = nbound(rng);
  for (int b = 0; b < bounds; ++b) {
    VariableId v = out.booleans[static_cast<std::size_t>(
        std::uniform_int_distribution<int>(0, n - 1)(rng))];
    double gamma = std::round(unif(rng) * 100.0) / 100.0;
    out.sys.add_moment_bound(Polynomial::variable(v),
                             coin(rng) ? BoundDir::LessEq : BoundDir::GreaterEq, gamma);
  }
  return out;
}

// random multilinear polynomial over the declared positive literals
inline Polynomial random_polynomial(std::mt19937_64& rng, const RandomSystem& rs,
                                    int max_terms, std::uint32_t max_degree) {
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Polynomial p;
  int terms = nterms(rng);
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    std::uint32_t deg = 0;
    for (VariableId v : rs.booleans) {
      if (deg >= max_degree) break;
      if (unif(rng) < 0.4) {
        m = m * Monomial::variable(v);
        ++deg;
      }
    }
    double c = std::round(coeff(rng) * 8.0) / 8.0;
    if (c != 0.0) p.add_term(m, c);
  }
  if (p.is_zero()) p = Polynomial::variable(rs.booleans[0]);
  return p;
}

// random total assignment within the declared ranges
inline PartialAssignment random_point(std::mt19937_64& rng, const VariableSet& vars) {
  PartialAssignment z;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (VariableId v : vars.all_ids()) {
    const VariableInfo& info = vars.info(v);
    if (info.kind == VarKind::Boolean) {
      double val = unif(rng) < 0.5 ? 0.0 : 1.0;
      z.assign(vars, v, val);
      z.assign(vars, vars.partner(v), 1.0 - val);
    } else if (info.kind == VarKind::BoundedReal) {
      z.assign(vars, v, info.lo + (info.hi - info.lo) * unif(rng));
    }
  }
  return z;
}

// random unsatisfiable CNF with a verified minimal refutation level; nullopt
// when the draw is satisfiable or the level exceeds the cap
struct LeveledCnf {
  CnfFormula formula;
  int level = 0;
};

inline bool cnf_satisfiable(const CnfFormula& f) {
  for (std::size_t mask = 0; mask < (std::size_t{1} << f.n); ++mask) {
    bool sat = true;
    for (const auto& cl : f.clauses) {
      bool cl_sat = false;
      for (int lit : cl) {
        bool val = (mask >> (std::abs(lit) - 1)) & 1;
        if ((lit > 0) == val) {
          cl_sat = true;
          break;
        }
      }
      if (!cl_sat) {
        sat = false;
        break;
      }
    }
    if (sat) return true;
  }
  return false;
}

inline CnfFormula random_cnf(std::mt19937_64& rng, int n, int clauses, int max_width) {
  CnfFormula f;
  f.n = n;
  std::uniform_int_distribution<int> width(1, max_width);
  std::uniform_int_distribution<int> var(1, n);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int c = 0; c < clauses; ++c) {
    int w = width(rng);
    std::vector<int> cl;
    for (int i = 0; i < w; ++i) {
      int v = var(rng);
      bool dup = false;
      for (int lit : cl)
        if (std::abs(lit) == v) dup = true;
      if (dup) continue;
      cl.push_back(coin(rng) ? v : -v);
    }
    if (!cl.empty()) f.clauses.push_back(std::move(cl));
  }
  return f;
}

}  // namespace sospl::testing
