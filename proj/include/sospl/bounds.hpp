#pragma once

#include "sospl/polynomial.hpp"

namespace sospl {

// Interval containing x^alpha(z) over every completion z of rho within the
// declared ranges. Assigned variables contribute their fixed power; the rest
// contribute per-variable power intervals swept into a running product.
inline Interval monomial_bounds(const Monomial& alpha, const VariableSet& vars,
                                const PartialAssignment& rho = {}) {
  Interval acc{1.0, 1.0};
  for (const auto& [v, e] : alpha.entries()) {
    Interval factor;
    if (auto val = rho.get(v)) {
      double p = std::pow(*val, static_cast<double>(e));
      factor = {p, p};
    } else {
      Interval r = vars.range(v);
      if (!std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw domain_error("unbounded variable '" + vars.display_name(v) +
                           "' in monomial bound");
      factor = interval_pow(r, e);
    }
    acc = interval_mul(acc, factor);
  }
  return acc;
}

// Term-wise worst-case bounds: each monomial contributes its own interval
// endpoint weighted by the sign of its coefficient.
inline Interval expression_bounds(const Polynomial& p, const VariableSet& vars,
                                  const PartialAssignment& rho = {}) {
  Interval acc{0.0, 0.0};
  for (const auto& [m, c] : p.terms()) {
    Interval b = monomial_bounds(m, vars, rho);
    if (c > 0) {
      acc.lo += c * b.lo;
      acc.hi += c * b.hi;
    } else {
      acc.lo += c * b.hi;
      acc.hi += c * b.lo;
    }
  }
  return acc;
}

inline double naive_norm(const Polynomial& p, const VariableSet& vars) {
  Interval b = expression_bounds(p, vars);
  return std::max(b.hi, std::abs(b.lo));
}

// Does the worst-case completion of rho keep p >= 0 satisfied?
inline bool is_witnessed(const Polynomial& p, const VariableSet& vars,
                         const PartialAssignment& rho) {
  return expression_bounds(p, vars, rho).lo >= 0.0;
}

}  // namespace sospl
