#pragma once

#include "sospl/certificate.hpp"
#include "sospl/partial_examples.hpp"
#include "sospl/sos_program.hpp"

namespace sospl {

// Two-sided Hoeffding half-width for the empirical mean of x^alpha over m
// rows: (B - L) * sqrt(ln(2 N_d / delta) / (2m)).
inline double hoeffding_radius(const Monomial& alpha, const VariableSet& vars,
                               std::size_t m, double delta, std::size_t n_d) {
  if (m < 1) throw domain_error("hoeffding_radius: need m >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw domain_error("hoeffding_radius: delta must lie in (0, 1)");
  Interval b = monomial_bounds(alpha, vars);
  double range = b.hi - b.lo;
  if (range == 0.0) return 0.0;
  return range * std::sqrt(std::log(2.0 * static_cast<double>(n_d) / delta) /
                           (2.0 * static_cast<double>(m)));
}

struct LearnDiagnostics {
  std::size_t m = 0;
  std::size_t distinct_patterns = 0;
  std::size_t n_d = 0;
  std::vector<std::pair<Monomial, double>> radii;
  struct Violation {
    std::size_t group;
    std::int32_t constraint;
    bool equality;
    double value;   // the violated constant the restriction reduced to
    double weight;  // number of rows sharing the pattern
  };
  std::vector<Violation> violations;
};

struct LearnedBuild {
  SosProgram program;
  LearnDiagnostics diagnostics;
};

namespace detail {

// Boolean cells imply their twins; patterns must agree after completion so
// identical restrictions share one block group.
inline PartialAssignment completed_pattern(const VariableSet& vars,
                                           const PartialAssignment& rho) {
  PartialAssignment out = rho;
  for (const auto& [v, val] : rho.values()) {
    if (vars.is_boolean_like(v)) {
      VariableId tw = vars.partner(v);
      if (!out.has(tw)) out.assign(vars, tw, 1.0 - val);
    }
  }
  return out;
}

}  // namespace detail

// The combined learned program: the global degree-d relaxation, one private
// block group per distinct example restriction (weighted by multiplicity),
// and two-sided empirical linking rows for every global monomial.
inline LearnedBuild build_learned_program(const ConstraintSystem& sys,
                                          const PartialExampleSet& examples,
                                          std::uint32_t d, double delta,
                                          std::size_t index_cap = MomentIndex::kDefaultCap) {
  if (examples.rows.empty()) throw domain_error("need at least one partial example");
  LearnedBuild out;
  SosProgram& prog = out.program;
  prog.degree = d;
  prog.variables = sys.variables;
  prog.example_count = examples.rows.size();

  // distinct restriction patterns, weighted
  std::map<PartialAssignment, double> patterns;
  for (const PartialAssignment& rho : examples.rows)
    patterns[detail::completed_pattern(sys.variables, rho)] += 1.0;

  prog.groups.reserve(patterns.size() + 1);
  prog.groups.push_back(make_global_group(sys, d, index_cap));
  const BlockGroup& global = prog.groups[0];

  for (const auto& [pattern, weight] : patterns) {
    BlockGroup grp;
    grp.pattern = pattern;
    grp.weight = weight;
    std::vector<VariableId> free_vars;
    for (VariableId v : sys.variables.all_ids())
      if (!pattern.has(v)) free_vars.push_back(v);
    grp.index = MomentIndex(sys.variables, free_vars, d, index_cap);
    for (const RestrictedConstraint& g : global.ineqs)
      grp.ineqs.push_back(
          RestrictedConstraint::of(partial_eval(g.poly, pattern), g.tag, true));
    for (const RestrictedConstraint& h : global.eqs)
      grp.eqs.push_back(
          RestrictedConstraint::of(partial_eval(h.poly, pattern), h.tag, false));
    prog.groups.push_back(std::move(grp));
  }

  for (std::int32_t g = 0; g < static_cast<std::int32_t>(prog.groups.size()); ++g)
    detail::register_group_vars(prog, g);
  for (std::int32_t g = 0; g < static_cast<std::int32_t>(prog.groups.size()); ++g)
    detail::append_group_structure(prog, g, sys.variables);

  for (const MomentBound& mb : sys.moment_bounds) add_moment_bound_row(prog, mb);

  // linking rows: empirical mean form +/- radius brackets each global moment
  const double m = static_cast<double>(examples.rows.size());
  const std::size_t n_d = global.index.size();
  for (const Monomial& alpha : global.index.monomials()) {
    if (alpha.is_one()) continue;
    LinkingRow link;
    link.alpha = alpha;
    link.radius = hoeffding_radius(alpha, sys.variables, examples.rows.size(), delta, n_d);
    LinForm empirical;
    std::int32_t gid = 0;
    for (const auto& [pattern, weight] : patterns) {
      ++gid;
      Polynomial restricted = partial_eval(Polynomial::term(alpha, 1.0), pattern);
      for (const auto& [beta, coeff] : restricted.terms()) {
        Monomial red = reduce(beta, sys.variables);
        double c = coeff * weight / m;
        link.empirical.push_back({gid, red, c});
        lin_add(empirical, prog.var_index(gid, red), c);
      }
    }
    std::size_t alpha_var = prog.var_index(0, alpha);

    AffineRow lower;  // e(alpha) - F >= -radius
    lower.kind = RowKind::GreaterEq;
    lower.origin = RowOrigin::LinkingLower;
    lower.group = 0;
    lower.mono = alpha;
    lower.form = empirical;
    for (LinTerm& t : lower.form) t.coeff = -t.coeff;
    lin_add(lower.form, alpha_var, 1.0);
    lower.rhs = -link.radius;
    prog.rows.push_back(std::move(lower));

    AffineRow upper;  // F - e(alpha) >= -radius
    upper.kind = RowKind::GreaterEq;
    upper.origin = RowOrigin::LinkingUpper;
    upper.group = 0;
    upper.mono = alpha;
    upper.form = empirical;
    lin_add(upper.form, alpha_var, -1.0);
    upper.rhs = -link.radius;
    prog.rows.push_back(std::move(upper));

    out.diagnostics.radii.push_back({alpha, link.radius});
    prog.linking.push_back(std::move(link));
  }

  out.diagnostics.m = examples.rows.size();
  out.diagnostics.distinct_patterns = patterns.size();
  out.diagnostics.n_d = n_d;
  for (std::size_t g = 1; g < prog.groups.size(); ++g) {
    const BlockGroup& grp = prog.groups[g];
    for (std::size_t j = 0; j < grp.ineqs.size(); ++j)
      if (grp.ineqs[j].constant && !grp.ineqs[j].dropped)
        out.diagnostics.violations.push_back(
            {g, static_cast<std::int32_t>(j), false, grp.ineqs[j].value, grp.weight});
    for (std::size_t k = 0; k < grp.eqs.size(); ++k)
      if (grp.eqs[k].constant && !grp.eqs[k].dropped)
        out.diagnostics.violations.push_back(
            {g, static_cast<std::int32_t>(k), true, grp.eqs[k].value, grp.weight});
  }
  return out;
}

// Verifier for certificates of learned programs: rebuilds the deterministic
// block/linking structure from the same inputs and expands against it.
inline VerifyReport verify_certificate_report(const RefutationCertificate& cert,
                                              const ConstraintSystem& sys,
                                              const PartialExampleSet& examples,
                                              std::uint32_t d, double delta,
                                              double tol_cert = 1e-6) {
  LearnedBuild build = build_learned_program(sys, examples, d, delta);
  return verify_certificate_program(cert, build.program, tol_cert);
}

inline bool verify_certificate(const RefutationCertificate& cert,
                               const ConstraintSystem& sys,
                               const PartialExampleSet& examples, std::uint32_t d,
                               double delta, double tol_cert = 1e-6) {
  return verify_certificate_report(cert, sys, examples, d, delta, tol_cert).valid;
}

}  // namespace sospl
