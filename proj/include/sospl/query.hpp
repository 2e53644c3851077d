#pragma once

#include "sospl/implicit_learning.hpp"
#include "sospl/solver.hpp"

namespace sospl {

struct Query {
  enum class Kind : std::uint8_t { Decide, Bound, ConditionalProb } kind = Kind::Decide;
  Polynomial bound_poly;                  // Bound
  VariableId cond_a{0}, cond_b{0};        // ConditionalProb
  std::uint32_t degree = 2;
  double epsilon = 1e-3;
};

enum class Decision : std::uint8_t { Accept, Reject, Indeterminate };

struct DecideResult {
  Decision decision = Decision::Indeterminate;
  SolverOutcome outcome;
  LearnDiagnostics diagnostics;  // populated when examples were supplied
  bool used_examples = false;
};

// Feasibility of the background system plus data constraints: Accept on a
// pseudo-moment witness, Reject on a verified refutation.
inline DecideResult decide(const ConstraintSystem& sys,
                           const PartialExampleSet* examples, std::uint32_t d,
                           double delta = 0.05, const SolverConfig& cfg = {}) {
  DecideResult res;
  SosProgram prog;
  if (examples && !examples->rows.empty()) {
    LearnedBuild build = build_learned_program(sys, *examples, d, delta);
    prog = std::move(build.program);
    res.diagnostics = std::move(build.diagnostics);
    res.used_examples = true;
  } else {
    prog = build_program(sys, d);
  }
  res.outcome = solve(prog, cfg);
  switch (res.outcome.tag) {
    case SolverOutcome::Tag::Feasible:
      res.decision = Decision::Accept;
      break;
    case SolverOutcome::Tag::Infeasible:
      res.decision = Decision::Reject;
      break;
    default:
      res.decision = Decision::Indeterminate;
      break;
  }
  return res;
}

enum class EndpointStatus : std::uint8_t { Certified, Indeterminate };

struct BoundResult {
  Interval interval;
  EndpointStatus lo_status = EndpointStatus::Indeterminate;
  EndpointStatus hi_status = EndpointStatus::Indeterminate;
  std::uint32_t degree = 0;
  bool empty_feasible_set = false;
  RefutationCertificate infeasibility;  // when the system itself is refuted
  long iterations = 0;
};

namespace detail {

// One-sided level bisection. For the upper side: shrink a verified-infeasible
// ceiling toward the largest attained value; certificates sharpen the ceiling
// past the midpoint via the probe multiplier.
inline void bisect_endpoint(LevelProbe& probe, bool upper, double attained,
                            double outer, double eps, const SolverConfig& cfg,
                            double& endpoint, EndpointStatus& status,
                            long& iterations) {
  double inner = attained;  // value known attainable by a pseudo-distribution
  SolverConfig probe_cfg = cfg;
  int stalls = 0;
  while (std::abs(outer - inner) > eps) {
    double mid = 0.5 * (outer + inner);
    SolverOutcome r = probe.solve_at(mid, probe_cfg);
    iterations += r.iterations;
    if (r.feasible()) {
      double v = probe.value_at(r.moments);
      inner = upper ? std::max({inner, mid, v}) : std::min({inner, mid, v});
      if (upper ? inner > outer : inner < outer) inner = outer;
    } else if (r.infeasible()) {
      double sharpened = mid;
      for (const MomentBoundMultiplier& bm : r.certificate.bound_multipliers)
        if (bm.bound == probe.bound_index() && bm.lambda > 0.0)
          sharpened = upper ? mid - 1.0 / bm.lambda : mid + 1.0 / bm.lambda;
      outer = upper ? std::min({sharpened, mid, outer}) : std::max({sharpened, mid, outer});
    } else {
      if (stalls < 2) {
        probe_cfg.max_iter *= 4;
        ++stalls;
        continue;
      }
      break;
    }
  }
  endpoint = outer;
  status = std::abs(outer - inner) <= eps ? EndpointStatus::Certified
                                          : EndpointStatus::Indeterminate;
}

}  // namespace detail

// Certified interval containing E_D[p] for every distribution D consistent
// with the system and the data rows; bisection on moment-bound levels with an
// initial bracket from the interval bounds of p.
inline BoundResult bound_expectation(const ConstraintSystem& sys,
                                     const PartialExampleSet* examples,
                                     const Polynomial& p, std::uint32_t d,
                                     double eps = 1e-3, double delta = 0.05,
                                     const SolverConfig& cfg = {}) {
  if (p.degree() > d)
    throw domain_error("query polynomial degree exceeds relaxation degree");
  BoundResult res;
  res.degree = d;
  Interval box = expression_bounds(p, sys.variables);
  res.interval = box;

  SosProgram prog;
  if (examples && !examples->rows.empty())
    prog = build_learned_program(sys, *examples, d, delta).program;
  else
    prog = build_program(sys, d);

  SolverOutcome base = solve(prog, cfg);
  res.iterations = base.iterations;
  if (base.infeasible()) {
    res.empty_feasible_set = true;
    res.infeasibility = base.certificate;
    res.lo_status = res.hi_status = EndpointStatus::Certified;
    return res;
  }
  if (!base.feasible()) return res;  // outer box stands, endpoints indeterminate

  Polynomial red = reduce(p, sys.variables);
  double attained = 0.0;
  for (const auto& [mono, coeff] : red.terms())
    attained += coeff * base.moments.values[prog.var_index(0, mono)];

  LevelProbe up(prog, p, BoundDir::GreaterEq);
  detail::bisect_endpoint(up, true, attained, box.hi, eps, cfg, res.interval.hi,
                          res.hi_status, res.iterations);
  LevelProbe down(prog, p, BoundDir::LessEq);
  detail::bisect_endpoint(down, false, attained, box.lo, eps, cfg, res.interval.lo,
                          res.lo_status, res.iterations);
  return res;
}

// Interval for Pr[a | b] from intervals on E[a b] and E[b]; conditioning on a
// possibly-null event pushes the upper endpoint to 1.
inline Interval conditional_probability(const ConstraintSystem& sys,
                                        const PartialExampleSet* examples,
                                        VariableId a, VariableId b, std::uint32_t d,
                                        double eps = 1e-3, double delta = 0.05,
                                        const SolverConfig& cfg = {}) {
  if (!sys.variables.is_boolean_like(a) || !sys.variables.is_boolean_like(b))
    throw domain_error("conditional probability needs Boolean literals");
  Polynomial ab = Polynomial::term(Monomial::variable(a) * Monomial::variable(b), 1.0);
  Polynomial pb = Polynomial::variable(b);
  BoundResult rab = bound_expectation(sys, examples, ab, d, eps, delta, cfg);
  BoundResult rb = bound_expectation(sys, examples, pb, d, eps, delta, cfg);
  Interval out;
  out.lo = rb.interval.hi > 0.0 ? rab.interval.lo / rb.interval.hi : 0.0;
  if (rb.interval.lo <= eps)
    out.hi = 1.0;
  else
    out.hi = rab.interval.hi / rb.interval.lo;
  out.lo = std::clamp(out.lo, 0.0, 1.0);
  out.hi = std::clamp(out.hi, 0.0, 1.0);
  if (out.lo > out.hi) out.lo = out.hi;
  return out;
}

}  // namespace sospl
