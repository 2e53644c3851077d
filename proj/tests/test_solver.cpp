#include <catch2/catch_amalgamated.hpp>

#include "sospl/solver.hpp"
#include "support/atom_lp.hpp"
#include "support/generators.hpp"

using namespace sospl;

TEST_CASE("contradictory equalities are refuted with a verified certificate") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  sys.add_support_equality(Polynomial::variable(x));
  sys.add_support_equality(Polynomial::variable(x) - Polynomial(1.0));
  SosProgram prog = build_program(sys, 2);
  SolverOutcome out = solve(prog);
  REQUIRE(out.infeasible());
  CHECK(verify_certificate(out.certificate, sys, 2));
  CHECK(out.certificate_report.residual_norm <=
        1e-6 * std::max(1.0, out.certificate_report.certificate_norm));
}

TEST_CASE("an unconstrained Boolean is feasible") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  SosProgram prog = build_program(sys, 2);
  SolverOutcome out = solve(prog);
  REQUIRE(out.feasible());
  double ex = out.moments.value(prog, Monomial::variable(x));
  double enx = out.moments.value(prog, Monomial::variable(nx));
  CHECK(ex >= -1e-6);
  CHECK(ex <= 1.0 + 1e-6);
  CHECK(ex + enx == Catch::Approx(1.0).margin(1e-6));
  CHECK(out.moments.value(prog, Monomial{}) == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("clashing unit clauses are refuted at degree 1") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  sys.add_clause({{{x, true}}});
  sys.add_clause({{{x, false}}});
  // two-point oracle: neither x=0 nor x=1 satisfies both clauses
  for (double val : {0.0, 1.0}) {
    PartialAssignment z =
        PartialAssignment::of(sys.variables, {{x, val}, {nx, 1.0 - val}});
    int sat = 0;
    for (const SupportConstraint& g : sys.inequalities)
      if (g.tag == ConstraintTag::Clause && g.poly.evaluate(z) >= 0.0) ++sat;
    CHECK(sat < 2);
  }
  SosProgram prog = build_program(sys, 1);
  SolverOutcome out = solve(prog);
  REQUIRE(out.infeasible());
  CHECK(verify_certificate(out.certificate, sys, 1));
}

TEST_CASE("optimize brackets simple optima") {
  SolverConfig cfg;

  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  OptimizeResult mx = optimize(
      attach_objective(build_program(sys, 2), Polynomial::variable(x), ObjectiveSense::Maximize),
      cfg);
  REQUIRE(mx.status == OptimizeResult::Status::Converged);
  CHECK(mx.value.hi <= 1.0 + 1e-9);
  CHECK(mx.value.lo >= 1.0 - cfg.tol_gap - 1e-9);

  OptimizeResult mn = optimize(
      attach_objective(build_program(sys, 2), Polynomial::variable(x), ObjectiveSense::Minimize),
      cfg);
  REQUIRE(mn.status == OptimizeResult::Status::Converged);
  CHECK(mn.value.lo >= -1e-9);
  CHECK(mn.value.hi <= cfg.tol_gap + 1e-9);

  ConstraintSystem reals;
  VariableId t = reals.declare_bounded("t", -1.0, 1.0);
  OptimizeResult sq = optimize(
      attach_objective(build_program(reals, 2),
                       Polynomial::term(Monomial::variable(t, 2), 1.0),
                       ObjectiveSense::Minimize),
      cfg);
  REQUIRE(sq.status == OptimizeResult::Status::Converged);
  CHECK(sq.value.lo >= -1e-6);
  CHECK(sq.value.hi <= 2e-4);
}

TEST_CASE("frechet product bound at degree 2") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  auto [y, ny] = sys.declare_boolean("y");
  sys.add_moment_bound(Polynomial::variable(x), BoundDir::GreaterEq, 0.6);
  sys.add_moment_bound(Polynomial::variable(y), BoundDir::GreaterEq, 0.7);
  Polynomial xy = Polynomial::term(Monomial::variable(x) * Monomial::variable(y), 1.0);

  // oracle: LP over the four atoms gives exactly 0.3
  auto oracle = testing::atom_lp_bounds(sys, xy);
  REQUIRE(oracle.has_value());
  CHECK(oracle->lo == Catch::Approx(0.3).margin(1e-9));

  SolverConfig cfg;
  cfg.tol_gap = 1e-5;
  OptimizeResult r =
      optimize(attach_objective(build_program(sys, 2), xy, ObjectiveSense::Minimize), cfg);
  REQUIRE(r.status == OptimizeResult::Status::Converged);
  CHECK(r.value.lo == Catch::Approx(0.3).margin(1e-4));
  CHECK(r.value.hi == Catch::Approx(0.3).margin(1e-4));
}

TEST_CASE("feasible witnesses satisfy pseudo-moment Cauchy-Schwarz") {
  std::mt19937_64 rng(321);
  int feasible_count = 0;
  for (int trial = 0; trial < 30; ++trial) {
    testing::RandomSystem rs = testing::random_boolean_system(rng, 2, 2, 1);
    SosProgram prog = build_program(rs.sys, 2);
    SolverOutcome out = solve(prog);
    if (!out.feasible()) continue;
    ++feasible_count;
    const MomentIndex& idx = prog.groups[0].index;
    std::size_t half = idx.prefix_size(1);
    for (std::size_t a = 1; a < half; ++a)
      for (std::size_t b = a + 1; b < half; ++b) {
        Monomial ma = idx.at(a), mb = idx.at(b);
        double exy = out.moments.value(prog, ma * mb);
        double exx = out.moments.value(prog, ma * ma);
        double eyy = out.moments.value(prog, mb * mb);
        CHECK(exy * exy <= exx * eyy + 1e-6);
      }
  }
  CHECK(feasible_count >= 5);
}

TEST_CASE("degree escalation never flips a verified refutation") {
  std::mt19937_64 rng(777);
  int refuted = 0;
  for (int trial = 0; trial < 40 && refuted < 8; ++trial) {
    testing::RandomSystem rs = testing::random_boolean_system(rng, 2, 4, 2);
    SolverOutcome low = solve(build_program(rs.sys, 2));
    if (!low.infeasible()) continue;
    ++refuted;
    SolverOutcome high = solve(build_program(rs.sys, 4));
    CHECK(!high.feasible());
  }
  CHECK(refuted >= 3);
}

TEST_CASE("solver outcomes are deterministic") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  auto [y, ny] = sys.declare_boolean("y");
  sys.add_clause({{{x, true}, {y, true}}});
  sys.add_moment_bound(Polynomial::variable(x), BoundDir::LessEq, 0.4);
  SosProgram prog = build_program(sys, 2);
  SolverOutcome a = solve(prog);
  SolverOutcome b = solve(prog);
  REQUIRE(a.tag == b.tag);
  CHECK(a.iterations == b.iterations);
  if (a.feasible()) {
    for (std::size_t i = 0; i < a.moments.values.size(); ++i)
      CHECK(a.moments.values[i] == b.moments.values[i]);
  }
}
