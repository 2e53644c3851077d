#include <catch2/catch_amalgamated.hpp>

#include "sospl/implicit_learning.hpp"
#include "sospl/solver.hpp"

using namespace sospl;

TEST_CASE("hoeffding radius formula") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");

  // Boolean monomial, m = 5000, delta = 0.01, N_d = 10
  double r = hoeffding_radius(Monomial::variable(x), sys.variables, 5000, 0.01, 10);
  double expect = std::sqrt(std::log(2.0 * 10 / 0.01) / (2.0 * 5000.0));
  CHECK(r == Catch::Approx(expect));
  CHECK(r == Catch::Approx(0.02757).margin(5e-5));

  // radius shrinks to zero as m grows
  CHECK(hoeffding_radius(Monomial::variable(x), sys.variables, 100000000, 0.01, 10) < 1e-3);

  // constant monomial: zero range, zero radius
  CHECK(hoeffding_radius(Monomial{}, sys.variables, 5000, 0.01, 10) == 0.0);

  CHECK_THROWS_AS(hoeffding_radius(Monomial::variable(x), sys.variables, 0, 0.01, 10),
                  domain_error);
  CHECK_THROWS_AS(hoeffding_radius(Monomial::variable(x), sys.variables, 10, 1.5, 10),
                  domain_error);
}

TEST_CASE("fully observed rows pin moments to empirical means") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");

  PartialExampleSet one;
  one.schema = &sys.variables;
  one.rows.push_back(PartialAssignment::of(sys.variables, {{x, 1.0}, {nx, 0.0}}));
  LearnedBuild lb = build_learned_program(sys, one, 2, 0.05);

  // the example block has no free variables, so linking rows are constant
  REQUIRE(lb.program.groups.size() == 2);
  CHECK(lb.program.groups[1].index.size() == 1);
  for (const LinkingRow& link : lb.program.linking) {
    Polynomial pm = Polynomial::term(link.alpha, 1.0);
    double observed = pm.evaluate(one.rows[0]);
    if (link.empirical.empty()) {
      CHECK(observed == 0.0);  // zero terms vanish from the form
      continue;
    }
    REQUIRE(link.empirical.size() == 1);
    const auto& [gid, beta, coeff] = link.empirical[0];
    CHECK(gid == 1);
    CHECK(beta.is_one());
    CHECK(coeff == Catch::Approx(observed));
  }

  // two rows x=1, x=0 center e(x) at 0.5
  PartialExampleSet two;
  two.schema = &sys.variables;
  two.rows.push_back(PartialAssignment::of(sys.variables, {{x, 1.0}, {nx, 0.0}}));
  two.rows.push_back(PartialAssignment::of(sys.variables, {{x, 0.0}, {nx, 1.0}}));
  LearnedBuild lb2 = build_learned_program(sys, two, 2, 0.05);
  SolverOutcome out = solve(lb2.program);
  REQUIRE(out.feasible());
  double ex = out.moments.value(lb2.program, Monomial::variable(x));
  double radius = lb2.diagnostics.radii[0].second;
  CHECK(ex >= 0.5 - radius - 1e-6);
  CHECK(ex <= 0.5 + radius + 1e-6);
}

TEST_CASE("missing coordinates get private block variables with restricted axioms") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  PartialExampleSet rows;
  rows.schema = &sys.variables;
  rows.rows.push_back({});  // x missing entirely
  LearnedBuild lb = build_learned_program(sys, rows, 2, 0.1);

  REQUIRE(lb.program.groups.size() == 2);
  const BlockGroup& grp = lb.program.groups[1];
  CHECK(grp.index.size() == 4);  // 1, x, ~x, x~x over the example's own variables
  // the group's complementarity rows exist and the linking row references
  // the group copy of x
  bool group_norm = false, group_eq = false;
  for (const AffineRow& r : lb.program.rows) {
    if (r.group == 1 && r.origin == RowOrigin::Normalization) group_norm = true;
    if (r.group == 1 && r.origin == RowOrigin::EqualityConstraint) group_eq = true;
  }
  CHECK(group_norm);
  CHECK(group_eq);
  bool links_group_var = false;
  for (const LinkingRow& link : lb.program.linking)
    for (const auto& [gid, beta, coeff] : link.empirical)
      if (gid == 1 && !beta.is_one()) links_group_var = true;
  CHECK(links_group_var);
}

TEST_CASE("restricted constraints that falsify outright surface as diagnostics") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  auto [y, ny] = sys.declare_boolean("y");
  sys.add_clause({{{x, true}, {y, true}}});

  PartialExampleSet rows;
  rows.schema = &sys.variables;
  rows.rows.push_back(
      PartialAssignment::of(sys.variables, {{x, 0.0}, {nx, 1.0}, {y, 0.0}, {ny, 1.0}}));
  LearnedBuild lb = build_learned_program(sys, rows, 2, 0.1);
  REQUIRE(lb.diagnostics.violations.size() >= 1);
  CHECK(lb.diagnostics.violations[0].value < 0.0);

  SolverOutcome out = solve(lb.program);
  REQUIRE(out.infeasible());
  CHECK(verify_certificate(out.certificate, sys, rows, 2, 0.1));
}

TEST_CASE("example order does not change the learned program or its outcome") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  auto [y, ny] = sys.declare_boolean("y");
  sys.add_moment_bound(Polynomial::variable(x), BoundDir::LessEq, 0.9);

  PartialExampleSet fwd;
  fwd.schema = &sys.variables;
  fwd.rows.push_back(PartialAssignment::of(sys.variables, {{x, 1.0}, {nx, 0.0}}));
  fwd.rows.push_back(PartialAssignment::of(sys.variables, {{y, 0.0}, {ny, 1.0}}));
  fwd.rows.push_back(PartialAssignment::of(sys.variables, {{x, 1.0}, {nx, 0.0}}));
  PartialExampleSet rev = fwd;
  std::reverse(rev.rows.begin(), rev.rows.end());

  LearnedBuild a = build_learned_program(sys, fwd, 2, 0.05);
  LearnedBuild b = build_learned_program(sys, rev, 2, 0.05);
  REQUIRE(a.program.groups.size() == b.program.groups.size());
  for (std::size_t g = 0; g < a.program.groups.size(); ++g) {
    CHECK(a.program.groups[g].pattern == b.program.groups[g].pattern);
    CHECK(a.program.groups[g].weight == b.program.groups[g].weight);
  }
  SolverOutcome oa = solve(a.program);
  SolverOutcome ob = solve(b.program);
  CHECK(oa.tag == ob.tag);
}

TEST_CASE("hoeffding intervals cover true moments at the stated rate") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  auto [y, ny] = sys.declare_boolean("y");

  MaskedSampler sampler;
  sampler.schema = &sys.variables;
  auto atom = [&](double vx, double vy, double w) {
    MaskedSampler::Atom a;
    a.point = PartialAssignment::of(
        sys.variables, {{x, vx}, {nx, 1 - vx}, {y, vy}, {ny, 1 - vy}});
    a.weight = w;
    return a;
  };
  sampler.atoms = {atom(1, 1, 0.4), atom(1, 0, 0.3), atom(0, 1, 0.2), atom(0, 0, 0.1)};
  // value-dependent masking: hide y whenever y = 0
  sampler.mask = [&, y = y](const PartialAssignment& z, std::mt19937_64&) {
    if (*z.get(y) == 0.0) return std::vector<VariableId>{y};
    return std::vector<VariableId>{};
  };

  const double delta = 0.1;
  const std::size_t m = 400;
  int trials = 60, covered = 0;
  for (int trial = 0; trial < trials; ++trial) {
    PartialExampleSet data =
        generate_masked(sampler, m, 1000 + static_cast<std::uint64_t>(trial));
    // empirical mean of x over rows where x is visible equals the usual mean
    // here because x is never masked
    double mean = 0.0;
    for (const PartialAssignment& r : data.rows) mean += *r.get(x);
    mean /= static_cast<double>(m);
    std::size_t n_d = build_index(sys, 2).size();
    double radius = hoeffding_radius(Monomial::variable(x), sys.variables, m, delta, n_d);
    double truth = sampler.true_moment(Monomial::variable(x));
    if (std::abs(mean - truth) <= radius) ++covered;
  }
  // binomial 3-sigma slack around the (1 - delta) coverage target
  double expect = (1.0 - delta) * trials;
  double sigma = std::sqrt(trials * delta * (1.0 - delta));
  CHECK(covered >= expect - 3.0 * sigma);
}

TEST_CASE("consistent data keeps the learned program feasible") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  auto [y, ny] = sys.declare_boolean("y");
  sys.add_clause({{{x, true}, {y, true}}});
  sys.add_moment_bound(Polynomial::variable(x), BoundDir::GreaterEq, 0.5);

  MaskedSampler sampler;
  sampler.schema = &sys.variables;
  auto atom = [&](double vx, double vy, double w) {
    MaskedSampler::Atom a;
    a.point = PartialAssignment::of(
        sys.variables, {{x, vx}, {nx, 1 - vx}, {y, vy}, {ny, 1 - vy}});
    a.weight = w;
    return a;
  };
  // satisfies the clause everywhere and E[x] = 0.7 >= 0.5
  sampler.atoms = {atom(1, 1, 0.4), atom(1, 0, 0.3), atom(0, 1, 0.3)};
  sampler.mask = [&, x = x](const PartialAssignment& z, std::mt19937_64& rng) {
    std::vector<VariableId> hide;
    if (rng() % 2 == 0) hide.push_back(x);
    return hide;
  };

  int accepts = 0, trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    PartialExampleSet data =
        generate_masked(sampler, 500, 77 + static_cast<std::uint64_t>(trial));
    LearnedBuild lb = build_learned_program(sys, data, 2, 0.1);
    if (solve(lb.program).feasible()) ++accepts;
  }
  CHECK(accepts >= 18);  // 1 - delta of 20, with slack
}
