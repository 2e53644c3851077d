#include <catch2/catch_amalgamated.hpp>

#include "sospl/solver.hpp"
#include "support/generators.hpp"

using namespace sospl;

namespace {

// exact moment vector of a finite distribution over total assignments
std::vector<double> moment_vector(const SosProgram& prog,
                                  const std::vector<std::pair<PartialAssignment, double>>& dist) {
  std::vector<double> u(prog.var_count(), 0.0);
  double total = 0.0;
  for (const auto& [z, w] : dist) total += w;
  for (std::size_t i = 0; i < prog.var_count(); ++i) {
    const auto& [group, mono] = prog.vars[i];
    REQUIRE(group == 0);
    Polynomial pm = Polynomial::term(mono, 1.0);
    double acc = 0.0;
    for (const auto& [z, w] : dist) acc += w * pm.evaluate(z);
    u[i] = acc / total;
  }
  return u;
}

}  // namespace

TEST_CASE("moment index enumerates reduced monomials in graded order") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  MomentIndex idx = build_index(sys, 2);
  REQUIRE(idx.size() == 4);  // 1, x, ~x, x*~x (x^2 reduces to x)
  CHECK(idx.at(0).is_one());
  CHECK(idx.at(1) == Monomial::variable(x));
  CHECK(idx.at(2) == Monomial::variable(nx));
  CHECK(idx.at(3) == Monomial::variable(x) * Monomial::variable(nx));

  ConstraintSystem reals;
  VariableId t = reals.declare_bounded("t", -1.0, 1.0);
  MomentIndex ridx = build_index(reals, 2);
  REQUIRE(ridx.size() == 3);  // 1, t, t^2
  CHECK(ridx.at(2) == Monomial::variable(t, 2));

  MomentIndex zero(sys.variables, 0);
  CHECK(zero.size() == 1);

  CHECK_THROWS_AS(MomentIndex(sys.variables, 2, 3), resource_error);
}

TEST_CASE("products of half-degree monomials stay indexed") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    testing::RandomSystem rs = testing::random_boolean_system(rng, 3, 2, 1);
    std::uint32_t d = 2 + 2 * static_cast<std::uint32_t>(rng() % 2);
    MomentIndex idx = build_index(rs.sys, d);
    std::size_t half = idx.prefix_size(d / 2);
    for (std::size_t a = 0; a < half; ++a)
      for (std::size_t b = a; b < half; ++b)
        CHECK(idx.contains(reduce(idx.at(a) * idx.at(b), rs.sys.variables)));
  }
}

TEST_CASE("program structure for a single Boolean at degree 2") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  SosProgram prog = build_program(sys, 2);

  REQUIRE(!prog.blocks.empty());
  const PsdBlock& moment = prog.blocks[0];
  CHECK(moment.kind == BlockKind::Moment);
  REQUIRE(moment.dim() == 3);  // 1, x, ~x

  // derived by hand: entry (x, x) reduces to e(x); entry (x, ~x) to e(x ~x)
  std::size_t ex = prog.var_index(0, Monomial::variable(x));
  std::size_t exnx = prog.var_index(0, Monomial::variable(x) * Monomial::variable(nx));
  bool diag_ok = false, off_ok = false;
  for (const PsdCell& c : moment.cells) {
    if (c.row == 1 && c.col == 1)
      diag_ok = c.form.size() == 1 && c.form[0].var == ex && c.form[0].coeff == 1.0;
    if (c.row == 1 && c.col == 2)
      off_ok = c.form.size() == 1 && c.form[0].var == exnx && c.form[0].coeff == 1.0;
  }
  CHECK(diag_ok);
  CHECK(off_ok);

  // complementarity rows: e(x) + e(~x) = 1 and e(x ~x) = 0, deduplicated
  std::size_t enx = prog.var_index(0, Monomial::variable(nx));
  bool sum_row = false, prod_row = false;
  for (const AffineRow& r : prog.rows) {
    if (r.kind != RowKind::Equality || r.origin != RowOrigin::EqualityConstraint) continue;
    if (r.form.size() == 3) sum_row = true;
    if (r.form.size() == 1 && r.form[0].var == exnx) prod_row = true;
  }
  CHECK(sum_row);
  CHECK(prod_row);
  (void)enx;

  bool norm_row = false;
  for (const AffineRow& r : prog.rows)
    if (r.origin == RowOrigin::Normalization && r.rhs == 1.0) norm_row = true;
  CHECK(norm_row);
}

TEST_CASE("localizing block degree bookkeeping") {
  ConstraintSystem sys;
  VariableId t = sys.declare_bounded("t", -2.0, 3.0);
  sys.add_support_inequality(Polynomial(3.0) - Polynomial::variable(t));  // degree 1
  SosProgram prog = build_program(sys, 2);

  for (const PsdBlock& b : prog.blocks) {
    if (b.kind != BlockKind::Localizing) continue;
    const RestrictedConstraint& g = prog.groups[0].ineqs[static_cast<std::size_t>(b.constraint)];
    if (g.tag == ConstraintTag::BoundingAxiom) {
      CHECK(b.dim() == 1);
    } else {
      std::uint32_t expect = (prog.degree - g.poly.degree()) / 2;
      CHECK(b.dim() == prog.groups[0].index.prefix_size(expect));
    }
  }

  // user equality rows exist for every monomial within the degree budget
  ConstraintSystem bsys;
  auto [x, nx] = bsys.declare_boolean("x");
  bsys.add_support_equality(Polynomial::variable(x) - Polynomial(0.25));
  SosProgram bprog = build_program(bsys, 2);
  int eq_rows = 0;
  for (const AffineRow& r : bprog.rows)
    if (r.origin == RowOrigin::EqualityConstraint) ++eq_rows;
  CHECK(eq_rows >= 4);  // complementarity rows plus the user equality rows

  auto build_overdegree = [] {
    ConstraintSystem overdeg;
    auto [a, na] = overdeg.declare_boolean("a");
    auto [b, nb] = overdeg.declare_boolean("b");
    auto [c, nc] = overdeg.declare_boolean("c");
    Monomial abc = Monomial::variable(a) * Monomial::variable(b) * Monomial::variable(c);
    overdeg.add_support_inequality(Polynomial::term(abc, 1.0));
    build_program(overdeg, 2);
  };
  CHECK_THROWS_AS(build_overdegree(), domain_error);
}

TEST_CASE("moment vectors of explicit distributions satisfy the program") {
  std::mt19937_64 rng(909);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 25; ++trial) {
    testing::RandomSystem rs = testing::random_boolean_system(rng, 3, 2, 0);
    // distribution over satisfying atoms, if any
    std::vector<std::pair<PartialAssignment, double>> dist;
    for (std::size_t mask = 0; mask < 8; ++mask) {
      PartialAssignment z;
      for (std::size_t i = 0; i < rs.booleans.size(); ++i) {
        double val = (mask >> i) & 1 ? 1.0 : 0.0;
        z.assign(rs.sys.variables, rs.booleans[i], val);
        z.assign(rs.sys.variables, rs.sys.variables.partner(rs.booleans[i]), 1.0 - val);
      }
      bool ok = true;
      for (const SupportConstraint& g : rs.sys.inequalities)
        if (g.tag == ConstraintTag::Clause && g.poly.evaluate(z) < 0) ok = false;
      if (ok) dist.push_back({z, 1.0 + static_cast<double>(rng() % 5)});
    }
    if (dist.empty()) continue;
    ++tested;
    std::uint32_t d = 2 + 2 * static_cast<std::uint32_t>(rng() % 2);
    ConstraintSystem clean = rs.sys;
    clean.moment_bounds.clear();  // keep only the support side
    SosProgram prog = build_program(clean, d);
    ResidualReport rep = evaluate_point(prog, moment_vector(prog, dist));
    CHECK(rep.max_eq_violation <= 1e-8);
    CHECK(rep.max_ineq_violation <= 1e-8);
    CHECK(rep.min_block_eig >= -1e-8);
  }
  CHECK(tested >= 10);
}

TEST_CASE("objective attachment") {
  ConstraintSystem sys;
  auto [x, nx] = sys.declare_boolean("x");
  SosProgram prog = build_program(sys, 2);
  SosProgram with = attach_objective(prog, Polynomial::variable(x), ObjectiveSense::Maximize);
  CHECK(with.has_objective);
  CHECK(with.maximize);
  REQUIRE(with.objective.size() == 1);
  CHECK(with.objective[0].var == with.var_index(0, Monomial::variable(x)));

  ConstraintSystem deep;
  auto [a, na] = deep.declare_boolean("a");
  auto [b, nb] = deep.declare_boolean("b");
  auto [c, nc] = deep.declare_boolean("c");
  Monomial abc = Monomial::variable(a) * Monomial::variable(b) * Monomial::variable(c);
  CHECK_THROWS_AS(attach_objective(build_program(deep, 2), Polynomial::term(abc, 1.0),
                                   ObjectiveSense::Maximize),
                  domain_error);
}
