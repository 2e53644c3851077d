#include <catch2/catch_amalgamated.hpp>

#include "sospl/poly_text.hpp"
#include "support/generators.hpp"

using namespace sospl;

namespace {

ConstraintSystem xyz_system() {
  ConstraintSystem sys;
  sys.declare_boolean("x");
  sys.declare_boolean("y");
  sys.declare_boolean("z");
  return sys;
}

}  // namespace

TEST_CASE("monomials keep a canonical graded order") {
  ConstraintSystem sys = xyz_system();
  VariableId x = sys.variables.find("x");
  VariableId y = sys.variables.find("y");
  Monomial one;
  Monomial mx = Monomial::variable(x);
  Monomial mxy = mx * Monomial::variable(y);
  Monomial mx2 = Monomial::variable(x, 2);
  CHECK(one < mx);
  CHECK(mx < mxy);
  CHECK(mx2 < mxy);  // x^2 precedes x*y within degree 2
  CHECK(mxy.degree() == 2);
  CHECK((mx * mx) == mx2);
  CHECK(Monomial::from_entries({{y, 1}, {x, 1}}) == mxy);
  CHECK(reduce(mx2, sys.variables) == mx);
}

TEST_CASE("polynomial arithmetic collects terms and drops zeros") {
  ConstraintSystem sys = xyz_system();
  VariableId x = sys.variables.find("x");
  VariableId y = sys.variables.find("y");
  Polynomial p = Polynomial::variable(x) + Polynomial::variable(y);
  Polynomial q = p - Polynomial::variable(y);
  CHECK(q == Polynomial::variable(x));
  CHECK(q.term_count() == 1);
  Polynomial prod = p * p;
  CHECK(prod.coefficient(Monomial::variable(x) * Monomial::variable(y)) == 2.0);
  CHECK((p - p).is_zero());
  CHECK((p * 0.0).is_zero());
}

TEST_CASE("partial evaluation substitutes and collects") {
  ConstraintSystem sys;
  auto t = sys.declare_bounded("t", -10.0, 10.0);
  auto u = sys.declare_bounded("u", -10.0, 10.0);
  auto w = sys.declare_bounded("w", -10.0, 10.0);

  // p = t*u + 2w, rho = {t=2} -> 2u + 2w
  Polynomial p = Polynomial::term(Monomial::variable(t) * Monomial::variable(u), 1.0) +
                 2.0 * Polynomial::variable(w);
  PartialAssignment rho = PartialAssignment::of(sys.variables, {{t, 2.0}});
  Polynomial expect = 2.0 * Polynomial::variable(u) + 2.0 * Polynomial::variable(w);
  CHECK(partial_eval(p, rho) == expect);

  // identity under the empty assignment
  CHECK(partial_eval(p, {}) == p);

  // p = t^2 u at {t=3, u=0.5} -> 4.5; cross-checked by full evaluation
  Polynomial q = Polynomial::term(Monomial::variable(t, 2) * Monomial::variable(u), 1.0);
  PartialAssignment full = PartialAssignment::of(sys.variables, {{t, 3.0}, {u, 0.5}});
  Polynomial restricted = partial_eval(q, full);
  CHECK(restricted.degree() == 0);
  CHECK(restricted.constant_term() == Catch::Approx(q.evaluate(full)));
  CHECK(restricted.constant_term() == Catch::Approx(4.5));
}

TEST_CASE("assignments respect ranges and literal pairing") {
  ConstraintSystem sys = xyz_system();
  VariableId x = sys.variables.find("x");
  VariableId nx = sys.variables.partner(x);
  PartialAssignment rho;
  rho.assign(sys.variables, x, 1.0);
  CHECK_THROWS_AS(rho.assign(sys.variables, nx, 1.0), domain_error);
  CHECK_THROWS_AS(rho.assign(sys.variables, x, 0.5), domain_error);

  ConstraintSystem reals;
  VariableId t = reals.declare_bounded("t", -2.0, 3.0);
  PartialAssignment sigma;
  CHECK_THROWS_AS(sigma.assign(reals.variables, t, 3.5), domain_error);
}

TEST_CASE("partial evaluation agrees with full evaluation on completions") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    testing::RandomSystem rs = testing::random_boolean_system(rng, 3, 0, 0);
    Polynomial p = testing::random_polynomial(rng, rs, 5, 3);
    PartialAssignment z = testing::random_point(rng, rs.sys.variables);
    PartialAssignment rho;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& [v, val] : z.values())
      if (unif(rng) < 0.5) rho.assign(rs.sys.variables, v, val);
    double direct = p.evaluate(z);
    double via = partial_eval(p, rho).evaluate(z);
    double scale = std::max(1.0, naive_norm(p, rs.sys.variables));
    CHECK(std::abs(direct - via) <= 1e-9 * scale);
  }
}

TEST_CASE("polynomial text parses and serializes canonically") {
  ConstraintSystem sys;
  sys.declare_boolean("x");
  sys.declare_boolean("y");
  sys.declare_bounded("z", -5.0, 5.0);
  const VariableSet& vars = sys.variables;

  Polynomial p = parse_polynomial("2*x*y - 3*z + 0.5", vars);
  CHECK(to_string(p, vars) == "2*x*y - 3*z + 0.5");
  CHECK(parse_polynomial(to_string(p, vars), vars) == p);

  Polynomial q = parse_polynomial(" ~x * y+ z^2 ", vars);
  VariableId nx = vars.partner(vars.find("x"));
  CHECK(q.coefficient(Monomial::variable(nx) * Monomial::variable(vars.find("y"))) == 1.0);
  CHECK(q.coefficient(Monomial::variable(vars.find("z"), 2)) == 1.0);
  CHECK(parse_polynomial(to_string(q, vars), vars) == q);

  CHECK_THROWS_AS(parse_polynomial("2*q", vars), parse_error);
  CHECK_THROWS_AS(parse_polynomial("x + ", vars), parse_error);
  CHECK_THROWS_AS(parse_polynomial("~z", vars), parse_error);
  CHECK_THROWS_AS(parse_polynomial("x^0.5", vars), parse_error);
}
