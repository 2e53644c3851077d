#pragma once

#include <Eigen/Dense>

#include "sospl/sos_program.hpp"

namespace sospl {

// Gram matrix for sigma_0 (constraint = -1) or for a localizing constraint,
// over the group's basis monomials at the appropriate degree.
struct GramBlock {
  std::int32_t group = 0;
  std::int32_t constraint = -1;
  std::size_t dim = 0;
  std::vector<double> entries;  // row-major, symmetric

  double at(std::size_t i, std::size_t j) const { return entries[i * dim + j]; }
};

struct EqualityMultiplier {
  std::int32_t group = 0;
  std::int32_t constraint = 0;
  Polynomial multiplier;
};

struct MomentBoundMultiplier {
  std::int32_t bound = 0;
  double lambda = 0.0;
};

struct LinkingMultiplier {
  Monomial alpha;
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
};

// Multiplier on a constraint whose restriction is a violated constant.
struct MarkerMultiplier {
  std::int32_t group = 0;
  std::int32_t constraint = 0;
  bool equality = false;
  double value = 0.0;  // lambda >= 0 for inequalities, free for equalities
};

// Dual refutation: sigma_0 + sum sigma_j g_j + sum u_k h_k +
// sum lambda_l (gamma_l - p_l) (+ data-row terms) expands, modulo Boolean
// index reduction, to the negative constant -constant.
struct RefutationCertificate {
  std::uint32_t degree = 0;
  double constant = 0.0;
  std::vector<GramBlock> grams;
  std::vector<EqualityMultiplier> eq_multipliers;
  std::vector<MomentBoundMultiplier> bound_multipliers;
  std::vector<LinkingMultiplier> linking;
  std::vector<MarkerMultiplier> markers;
};

struct VerifyReport {
  bool valid = false;
  double constant = 0.0;        // -r0 from the expansion
  double residual_norm = 0.0;   // naive norm of the nonconstant remainder
  double min_gram_eig = 0.0;    // most negative scaled Gram eigenvalue
  double certificate_norm = 0.0;
  std::string failure;
};

namespace detail {

// Formal sum over (group, monomial); monomial 1 is groupless.
class TaggedPoly {
public:
  void add(std::int32_t group, const Monomial& m, double c) {
    if (c == 0.0) return;
    std::pair<std::int32_t, Monomial> key{m.is_one() ? -1 : group, m};
    auto [it, fresh] = terms_.try_emplace(key, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  void add_poly(std::int32_t group, const Polynomial& p, double scale = 1.0) {
    for (const auto& [m, c] : p.terms()) add(group, m, c * scale);
  }

  double constant() const {
    auto it = terms_.find({-1, Monomial{}});
    return it == terms_.end() ? 0.0 : it->second;
  }

  // Worst-case bounds of the nonconstant part over the variable box.
  Interval nonconstant_bounds(const VariableSet& vars) const {
    Interval acc{0.0, 0.0};
    for (const auto& [key, c] : terms_) {
      if (key.first == -1) continue;
      Interval b = monomial_bounds(key.second, vars);
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

private:
  std::map<std::pair<std::int32_t, Monomial>, double> terms_;
};

// sigma(x) = v^T Y v over the basis, Boolean-reduced.
inline Polynomial gram_polynomial(const GramBlock& g, const std::vector<Monomial>& basis,
                                  const VariableSet& vars) {
  Polynomial out;
  for (std::size_t a = 0; a < g.dim; ++a)
    for (std::size_t b = 0; b < g.dim; ++b) {
      double c = g.at(a, b);
      if (c != 0.0) out.add_term(reduce(basis[a] * basis[b], vars), c);
    }
  return out;
}

inline double min_eigenvalue(const GramBlock& g) {
  if (g.dim == 1) return g.entries[0];
  Eigen::MatrixXd m(g.dim, g.dim);
  for (std::size_t i = 0; i < g.dim; ++i)
    for (std::size_t j = 0; j < g.dim; ++j) m(i, j) = g.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double gram_trace(const GramBlock& g) {
  double t = 0.0;
  for (std::size_t i = 0; i < g.dim; ++i) t += g.at(i, i);
  return t;
}

}  // namespace detail

// Expands the certificate against the given block groups, moment bounds and
// linking rows; checks Gram positivity, multiplier signs and that the formal
// expansion collapses to a negative constant. Pure polynomial arithmetic over
// the reduced monomials; independent of the solver.
inline VerifyReport verify_certificate_expansion(
    const RefutationCertificate& cert, const VariableSet& vars,
    const std::vector<BlockGroup>& groups, const std::vector<MomentBound>& moment_bounds,
    const std::vector<LinkingRow>& linking_rows, double tol_cert) {
  VerifyReport rep;
  detail::TaggedPoly expansion;
  double cert_norm = 0.0;
  double min_scaled_eig = 0.0;

  auto group_of = [&](std::int32_t g) -> const BlockGroup& {
    if (g < 0 || static_cast<std::size_t>(g) >= groups.size())
      throw domain_error("certificate references unknown block group");
    return groups[static_cast<std::size_t>(g)];
  };

  for (const GramBlock& g : cert.grams) {
    const BlockGroup& grp = group_of(g.group);
    std::uint32_t bdeg;
    Polynomial constraint_poly(1.0);
    if (g.constraint < 0) {
      bdeg = grp.index.degree() / 2;
    } else {
      if (static_cast<std::size_t>(g.constraint) >= grp.ineqs.size())
        throw domain_error("certificate references unknown inequality");
      const RestrictedConstraint& rc = grp.ineqs[static_cast<std::size_t>(g.constraint)];
      if (rc.constant) throw domain_error("Gram attached to a constant restriction");
      constraint_poly = rc.poly;
      bdeg = detail::localizing_basis_degree({rc.poly, rc.tag}, grp.index.degree());
    }
    std::size_t bn = grp.index.prefix_size(bdeg);
    if (g.dim != bn) throw domain_error("Gram dimension does not match basis");
    if (g.entries.size() != g.dim * g.dim)
      throw domain_error("Gram entry count does not match dimension");

    double scale = std::max(1.0, std::abs(detail::gram_trace(g)));
    min_scaled_eig = std::min(min_scaled_eig, detail::min_eigenvalue(g) / scale);

    std::vector<Monomial> basis(grp.index.monomials().begin(),
                                grp.index.monomials().begin() + bn);
    Polynomial sigma = detail::gram_polynomial(g, basis, vars);
    Polynomial contrib = reduce(sigma * constraint_poly, vars);
    expansion.add_poly(g.group, contrib);
    cert_norm += naive_norm(contrib, vars);
  }

  for (const EqualityMultiplier& em : cert.eq_multipliers) {
    const BlockGroup& grp = group_of(em.group);
    if (static_cast<std::size_t>(em.constraint) >= grp.eqs.size())
      throw domain_error("certificate references unknown equality");
    const RestrictedConstraint& rc = grp.eqs[static_cast<std::size_t>(em.constraint)];
    if (rc.constant) throw domain_error("multiplier attached to a constant equality");
    Polynomial contrib = reduce(em.multiplier * rc.poly, vars);
    expansion.add_poly(em.group, contrib);
    cert_norm += naive_norm(contrib, vars);
  }

  double min_lambda = 0.0;
  for (const MomentBoundMultiplier& bm : cert.bound_multipliers) {
    if (static_cast<std::size_t>(bm.bound) >= moment_bounds.size())
      throw domain_error("certificate references unknown moment bound");
    min_lambda = std::min(min_lambda, bm.lambda);
    const MomentBound& mb = moment_bounds[static_cast<std::size_t>(bm.bound)];
    Polynomial term = (mb.dir == BoundDir::LessEq)
                          ? Polynomial(mb.gamma) - mb.poly
                          : mb.poly - Polynomial(mb.gamma);
    Polynomial contrib = reduce(term, vars) * bm.lambda;
    expansion.add_poly(0, contrib);
    cert_norm += naive_norm(contrib, vars);
  }

  for (const MarkerMultiplier& mm : cert.markers) {
    const BlockGroup& grp = group_of(mm.group);
    const auto& list = mm.equality ? grp.eqs : grp.ineqs;
    if (static_cast<std::size_t>(mm.constraint) >= list.size())
      throw domain_error("certificate references unknown marker constraint");
    const RestrictedConstraint& rc = list[static_cast<std::size_t>(mm.constraint)];
    if (!rc.constant) throw domain_error("marker multiplier on a nonconstant restriction");
    if (!mm.equality) min_lambda = std::min(min_lambda, mm.value);
    expansion.add(-1, Monomial{}, mm.value * rc.value);
    cert_norm += std::abs(mm.value * rc.value);
  }

  for (const LinkingMultiplier& lm : cert.linking) {
    const LinkingRow* row = nullptr;
    for (const LinkingRow& r : linking_rows)
      if (r.alpha == lm.alpha) {
        row = &r;
        break;
      }
    if (!row) throw domain_error("certificate references unknown linking row");
    min_lambda = std::min(min_lambda, std::min(lm.lambda_lower, lm.lambda_upper));
    // lower: e(alpha) - F + r >= 0 ; upper: F - e(alpha) + r >= 0
    double net = lm.lambda_lower - lm.lambda_upper;
    expansion.add(0, row->alpha, net);
    double emp_norm = 0.0;
    for (const auto& [g, beta, coeff] : row->empirical) {
      expansion.add(g, beta, -net * coeff);
      emp_norm += std::abs(coeff) *
                  std::max(std::abs(monomial_bounds(beta, vars).lo),
                           std::abs(monomial_bounds(beta, vars).hi));
    }
    expansion.add(-1, Monomial{}, (lm.lambda_lower + lm.lambda_upper) * row->radius);
    Interval ab = monomial_bounds(row->alpha, vars);
    cert_norm += (std::abs(lm.lambda_lower) + std::abs(lm.lambda_upper)) *
                 (std::max(std::abs(ab.lo), std::abs(ab.hi)) + emp_norm + row->radius);
  }

  rep.constant = -expansion.constant();
  Interval rem = expansion.nonconstant_bounds(vars);
  rep.residual_norm = std::max(rem.hi, std::abs(rem.lo));
  rep.min_gram_eig = min_scaled_eig;
  rep.certificate_norm = cert_norm;

  double allowance = tol_cert * std::max(1.0, cert_norm);
  if (min_scaled_eig < -tol_cert) {
    rep.failure = "Gram block not positive semidefinite";
    return rep;
  }
  if (min_lambda < -tol_cert) {
    rep.failure = "negative inequality multiplier";
    return rep;
  }
  if (rep.constant < cert.constant - allowance) {
    rep.failure = "expansion constant exceeds -c";
    return rep;
  }
  if (rep.residual_norm > allowance) {
    rep.failure = "expansion does not collapse to a constant";
    return rep;
  }
  // worst case of the full expansion over the box must stay negative
  if (-rep.constant + rem.hi >= 0.0) {
    rep.failure = "expansion not negative over the variable box";
    return rep;
  }
  rep.valid = true;
  return rep;
}

// Verifier for certificates of plain (no-data) relaxations; reconstructs the
// degree-d structure from the constraint system.
inline VerifyReport verify_certificate_report(const RefutationCertificate& cert,
                                              const ConstraintSystem& sys,
                                              std::uint32_t d, double tol_cert = 1e-6) {
  std::vector<BlockGroup> groups;
  groups.push_back(make_global_group(sys, d));
  return verify_certificate_expansion(cert, sys.variables, groups, sys.moment_bounds,
                                      {}, tol_cert);
}

inline bool verify_certificate(const RefutationCertificate& cert,
                               const ConstraintSystem& sys, std::uint32_t d,
                               double tol_cert = 1e-6) {
  return verify_certificate_report(cert, sys, d, tol_cert).valid;
}

// Verifies against the program's own block structure (covers learned programs
// and bracketing probes, whose bound rows live on the program).
inline VerifyReport verify_certificate_program(const RefutationCertificate& cert,
                                               const SosProgram& prog,
                                               double tol_cert = 1e-6) {
  return verify_certificate_expansion(cert, prog.variables, prog.groups,
                                      prog.moment_bounds, prog.linking, tol_cert);
}

}  // namespace sospl
