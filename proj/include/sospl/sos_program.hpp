#pragma once

#include "sospl/moment_index.hpp"

namespace sospl {

struct LinTerm {
  std::size_t var;
  double coeff;

  friend bool operator==(const LinTerm& a, const LinTerm& b) {
    return a.var == b.var && a.coeff == b.coeff;
  }
};

// Sparse linear form over moment variables, sorted by variable, combined.
using LinForm = std::vector<LinTerm>;

inline void lin_add(LinForm& f, std::size_t var, double coeff) {
  if (coeff == 0.0) return;
  auto it = std::lower_bound(f.begin(), f.end(), var,
                             [](const LinTerm& t, std::size_t v) { return t.var < v; });
  if (it != f.end() && it->var == var) {
    it->coeff += coeff;
    if (it->coeff == 0.0) f.erase(it);
  } else {
    f.insert(it, LinTerm{var, coeff});
  }
}

enum class BlockKind : std::uint8_t { Moment, Localizing };

struct PsdCell {
  std::uint32_t row;
  std::uint32_t col;  // row <= col; off-diagonal cells stand for both mirror entries
  LinForm form;
};

struct PsdBlock {
  BlockKind kind = BlockKind::Moment;
  std::int32_t group = 0;
  std::int32_t constraint = -1;  // localizing: index into the group's inequality list
  std::vector<Monomial> basis;
  std::vector<PsdCell> cells;

  std::size_t dim() const { return basis.size(); }
};

enum class RowKind : std::uint8_t { Equality, GreaterEq };

enum class RowOrigin : std::uint8_t {
  Normalization,       // e_g(1) = 1
  EqualityConstraint,  // h_k * monomial
  MomentBound,         // gamma row for E[p]
  LinkingLower,        // empirical mean - radius <= e(x^alpha)
  LinkingUpper,        // e(x^alpha) <= empirical mean + radius
  IneqMarker,          // inequality restricted to a negative constant
  EqMarker             // equality restricted to a nonzero constant
};

struct AffineRow {
  RowKind kind = RowKind::Equality;
  LinForm form;
  double rhs = 0.0;
  RowOrigin origin = RowOrigin::Normalization;
  std::int32_t group = 0;
  std::int32_t constraint = -1;  // equality / inequality / moment-bound index
  Monomial mono;                 // equality multiplier monomial, or linking alpha
};

// A support constraint after restriction by a group's partial assignment.
// Satisfied constant restrictions are dropped; violated ones become marker
// rows that make the group's subprogram infeasible.
struct RestrictedConstraint {
  Polynomial poly;
  ConstraintTag tag = ConstraintTag::User;
  bool constant = false;
  double value = 0.0;
  bool dropped = false;

  static RestrictedConstraint of(Polynomial p, ConstraintTag tag, bool inequality) {
    RestrictedConstraint rc;
    rc.tag = tag;
    rc.constant = (p.degree() == 0);
    if (rc.constant) {
      rc.value = p.constant_term();
      rc.dropped = inequality ? rc.value >= 0.0 : rc.value == 0.0;
    }
    rc.poly = std::move(p);
    return rc;
  }
};

// One block group: the global pseudo-expectation (group 0) or a per-example
// restriction. Constraint lists stay index-aligned with the effective global
// lists so certificates can reference them uniformly.
struct BlockGroup {
  PartialAssignment pattern;
  double weight = 1.0;  // number of examples sharing this restriction
  MomentIndex index;
  std::vector<RestrictedConstraint> ineqs;
  std::vector<RestrictedConstraint> eqs;
};

struct EffectiveConstraints {
  std::vector<SupportConstraint> ineqs;
  std::vector<SupportConstraint> eqs;
};

// Data-linking row descriptor: empirical mean form +/- radius on e(x^alpha).
struct LinkingRow {
  Monomial alpha;
  double radius = 0.0;
  // (group, residual monomial, coefficient) triples of the empirical mean
  std::vector<std::tuple<std::int32_t, Monomial, double>> empirical;
};

// Block-structured semidefinite feasibility program over moment variables.
struct SosProgram {
  std::uint32_t degree = 0;
  VariableSet variables;
  std::vector<BlockGroup> groups;
  std::vector<std::pair<std::int32_t, Monomial>> vars;  // (group, reduced monomial)
  std::vector<std::unordered_map<Monomial, std::size_t, MonomialHash>> var_pos;
  std::vector<PsdBlock> blocks;
  std::vector<AffineRow> rows;
  std::vector<MomentBound> moment_bounds;  // verification context for bound rows
  std::vector<LinkingRow> linking;         // verification context for data rows
  std::size_t example_count = 0;           // m, when built from partial examples

  bool has_objective = false;
  bool maximize = true;
  LinForm objective;
  Polynomial objective_poly;

  std::size_t var_count() const { return vars.size(); }

  std::size_t var_index(std::int32_t group, const Monomial& reduced) const {
    const auto& pos = var_pos.at(static_cast<std::size_t>(group));
    auto it = pos.find(reduced);
    if (it == pos.end()) throw domain_error("moment variable not indexed");
    return it->second;
  }

  // Linear form of a reduced polynomial over one group's moment variables.
  LinForm form_of(std::int32_t group, const Polynomial& reduced) const {
    LinForm f;
    for (const auto& [m, c] : reduced.terms()) lin_add(f, var_index(group, m), c);
    return f;
  }
};

// Constraints that participate at degree d: axioms outside the degree budget
// are dropped, user content outside it is an error, Boolean axioms vanish
// under index reduction, and monomial bounding inequalities are appended.
inline EffectiveConstraints effective_constraints(const ConstraintSystem& sys,
                                                  std::uint32_t d) {
  EffectiveConstraints out;
  for (const SupportConstraint& g : sys.inequalities) {
    if (g.poly.degree() > d) {
      if (is_axiom(g.tag)) continue;
      throw domain_error("support inequality of degree " +
                         std::to_string(g.poly.degree()) + " exceeds relaxation degree " +
                         std::to_string(d));
    }
    out.ineqs.push_back(g);
  }
  for (const SupportConstraint& h : sys.equalities) {
    if (reduce(h.poly, sys.variables).is_zero()) continue;
    if (h.poly.degree() > d) {
      if (is_axiom(h.tag)) continue;
      throw domain_error("support equality of degree " +
                         std::to_string(h.poly.degree()) + " exceeds relaxation degree " +
                         std::to_string(d));
    }
    out.eqs.push_back(h);
  }
  for (SupportConstraint& b : generate_bounding_inequalities(sys, d))
    out.ineqs.push_back(std::move(b));
  return out;
}

namespace detail {

// Bounding rows carry no products; a degree-0 basis keeps them as plain
// interval rows on the monomial variables.
inline std::uint32_t localizing_basis_degree(const SupportConstraint& g,
                                             std::uint32_t d) {
  if (g.tag == ConstraintTag::BoundingAxiom) return 0;
  return (d - g.poly.degree()) / 2;
}

inline void append_group_structure(SosProgram& prog, std::int32_t gid,
                                   const VariableSet& vars) {
  BlockGroup& grp = prog.groups[static_cast<std::size_t>(gid)];
  const MomentIndex& index = grp.index;

  // moment matrix over monomials of degree <= d/2
  PsdBlock moment;
  moment.kind = BlockKind::Moment;
  moment.group = gid;
  std::size_t half = index.prefix_size(prog.degree / 2);
  moment.basis.assign(index.monomials().begin(), index.monomials().begin() + half);
  for (std::uint32_t a = 0; a < half; ++a)
    for (std::uint32_t b = a; b < half; ++b) {
      Monomial prod = reduce(moment.basis[a] * moment.basis[b], vars);
      LinForm f;
      lin_add(f, prog.var_index(gid, prod), 1.0);
      moment.cells.push_back({a, b, std::move(f)});
    }
  prog.blocks.push_back(std::move(moment));

  // localizing matrix per inequality; violated constant restrictions become
  // marker rows 0 >= -value
  for (std::size_t j = 0; j < grp.ineqs.size(); ++j) {
    const RestrictedConstraint& g = grp.ineqs[j];
    if (g.dropped) continue;
    if (g.constant) {
      AffineRow row;
      row.kind = RowKind::GreaterEq;
      row.rhs = -g.value;
      row.origin = RowOrigin::IneqMarker;
      row.group = gid;
      row.constraint = static_cast<std::int32_t>(j);
      prog.rows.push_back(std::move(row));
      continue;
    }
    std::uint32_t bdeg = localizing_basis_degree({g.poly, g.tag}, prog.degree);
    std::size_t bn = index.prefix_size(bdeg);
    PsdBlock blk;
    blk.kind = BlockKind::Localizing;
    blk.group = gid;
    blk.constraint = static_cast<std::int32_t>(j);
    blk.basis.assign(index.monomials().begin(), index.monomials().begin() + bn);
    for (std::uint32_t a = 0; a < bn; ++a)
      for (std::uint32_t b = a; b < bn; ++b) {
        Monomial ab = blk.basis[a] * blk.basis[b];
        LinForm f;
        for (const auto& [gamma, coeff] : g.poly.terms())
          lin_add(f, prog.var_index(gid, reduce(ab * gamma, vars)), coeff);
        blk.cells.push_back({a, b, std::move(f)});
      }
    prog.blocks.push_back(std::move(blk));
  }

  // equality rows h * monomial for monomials of degree <= d - deg h
  std::unordered_map<std::size_t, std::vector<LinForm>> seen;
  auto form_hash = [](const LinForm& f) {
    std::size_t h = f.size();
    for (const LinTerm& t : f) {
      h ^= t.var + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h ^= std::hash<double>{}(t.coeff) + (h << 5);
    }
    return h;
  };
  for (std::size_t k = 0; k < grp.eqs.size(); ++k) {
    const RestrictedConstraint& h = grp.eqs[k];
    if (h.dropped) continue;
    if (h.constant) {
      AffineRow row;
      row.kind = RowKind::Equality;
      row.rhs = h.value;
      row.origin = RowOrigin::EqMarker;
      row.group = gid;
      row.constraint = static_cast<std::int32_t>(k);
      prog.rows.push_back(std::move(row));
      continue;
    }
    std::uint32_t hdeg = h.poly.degree();
    if (hdeg > prog.degree) continue;
    std::size_t mn = index.prefix_size(prog.degree - hdeg);
    for (std::size_t mi = 0; mi < mn; ++mi) {
      const Monomial& m = index.at(mi);
      LinForm f;
      for (const auto& [gamma, coeff] : h.poly.terms())
        lin_add(f, prog.var_index(gid, reduce(m * gamma, vars)), coeff);
      if (f.empty()) continue;
      auto& bucket = seen[form_hash(f)];
      bool dup = std::find(bucket.begin(), bucket.end(), f) != bucket.end();
      if (!dup) {
        bucket.push_back(f);
        AffineRow row;
        row.kind = RowKind::Equality;
        row.form = std::move(f);
        row.rhs = 0.0;
        row.origin = RowOrigin::EqualityConstraint;
        row.group = gid;
        row.constraint = static_cast<std::int32_t>(k);
        row.mono = m;
        prog.rows.push_back(std::move(row));
      }
    }
  }

  // e_g(1) = 1
  AffineRow norm;
  norm.kind = RowKind::Equality;
  lin_add(norm.form, prog.var_index(gid, Monomial{}), 1.0);
  norm.rhs = 1.0;
  norm.origin = RowOrigin::Normalization;
  norm.group = gid;
  prog.rows.push_back(std::move(norm));
}

inline void register_group_vars(SosProgram& prog, std::int32_t gid) {
  const MomentIndex& index = prog.groups[static_cast<std::size_t>(gid)].index;
  auto& pos = prog.var_pos.emplace_back();
  pos.reserve(index.size() * 2);
  for (const Monomial& m : index.monomials()) {
    pos[m] = prog.vars.size();
    prog.vars.push_back({gid, m});
  }
}

}  // namespace detail

inline void add_moment_bound_row(SosProgram& prog, const MomentBound& mb);

// Global block group: the effective constraints at degree d, unrestricted.
inline BlockGroup make_global_group(const ConstraintSystem& sys, std::uint32_t d,
                                    std::size_t index_cap = MomentIndex::kDefaultCap) {
  EffectiveConstraints eff = effective_constraints(sys, d);
  BlockGroup global;
  global.pattern = {};
  global.weight = 1.0;
  global.index = MomentIndex(sys.variables, d, index_cap);
  for (SupportConstraint& g : eff.ineqs)
    global.ineqs.push_back(RestrictedConstraint::of(std::move(g.poly), g.tag, true));
  for (SupportConstraint& h : eff.eqs)
    global.eqs.push_back(RestrictedConstraint::of(std::move(h.poly), h.tag, false));
  return global;
}

// Degree-d relaxation: moment matrix, localizing matrices, equality rows,
// e(1) = 1, and one slack row per moment bound.
inline SosProgram build_program(const ConstraintSystem& sys, std::uint32_t d,
                                std::size_t index_cap = MomentIndex::kDefaultCap) {
  if (d < 1) throw domain_error("relaxation degree must be >= 1");
  SosProgram prog;
  prog.degree = d;
  prog.variables = sys.variables;
  prog.groups.push_back(make_global_group(sys, d, index_cap));
  detail::register_group_vars(prog, 0);
  detail::append_group_structure(prog, 0, sys.variables);

  for (const MomentBound& mb : sys.moment_bounds) add_moment_bound_row(prog, mb);
  return prog;
}

// Appends one slack row for E[p] <= gamma (or >=) and records the bound in the
// program's verification context. Used for query bracketing probes.
inline void add_moment_bound_row(SosProgram& prog, const MomentBound& mb) {
  Polynomial p = reduce(mb.poly, prog.variables);
  if (p.degree() > prog.degree)
    throw domain_error("moment bound polynomial degree exceeds relaxation degree");
  AffineRow row;
  row.kind = RowKind::GreaterEq;
  row.origin = RowOrigin::MomentBound;
  row.group = 0;
  row.constraint = static_cast<std::int32_t>(prog.moment_bounds.size());
  if (mb.dir == BoundDir::LessEq) {
    row.form = prog.form_of(0, -1.0 * p);
    row.rhs = -mb.gamma;
  } else {
    row.form = prog.form_of(0, p);
    row.rhs = mb.gamma;
  }
  prog.rows.push_back(std::move(row));
  prog.moment_bounds.push_back(mb);
}

enum class ObjectiveSense : std::uint8_t { Minimize, Maximize };

inline SosProgram attach_objective(SosProgram prog, const Polynomial& p,
                                   ObjectiveSense sense) {
  Polynomial red = reduce(p, prog.variables);
  if (red.degree() > prog.degree)
    throw domain_error("objective degree exceeds relaxation degree");
  prog.has_objective = true;
  prog.maximize = (sense == ObjectiveSense::Maximize);
  prog.objective_poly = red;
  prog.objective.clear();
  for (const auto& [m, c] : red.terms()) lin_add(prog.objective, prog.var_index(0, m), c);
  return prog;
}

}  // namespace sospl
