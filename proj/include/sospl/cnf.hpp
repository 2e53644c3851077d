#pragma once

#include <memory>

#include "sospl/query.hpp"

namespace sospl {

// Clause set over variables 1..n; literals in DIMACS sign convention.
struct CnfFormula {
  int n = 0;
  std::vector<std::vector<int>> clauses;

  void validate() const {
    for (const auto& cl : clauses) {
      for (std::size_t i = 0; i < cl.size(); ++i) {
        int lit = cl[i];
        if (lit == 0 || std::abs(lit) > n)
          throw domain_error("literal " + std::to_string(lit) + " out of range");
        for (std::size_t j = i + 1; j < cl.size(); ++j)
          if (cl[i] == cl[j]) throw domain_error("duplicate literal in clause");
      }
    }
  }
};

// -1 unassigned, else 0/1
using CnfAssignment = std::vector<std::int8_t>;

inline CnfAssignment empty_assignment(const CnfFormula& f) {
  return CnfAssignment(static_cast<std::size_t>(f.n) + 1, -1);
}

struct UnitStep {
  int literal;
  int clause;
};

struct UnitPropResult {
  enum class Status : std::uint8_t { Conflict, Extended, Fixpoint } status =
      Status::Fixpoint;
  CnfAssignment assignment;
  std::vector<UnitStep> steps;
  int conflict_clause = -1;
};

// Repeatedly asserts the satisfying value of any clause that restricts to a
// single literal; Conflict on an empty restricted clause. Rescans from the
// first clause after every inference.
inline UnitPropResult unit_propagate(const CnfFormula& f, CnfAssignment rho) {
  UnitPropResult res;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t ci = 0; ci < f.clauses.size(); ++ci) {
      int unassigned = 0, last = 0;
      bool satisfied = false;
      for (int lit : f.clauses[ci]) {
        int var = std::abs(lit);
        std::int8_t val = rho[static_cast<std::size_t>(var)];
        if (val < 0) {
          ++unassigned;
          last = lit;
        } else if ((val == 1) == (lit > 0)) {
          satisfied = true;
          break;
        }
      }
      if (satisfied) continue;
      if (unassigned == 0) {
        res.status = UnitPropResult::Status::Conflict;
        res.conflict_clause = static_cast<int>(ci);
        res.assignment = std::move(rho);
        return res;
      }
      if (unassigned == 1) {
        rho[static_cast<std::size_t>(std::abs(last))] = last > 0 ? 1 : 0;
        res.steps.push_back({last, static_cast<int>(ci)});
        progressed = true;
        break;  // rescan from the lowest clause index
      }
    }
  }
  res.status = res.steps.empty() ? UnitPropResult::Status::Fixpoint
                                 : UnitPropResult::Status::Extended;
  res.assignment = std::move(rho);
  return res;
}

// Tree of failed-literal assumptions with interleaved unit propagation.
struct TraceNode {
  struct Event {
    int literal = 0;                       // inferred literal
    int clause = -1;                       // justifying clause for unit steps
    std::unique_ptr<TraceNode> subproof;   // set for failed-literal steps
  };
  int level = 0;
  int assumption = 0;  // literal assumed to start this subproof, 0 at root
  std::vector<Event> events;
  int conflict_clause = -1;
};

struct RefutationTrace {
  int level = 0;
  std::unique_ptr<TraceNode> root;
};

struct LevelRefuteResult {
  bool refuted = false;
  RefutationTrace trace;
};

namespace detail {

inline std::string assignment_key(const CnfAssignment& rho) {
  std::string key(rho.size(), '?');
  for (std::size_t i = 0; i < rho.size(); ++i)
    key[i] = rho[i] < 0 ? '*' : static_cast<char>('0' + rho[i]);
  return key;
}

using FailMemo = std::map<std::pair<std::string, int>, bool>;

// Refute rho within s levels of the failed-literal rule; level 0 is unit
// propagation. Ascending variable order, positive polarity first, restart
// from the lowest index after each inferred literal.
inline bool level_refute(const CnfFormula& f, const CnfAssignment& rho, int s,
                         FailMemo& memo, std::unique_ptr<TraceNode>& proof,
                         int assumption) {
  UnitPropResult up = unit_propagate(f, rho);
  auto node = std::make_unique<TraceNode>();
  node->level = s;
  node->assumption = assumption;
  for (const UnitStep& st : up.steps) node->events.push_back({st.literal, st.clause, nullptr});
  if (up.status == UnitPropResult::Status::Conflict) {
    node->level = 0;
    node->conflict_clause = up.conflict_clause;
    proof = std::move(node);
    return true;
  }
  if (s == 0) return false;

  std::string key = assignment_key(up.assignment);
  auto it = memo.find({key, s});
  if (it != memo.end() && !it->second) return false;

  CnfAssignment cur = up.assignment;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (int var = 1; var <= f.n && !progressed; ++var) {
      if (cur[static_cast<std::size_t>(var)] >= 0) continue;
      for (int polarity = 1; polarity >= 0 && !progressed; --polarity) {
        int lit = polarity ? var : -var;
        CnfAssignment test = cur;
        test[static_cast<std::size_t>(var)] = polarity ? 1 : 0;
        std::unique_ptr<TraceNode> sub;
        if (level_refute(f, test, s - 1, memo, sub, lit)) {
          cur[static_cast<std::size_t>(var)] = polarity ? 0 : 1;
          node->events.push_back({-lit, -1, std::move(sub)});
          UnitPropResult up2 = unit_propagate(f, cur);
          for (const UnitStep& st : up2.steps)
            node->events.push_back({st.literal, st.clause, nullptr});
          if (up2.status == UnitPropResult::Status::Conflict) {
            node->conflict_clause = up2.conflict_clause;
            proof = std::move(node);
            return true;
          }
          cur = up2.assignment;
          progressed = true;
        }
      }
    }
  }
  memo[{key, s}] = false;
  return false;
}

}  // namespace detail

// s = 0 is unit propagation from the empty assignment; each further level may
// assert literals whose opposite assumption admits a level-(s-1) refutation.
inline LevelRefuteResult level_s_refute(const CnfFormula& f, int s) {
  if (s < 0) throw domain_error("refutation level must be >= 0");
  f.validate();
  LevelRefuteResult res;
  detail::FailMemo memo;
  // lower levels subsume into higher ones; report the smallest that works
  for (int level = 0; level <= s; ++level) {
    std::unique_ptr<TraceNode> proof;
    if (detail::level_refute(f, empty_assignment(f), level, memo, proof, 0)) {
      res.refuted = true;
      res.trace.level = level;
      res.trace.root = std::move(proof);
      return res;
    }
  }
  return res;
}

inline void render_trace(const TraceNode& node, std::ostream& out, int indent = 0) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.assumption != 0)
    out << pad << "assume " << node.assumption << " (level " << node.level << ")\n";
  for (const TraceNode::Event& ev : node.events) {
    if (ev.subproof) {
      out << pad << "failed literal: infer " << ev.literal << "\n";
      render_trace(*ev.subproof, out, indent + 1);
    } else {
      out << pad << "unit " << ev.literal << " from clause " << (ev.clause + 1) << "\n";
    }
  }
  if (node.conflict_clause >= 0)
    out << pad << "conflict at clause " << (node.conflict_clause + 1) << "\n";
}

// DIMACS CNF reader: 'c' comments, 'p cnf <n> <m>' header, 0-terminated
// clauses possibly spanning lines.
inline CnfFormula parse_dimacs(std::istream& in) {
  CnfFormula f;
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<int> current;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, kind;
      int m = 0;
      if (!(ls >> p >> kind >> f.n >> m) || kind != "cnf")
        throw parse_error("malformed DIMACS header", lineno, 1);
      header = true;
      continue;
    }
    if (!header) throw parse_error("clause before DIMACS header", lineno, 1);
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        f.clauses.push_back(current);
        current.clear();
      } else {
        current.push_back(lit);
      }
    }
  }
  if (!current.empty()) f.clauses.push_back(current);
  if (!header) throw parse_error("missing DIMACS header", lineno ? lineno : 1, 1);
  f.validate();
  return f;
}

inline CnfFormula parse_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  return parse_dimacs(in);
}

// Clause system over Boolean pairs x1..xn with the linear encoding.
inline ConstraintSystem cnf_to_system(const CnfFormula& f) {
  ConstraintSystem sys;
  std::vector<VariableId> vars;
  for (int i = 1; i <= f.n; ++i)
    vars.push_back(sys.declare_boolean("x" + std::to_string(i)).first);
  for (const auto& cl : f.clauses) {
    Clause c;
    for (int lit : cl)
      c.literals.push_back({vars[static_cast<std::size_t>(std::abs(lit) - 1)], lit > 0});
    sys.add_clause(c);
  }
  return sys;
}

struct CrosscheckReport {
  bool refuted = false;
  int level = 0;
  RefutationTrace trace;
  SolverOutcome sos;
  std::uint32_t degree = 0;
  int escalations = 0;
  bool agree = false;
  double oracle_seconds = 0.0;
};

// Runs the failed-literal oracle at level s and the degree-(s+1) relaxation
// side by side; Indeterminate solver outcomes escalate the iteration budget.
inline CrosscheckReport crosscheck_sos(const CnfFormula& f, int s,
                                       const SolverConfig& cfg = {}) {
  CrosscheckReport rep;
  auto t0 = std::chrono::steady_clock::now();
  LevelRefuteResult oracle = level_s_refute(f, s);
  rep.oracle_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.refuted = oracle.refuted;
  rep.level = oracle.refuted ? oracle.trace.level : s;
  rep.trace = std::move(oracle.trace);
  rep.degree = static_cast<std::uint32_t>(s + 1);

  ConstraintSystem sys = cnf_to_system(f);
  SosProgram prog = build_program(sys, rep.degree);
  SolverConfig run_cfg = cfg;
  rep.sos = solve(prog, run_cfg);
  while (rep.sos.indeterminate() && rep.escalations < 3) {
    run_cfg.max_iter *= 4;
    ++rep.escalations;
    rep.sos = solve(prog, run_cfg);
  }
  rep.agree = !rep.refuted || rep.sos.infeasible();
  return rep;
}

}  // namespace sospl
