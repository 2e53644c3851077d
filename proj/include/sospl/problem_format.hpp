#pragma once

#include "sospl/cnf.hpp"

namespace sospl {

struct ParsedProblem {
  ConstraintSystem system;
  std::vector<Query> queries;
};

namespace detail {

inline std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline bool consume_prefix(std::string& s, const std::string& prefix) {
  if (s.rfind(prefix, 0) != 0) return false;
  s = trimmed(s.substr(prefix.size()));
  return true;
}

inline double parse_number(const std::string& text, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (trimmed(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw parse_error("expected a number, got '" + text + "'", line, 1);
}

}  // namespace detail

// Line-oriented problem grammar:
//   var <name> : bool | var <name> : real [<L>, <B>]
//   support: <poly> >= 0 | support: <poly> = 0
//   clause: <lit> | <lit> | ...
//   moment: E[<poly>] <= <g> | moment: E[<poly>] >= <g>
//   query decide degree <d> | query bound E[<poly>] degree <d>
inline ParsedProblem parse_problem(std::istream& in) {
  ParsedProblem out;
  ConstraintSystem& sys = out.system;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trimmed(line);
    if (line.empty()) continue;

    if (detail::consume_prefix(line, "var ")) {
      auto colon = line.find(':');
      if (colon == std::string::npos)
        throw parse_error("expected ':' in var declaration", lineno, 1);
      std::string name = detail::trimmed(line.substr(0, colon));
      std::string kind = detail::trimmed(line.substr(colon + 1));
      try {
        if (kind == "bool") {
          sys.declare_boolean(name);
        } else if (detail::consume_prefix(kind, "real")) {
          if (kind.size() < 2 || kind.front() != '[' || kind.back() != ']')
            throw parse_error("expected real [<L>, <B>]", lineno, 1);
          std::string body = kind.substr(1, kind.size() - 2);
          auto comma = body.find(',');
          if (comma == std::string::npos)
            throw parse_error("expected two range endpoints", lineno, 1);
          double lo = detail::parse_number(detail::trimmed(body.substr(0, comma)), lineno);
          double hi = detail::parse_number(detail::trimmed(body.substr(comma + 1)), lineno);
          sys.declare_bounded(name, lo, hi);
        } else {
          throw parse_error("unknown variable kind '" + kind + "'", lineno, 1);
        }
      } catch (const domain_error& e) {
        throw parse_error(e.what(), lineno, 1);
      }
    } else if (detail::consume_prefix(line, "support:")) {
      bool inequality;
      std::string poly_text;
      if (auto ge = line.rfind(">="); ge != std::string::npos) {
        inequality = true;
        poly_text = detail::trimmed(line.substr(0, ge));
        if (detail::trimmed(line.substr(ge + 2)) != "0")
          throw parse_error("support inequalities end in '>= 0'", lineno, 1);
      } else if (auto eq = line.rfind('='); eq != std::string::npos) {
        inequality = false;
        poly_text = detail::trimmed(line.substr(0, eq));
        if (detail::trimmed(line.substr(eq + 1)) != "0")
          throw parse_error("support equalities end in '= 0'", lineno, 1);
      } else {
        throw parse_error("support line needs '>= 0' or '= 0'", lineno, 1);
      }
      Polynomial p = parse_polynomial(poly_text, sys.variables, lineno);
      if (inequality)
        sys.add_support_inequality(std::move(p));
      else
        sys.add_support_equality(std::move(p));
    } else if (detail::consume_prefix(line, "clause:")) {
      Clause c;
      std::istringstream ls(line);
      std::string tok;
      while (std::getline(ls, tok, '|')) {
        tok = detail::trimmed(tok);
        if (tok.empty()) throw parse_error("empty literal in clause", lineno, 1);
        bool positive = true;
        if (tok[0] == '~') {
          positive = false;
          tok = detail::trimmed(tok.substr(1));
        }
        if (!sys.variables.has(tok))
          throw parse_error("undeclared variable '" + tok + "'", lineno, 1);
        VariableId v = sys.variables.find(tok);
        if (sys.variables.info(v).kind != VarKind::Boolean)
          throw parse_error("clause literal '" + tok + "' is not Boolean", lineno, 1);
        c.literals.push_back({v, positive});
      }
      try {
        sys.add_clause(c);
      } catch (const domain_error& e) {
        throw parse_error(e.what(), lineno, 1);
      }
    } else if (detail::consume_prefix(line, "moment:")) {
      auto open = line.find("E[");
      auto close = line.find(']', open == std::string::npos ? 0 : open);
      if (open == std::string::npos || close == std::string::npos)
        throw parse_error("moment line needs E[<poly>]", lineno, 1);
      Polynomial p =
          parse_polynomial(line.substr(open + 2, close - open - 2), sys.variables, lineno);
      std::string rest = detail::trimmed(line.substr(close + 1));
      BoundDir dir;
      if (detail::consume_prefix(rest, "<="))
        dir = BoundDir::LessEq;
      else if (detail::consume_prefix(rest, ">="))
        dir = BoundDir::GreaterEq;
      else
        throw parse_error("moment line needs '<=' or '>='", lineno, 1);
      sys.add_moment_bound(std::move(p), dir, detail::parse_number(rest, lineno));
    } else if (detail::consume_prefix(line, "query")) {
      Query q;
      if (detail::consume_prefix(line, "decide")) {
        q.kind = Query::Kind::Decide;
      } else if (detail::consume_prefix(line, "bound")) {
        q.kind = Query::Kind::Bound;
        auto open = line.find("E[");
        auto close = line.find(']', open == std::string::npos ? 0 : open);
        if (open == std::string::npos || close == std::string::npos)
          throw parse_error("bound query needs E[<poly>]", lineno, 1);
        q.bound_poly =
            parse_polynomial(line.substr(open + 2, close - open - 2), sys.variables, lineno);
        line = detail::trimmed(line.substr(close + 1));
      } else {
        throw parse_error("unknown query kind", lineno, 1);
      }
      if (!detail::consume_prefix(line, "degree"))
        throw parse_error("query needs 'degree <d>'", lineno, 1);
      double d = detail::parse_number(line, lineno);
      if (d < 1 || d != std::floor(d))
        throw parse_error("query degree must be a positive integer", lineno, 1);
      q.degree = static_cast<std::uint32_t>(d);
      out.queries.push_back(std::move(q));
    } else {
      throw parse_error("unrecognized directive", lineno, 1);
    }
  }
  return out;
}

inline ParsedProblem parse_problem(const std::string& text) {
  std::istringstream in(text);
  return parse_problem(in);
}

inline ParsedProblem parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  return parse_problem(in);
}

// Canonical text for the user-visible content; axioms are regenerated on
// parse, so only declarations, user constraints and queries are written.
inline std::string serialize_problem(const ParsedProblem& prob) {
  std::ostringstream out;
  const VariableSet& vars = prob.system.variables;
  for (VariableId v : vars.all_ids()) {
    const VariableInfo& info = vars.info(v);
    if (info.kind == VarKind::Boolean)
      out << "var " << info.name << " : bool\n";
    else if (info.kind == VarKind::BoundedReal)
      out << "var " << info.name << " : real [" << format_double(info.lo) << ", "
          << format_double(info.hi) << "]\n";
  }
  for (const SupportConstraint& g : prob.system.inequalities)
    if (!is_axiom(g.tag)) out << "support: " << to_string(g.poly, vars) << " >= 0\n";
  for (const SupportConstraint& h : prob.system.equalities)
    if (!is_axiom(h.tag)) out << "support: " << to_string(h.poly, vars) << " = 0\n";
  for (const MomentBound& mb : prob.system.moment_bounds)
    out << "moment: E[" << to_string(mb.poly, vars) << "] "
        << (mb.dir == BoundDir::LessEq ? "<=" : ">=") << " " << format_double(mb.gamma)
        << "\n";
  for (const Query& q : prob.queries) {
    if (q.kind == Query::Kind::Decide)
      out << "query decide degree " << q.degree << "\n";
    else if (q.kind == Query::Kind::Bound)
      out << "query bound E[" << to_string(q.bound_poly, vars) << "] degree "
          << q.degree << "\n";
  }
  return out.str();
}

}  // namespace sospl
