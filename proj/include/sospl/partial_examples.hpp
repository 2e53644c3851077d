#pragma once

#include <fstream>
#include <random>
#include <sstream>

#include "sospl/bounds.hpp"

namespace sospl {

// Masked observation rows over a fixed variable schema.
struct PartialExampleSet {
  const VariableSet* schema = nullptr;
  std::vector<PartialAssignment> rows;
  std::string provenance;

  std::size_t size() const { return rows.size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  for (std::string& c : cells) {
    std::size_t a = c.find_first_not_of(" \t");
    std::size_t b = c.find_last_not_of(" \t");
    c = (a == std::string::npos) ? "" : c.substr(a, b - a + 1);
  }
  return cells;
}

}  // namespace detail

// CSV rows over declared variable names; '*' marks a missing value. Known
// Boolean cells populate the negation twin.
inline PartialExampleSet load_examples(std::istream& in, const VariableSet& schema,
                                       const std::string& origin = "<stream>") {
  PartialExampleSet set;
  set.schema = &schema;
  set.provenance = origin;
  std::string line;
  if (!std::getline(in, line)) throw parse_error("missing CSV header", 1, 1);
  std::vector<VariableId> columns;
  for (const std::string& name : detail::split_csv_line(line)) {
    if (!schema.has(name))
      throw parse_error("unknown column '" + name + "'", 1, 1);
    VariableId v = schema.find(name);
    if (schema.info(v).kind == VarKind::BooleanNegation)
      throw parse_error("column '" + name + "' names a negation literal", 1, 1);
    columns.push_back(v);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != columns.size())
      throw parse_error("row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(columns.size()),
                        lineno, 1);
    PartialAssignment rho;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c] == "*") continue;
      double value;
      try {
        value = std::stod(cells[c]);
      } catch (const std::exception&) {
        throw parse_error("bad cell '" + cells[c] + "'", lineno, static_cast<int>(c + 1));
      }
      try {
        rho.assign(schema, columns[c], value);
        if (schema.info(columns[c]).kind == VarKind::Boolean)
          rho.assign(schema, schema.partner(columns[c]), 1.0 - value);
      } catch (const domain_error& e) {
        throw parse_error(e.what(), lineno, static_cast<int>(c + 1));
      }
    }
    set.rows.push_back(std::move(rho));
  }
  if (set.rows.empty()) throw parse_error("no example rows", lineno, 1);
  return set;
}

inline PartialExampleSet load_examples(const std::string& path,
                                       const VariableSet& schema) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  return load_examples(in, schema, path);
}

// Fraction of rows under which every listed constraint p >= 0 is witnessed.
inline double witness_rate(const std::vector<Polynomial>& constraints,
                           const PartialExampleSet& examples) {
  if (examples.rows.empty()) return 1.0;
  std::size_t good = 0;
  for (const PartialAssignment& rho : examples.rows) {
    bool all = true;
    for (const Polynomial& p : constraints)
      if (!is_witnessed(p, *examples.schema, rho)) {
        all = false;
        break;
      }
    if (all) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(examples.rows.size());
}

// Ground-truth mixture of in-range points plus a masking rule; test support
// for the implicit-learning pipeline. The mask may inspect the drawn point.
struct MaskedSampler {
  struct Atom {
    PartialAssignment point;  // total on the schema's variables
    double weight = 1.0;
  };
  const VariableSet* schema = nullptr;
  std::vector<Atom> atoms;
  // returns the variables to hide for this draw
  std::function<std::vector<VariableId>(const PartialAssignment&, std::mt19937_64&)> mask;

  // exact mixture moment of a monomial under the ground truth
  double true_moment(const Monomial& m) const {
    double tot = 0.0, acc = 0.0;
    for (const Atom& a : atoms) {
      tot += a.weight;
      acc += a.weight * Polynomial::term(m, 1.0).evaluate(a.point);
    }
    return acc / tot;
  }
};

inline PartialExampleSet generate_masked(const MaskedSampler& sampler, std::size_t m,
                                         std::uint64_t seed) {
  if (sampler.atoms.empty()) throw domain_error("sampler has no atoms");
  std::mt19937_64 rng(seed);
  double total = 0.0;
  for (const auto& a : sampler.atoms) total += a.weight;
  std::uniform_real_distribution<double> unif(0.0, total);
  PartialExampleSet set;
  set.schema = sampler.schema;
  set.provenance = "masked-sampler seed=" + std::to_string(seed);
  for (std::size_t i = 0; i < m; ++i) {
    double pick = unif(rng);
    const MaskedSampler::Atom* chosen = &sampler.atoms.back();
    for (const auto& a : sampler.atoms) {
      if (pick < a.weight) {
        chosen = &a;
        break;
      }
      pick -= a.weight;
    }
    PartialAssignment row = chosen->point;
    if (sampler.mask) {
      PartialAssignment masked;
      std::vector<VariableId> hide = sampler.mask(chosen->point, rng);
      auto hidden = [&](VariableId v) {
        for (VariableId h : hide) {
          if (h == v) return true;
          // hiding a Boolean hides its twin
          if (sampler.schema->is_boolean_like(v) && sampler.schema->partner(v) == h)
            return true;
        }
        return false;
      };
      for (const auto& [v, val] : row.values())
        if (!hidden(v)) masked.assign(*sampler.schema, v, val);
      row = std::move(masked);
    }
    set.rows.push_back(std::move(row));
  }
  return set;
}

}  // namespace sospl
