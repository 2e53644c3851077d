#pragma once

#include <cctype>
#include <sstream>

#include "sospl/bounds.hpp"

namespace sospl {

// Canonical text form: terms in descending graded order, `*` between factors,
// `^` for powers, `~name` for negation literals. Example: 2*x*y - 3*z + 0.5
inline std::string to_string(const Polynomial& p, const VariableSet& vars) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    double mag = std::abs(c);
    if (first) {
      if (c < 0) out << "-";
      first = false;
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    bool coeff_shown = (mag != 1.0) || m.is_one();
    if (coeff_shown) out << format_double(mag);
    bool need_star = coeff_shown;
    for (const auto& [v, e] : m.entries()) {
      if (need_star) out << "*";
      out << vars.display_name(v);
      if (e > 1) out << "^" << e;
      need_star = true;
    }
  }
  return out.str();
}

namespace detail {

class PolyLexer {
public:
  PolyLexer(const std::string& text, int line, int col0)
      : text_(text), line_(line), col0_(col0) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  char take() {
    skip_ws();
    return text_[pos_++];
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw parse_error(msg, line_, col0_ + static_cast<int>(pos_));
  }

  double number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    if (pos_ == start) fail("expected number");
    try {
      return std::stod(text_.substr(start, pos_ - start));
    } catch (const std::exception&) {
      fail("bad numeric literal '" + text_.substr(start, pos_ - start) + "'");
    }
  }

  std::string identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected identifier");
    return text_.substr(start, pos_ - start);
  }

  std::size_t pos() const { return pos_; }
  int line() const { return line_; }
  int col_at(std::size_t p) const { return col0_ + static_cast<int>(p); }

private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_;
  int col0_;
};

}  // namespace detail

// Parses the polynomial text syntax over declared variables; undeclared names
// raise parse_error with position. (line, col0) locate the text in its file.
inline Polynomial parse_polynomial(const std::string& text, const VariableSet& vars,
                                   int line = 1, int col0 = 1) {
  detail::PolyLexer lex(text, line, col0);
  Polynomial out;
  bool first = true;
  while (!lex.done()) {
    double sign = 1.0;
    if (lex.accept('-'))
      sign = -1.0;
    else if (lex.accept('+'))
      sign = 1.0;
    else if (!first)
      lex.fail("expected '+' or '-' between terms");
    first = false;

    double coeff = sign;
    std::vector<Monomial::Entry> factors;
    bool saw_factor = false;
    bool expect_factor = true;
    while (expect_factor) {
      char c = lex.peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        coeff *= lex.number();
        saw_factor = true;
      } else if (c == '~' || std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        bool neg = lex.accept('~');
        std::size_t at = lex.pos();
        std::string name = lex.identifier();
        if (!vars.has(name))
          throw parse_error("undeclared variable '" + name + "'", lex.line(),
                            lex.col_at(at));
        VariableId v = vars.find(name);
        if (neg) {
          if (vars.info(v).kind != VarKind::Boolean)
            throw parse_error("'~' applies only to Boolean variables", lex.line(),
                              lex.col_at(at));
          v = vars.partner(v);
        }
        std::uint32_t exp = 1;
        if (lex.accept('^')) {
          double e = lex.number();
          if (e < 1 || e != std::floor(e)) lex.fail("exponent must be a positive integer");
          exp = static_cast<std::uint32_t>(e);
        }
        factors.push_back({v, exp});
        saw_factor = true;
      } else {
        lex.fail("expected a coefficient or variable");
      }
      expect_factor = lex.accept('*');
    }
    if (!saw_factor) lex.fail("empty term");
    out.add_term(Monomial::from_entries(std::move(factors)), coeff);
  }
  if (first) throw parse_error("empty polynomial", line, col0);
  return out;
}

}  // namespace sospl
