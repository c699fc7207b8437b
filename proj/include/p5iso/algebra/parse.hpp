#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "rational_function.hpp"

namespace p5iso {

namespace detail {

// Recursive-descent reader for + - * / ^ ( ) over numbers and identifiers.
// The identifier `i` is the imaginary unit.
class ExprReader {
 public:
  explicit ExprReader(const std::string& s) : s_(s) {}

  RationalFunction run() {
    RationalFunction r = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at position " + std::to_string(pos_) + " in \"" + s_ + "\"");
  }
  void skip() {
    while (pos_ < s_.size() && isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RationalFunction expr() {
    RationalFunction r = term();
    for (;;) {
      if (eat('+'))
        r += term();
      else if (eat('-'))
        r -= term();
      else
        return r;
    }
  }
  RationalFunction term() {
    RationalFunction r = unary();
    for (;;) {
      skip();
      if (pos_ + 1 < s_.size() && s_[pos_] == '*' && s_[pos_ + 1] == '*') return r;
      if (eat('*'))
        r *= unary();
      else if (eat('/'))
        r /= unary();
      else
        return r;
    }
  }
  RationalFunction unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  RationalFunction power() {
    RationalFunction b = atom();
    skip();
    bool pw = false;
    if (eat('^')) {
      pw = true;
    } else if (pos_ + 1 < s_.size() && s_[pos_] == '*' && s_[pos_ + 1] == '*') {
      pos_ += 2;
      pw = true;
    }
    if (!pw) return b;
    skip();
    bool neg = eat('-');
    skip();
    size_t start = pos_;
    while (pos_ < s_.size() && isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int e = std::stoi(s_.substr(start, pos_ - start));
    return b.pow(neg ? -e : e);
  }
  RationalFunction atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      RationalFunction r = expr();
      if (!eat(')')) fail("expected ')'");
      return r;
    }
    if (isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos_;
      while (pos_ < s_.size() && (isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      return RationalFunction(GaussianRational(parse_rational(s_.substr(start, pos_ - start))));
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '\''))
        ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "i" || id == "I") return RationalFunction(GaussianRational::i());
      return RationalFunction::var(id);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace detail

inline RationalFunction parse_rational_function(const std::string& s) { return detail::ExprReader(s).run(); }

// Parse a polynomial; when `vars` is given the result is expressed over exactly
// that variable list (which must cover every symbol that occurs).
inline MultiPoly parse_poly(const std::string& s, const std::vector<std::string>& vars = {}) {
  RationalFunction f = parse_rational_function(s);
  if (!f.is_polynomial()) throw ParseError("not a polynomial: \"" + s + "\"");
  MultiPoly p = f.as_polynomial();
  return vars.empty() ? p.compacted() : p.over(vars);
}

// Exact scalar from text: "1/3", "0.25", "1/2+1/3*i", or any constant expression.
inline GaussianRational parse_scalar(const std::string& s) {
  RationalFunction f = parse_rational_function(s);
  if (!f.is_constant()) throw ParseError("not a constant: \"" + s + "\"");
  return f.constant_value();
}

}  // namespace p5iso
