#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaussian_rational.hpp"

namespace p5iso {

using Exponents = std::vector<int>;

// Graded lexicographic order; the first declared variable is the largest.
struct GrlexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    int da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

// Sparse polynomial over Q(i) in an ordered list of named variables.
class MultiPoly {
 public:
  using Terms = std::map<Exponents, GaussianRational, GrlexLess>;

  MultiPoly() = default;
  MultiPoly(const GaussianRational& c) {  // NOLINT implicit
    if (!c.is_zero()) terms_.emplace(Exponents{}, c);
  }
  MultiPoly(long c) : MultiPoly(GaussianRational(c)) {}  // NOLINT implicit
  MultiPoly(std::vector<std::string> vars, Terms terms) : vars_(std::move(vars)) {
    for (auto& [e, c] : terms) {
      if (e.size() != vars_.size()) throw ShapeError("exponent vector length mismatch");
      if (!c.is_zero()) terms_.emplace(e, c);
    }
  }

  static MultiPoly var(const std::string& name, int power = 1) {
    MultiPoly p;
    p.vars_ = {name};
    p.terms_.emplace(Exponents{power}, GaussianRational(1));
    return p;
  }
  static MultiPoly i() { return MultiPoly(GaussianRational::i()); }

  const std::vector<std::string>& vars() const { return vars_; }
  const Terms& terms() const { return terms_; }
  size_t size() const { return terms_.size(); }

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree() == 0);
  }
  GaussianRational constant_value() const {
    if (!is_constant()) throw ShapeError("polynomial is not constant: " + str());
    return terms_.empty() ? GaussianRational() : terms_.begin()->second;
  }
  int total_degree() const {
    if (terms_.empty()) return -1;
    int d = 0;
    for (int e : terms_.rbegin()->first) d += e;
    return d;
  }
  int index_of(const std::string& v) const {
    auto it = std::find(vars_.begin(), vars_.end(), v);
    return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
  }
  bool has_var(const std::string& v) const { return index_of(v) >= 0; }
  // variables that actually occur with positive exponent
  std::vector<std::string> support_vars() const {
    std::vector<std::string> out;
    for (size_t k = 0; k < vars_.size(); ++k)
      for (auto& [e, c] : terms_)
        if (e[k] > 0) {
          out.push_back(vars_[k]);
          break;
        }
    return out;
  }
  const std::pair<const Exponents, GaussianRational>& leading_term() const {
    if (terms_.empty()) throw ShapeError("leading term of zero polynomial");
    return *terms_.rbegin();
  }

  // Re-express over a superset variable list.
  MultiPoly over(const std::vector<std::string>& universe) const {
    if (universe == vars_) return *this;
    std::vector<int> map(vars_.size());
    for (size_t k = 0; k < vars_.size(); ++k) {
      auto it = std::find(universe.begin(), universe.end(), vars_[k]);
      if (it == universe.end()) {
        for (auto& [e, c] : terms_)
          if (e[k] != 0) throw UnknownSymbol(vars_[k] + " missing from target universe");
        map[k] = -1;
      } else {
        map[k] = static_cast<int>(it - universe.begin());
      }
    }
    MultiPoly r;
    r.vars_ = universe;
    for (auto& [e, c] : terms_) {
      Exponents ne(universe.size(), 0);
      for (size_t k = 0; k < e.size(); ++k)
        if (map[k] >= 0) ne[map[k]] = e[k];
      r.terms_.emplace(std::move(ne), c);
    }
    return r;
  }

  static std::vector<std::string> merge_vars(const std::vector<std::string>& a,
                                             const std::vector<std::string>& b) {
    if (a == b) return a;
    std::vector<std::string> u = a;
    for (auto& v : b)
      if (std::find(u.begin(), u.end(), v) == u.end()) u.push_back(v);
    return u;
  }

  MultiPoly operator-() const {
    MultiPoly r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  MultiPoly& operator+=(const MultiPoly& o) { return axpy(GaussianRational(1), o); }
  MultiPoly& operator-=(const MultiPoly& o) { return axpy(GaussianRational(-1), o); }

  // this += s * o, in place
  MultiPoly& axpy(const GaussianRational& s, const MultiPoly& o) {
    if (o.is_zero() || s.is_zero()) return *this;
    if (vars_ != o.vars_) {
      auto u = merge_vars(vars_, o.vars_);
      if (u != vars_) *this = over(u);
      if (u != o.vars_) return axpy(s, o.over(u));
    }
    for (auto& [e, c] : o.terms_) add_term(e, s * c);
    return *this;
  }

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    if (a.is_zero() || b.is_zero()) return MultiPoly();
    if (a.vars_ != b.vars_) {
      auto u = merge_vars(a.vars_, b.vars_);
      return a.over(u) * b.over(u);
    }
    MultiPoly r;
    r.vars_ = a.vars_;
    Exponents e(a.vars_.size());
    for (auto& [ea, ca] : a.terms_)
      for (auto& [eb, cb] : b.terms_) {
        for (size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
        r.add_term(e, ca * cb);
      }
    return r;
  }
  MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

  MultiPoly scaled(const GaussianRational& s) const {
    if (s.is_zero()) return MultiPoly();
    MultiPoly r = *this;
    for (auto& [e, c] : r.terms_) c *= s;
    return r;
  }

  MultiPoly pow(int n) const {
    if (n < 0) throw InvalidParameter("negative power of polynomial");
    MultiPoly r(1), b = *this;
    while (n) {
      if (n & 1) r *= b;
      n >>= 1;
      if (n) b *= b;
    }
    return r;
  }

  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    if (a.vars_ == b.vars_) return a.terms_ == b.terms_;
    return (a - b).is_zero();
  }
  friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

  // Formal partial derivative; var must be declared.
  MultiPoly derivative(const std::string& v) const {
    int k = index_of(v);
    if (k < 0) throw UnknownSymbol("variable '" + v + "' not in polynomial's variable list");
    return partial(k);
  }
  // Same, but an undeclared variable gives zero.
  MultiPoly partial(const std::string& v) const {
    int k = index_of(v);
    return k < 0 ? MultiPoly() : partial(k);
  }

  int degree_in(const std::string& v) const {
    int k = index_of(v), d = terms_.empty() ? -1 : 0;
    if (k < 0) return d;
    for (auto& [e, c] : terms_) d = std::max(d, e[k]);
    return d;
  }
  // Coefficient of v^n, as a polynomial over the same variable list.
  MultiPoly coeff_in(const std::string& v, int n) const {
    int k = index_of(v);
    if (k < 0) return n == 0 ? *this : MultiPoly();
    MultiPoly r;
    r.vars_ = vars_;
    for (auto& [e, c] : terms_)
      if (e[k] == n) {
        Exponents ne = e;
        ne[k] = 0;
        r.terms_.emplace(std::move(ne), c);
      }
    return r;
  }
  // All coefficients of the monomials in the given variables, keyed by their exponents.
  std::map<Exponents, MultiPoly> coefficients_in(const std::vector<std::string>& vs) const {
    std::vector<int> ks;
    for (auto& v : vs) ks.push_back(index_of(v));
    std::map<Exponents, MultiPoly> out;
    for (auto& [e, c] : terms_) {
      Exponents key(vs.size(), 0);
      Exponents rest = e;
      for (size_t j = 0; j < ks.size(); ++j)
        if (ks[j] >= 0) {
          key[j] = e[ks[j]];
          rest[ks[j]] = 0;
        }
      auto& slot = out[key];
      if (slot.vars_.empty()) slot.vars_ = vars_;
      slot.add_term(rest, c);
    }
    for (auto it = out.begin(); it != out.end();)
      it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
  }

  MultiPoly substitute(const std::string& v, const MultiPoly& val) const {
    int k = index_of(v);
    if (k < 0) return *this;
    int dmax = degree_in(v);
    std::vector<MultiPoly> powers{MultiPoly(1)};
    for (int d = 1; d <= dmax; ++d) powers.push_back(powers.back() * val);
    MultiPoly r;
    r.vars_ = vars_;
    std::map<int, MultiPoly> byDeg;
    for (auto& [e, c] : terms_) {
      Exponents ne = e;
      ne[k] = 0;
      auto& slot = byDeg[e[k]];
      if (slot.vars_.empty()) slot.vars_ = vars_;
      slot.add_term(ne, c);
    }
    for (auto& [d, p] : byDeg) r += p * powers[d];
    return r;
  }

  GaussianRational eval(const std::map<std::string, GaussianRational>& at) const {
    std::vector<GaussianRational> vals(vars_.size());
    std::vector<bool> have(vars_.size(), false);
    for (size_t k = 0; k < vars_.size(); ++k) {
      auto it = at.find(vars_[k]);
      if (it != at.end()) {
        vals[k] = it->second;
        have[k] = true;
      }
    }
    GaussianRational s;
    for (auto& [e, c] : terms_) {
      GaussianRational m = c;
      for (size_t k = 0; k < e.size(); ++k)
        if (e[k]) {
          if (!have[k]) throw UnknownSymbol("no value for '" + vars_[k] + "'");
          m *= vals[k].pow(e[k]);
        }
      s += m;
    }
    return s;
  }

  std::complex<double> eval(const std::map<std::string, std::complex<double>>& at) const {
    std::vector<std::complex<double>> vals(vars_.size());
    std::vector<bool> have(vars_.size(), false);
    for (size_t k = 0; k < vars_.size(); ++k) {
      auto it = at.find(vars_[k]);
      if (it != at.end()) {
        vals[k] = it->second;
        have[k] = true;
      }
    }
    std::complex<double> s = 0;
    for (auto& [e, c] : terms_) {
      std::complex<double> m = c.to_complex();
      for (size_t k = 0; k < e.size(); ++k)
        if (e[k]) {
          if (!have[k]) throw UnknownSymbol("no value for '" + vars_[k] + "'");
          for (int j = 0; j < e[k]; ++j) m *= vals[k];
        }
      s += m;
    }
    return s;
  }

  // Exact quotient a/b when b divides a, otherwise nullopt.
  std::optional<MultiPoly> divide_exact(const MultiPoly& b) const {
    if (b.is_zero()) throw DivisionByZero("polynomial division by zero");
    if (is_zero()) return MultiPoly();
    if (vars_ != b.vars_) {
      auto u = merge_vars(vars_, b.vars_);
      return over(u).divide_exact(b.over(u));
    }
    if (b.is_constant()) return scaled(b.constant_value().inv());
    MultiPoly r = *this, q;
    q.vars_ = vars_;
    auto& [lb, lcb] = b.leading_term();
    GaussianRational lcinv = lcb.inv();
    Exponents m(vars_.size());
    while (!r.is_zero()) {
      auto& [lr, lcr] = r.leading_term();
      for (size_t k = 0; k < m.size(); ++k) {
        m[k] = lr[k] - lb[k];
        if (m[k] < 0) return std::nullopt;
      }
      GaussianRational f = lcr * lcinv;
      q.add_term(m, f);
      Exponents e(m.size());
      for (auto& [eb, cb] : b.terms_) {
        for (size_t k = 0; k < e.size(); ++k) e[k] = eb[k] + m[k];
        r.add_term(e, -(f * cb));
      }
    }
    return q;
  }

  // Componentwise minimum exponent over all terms.
  Exponents monomial_content() const {
    Exponents g(vars_.size(), 0);
    bool first = true;
    for (auto& [e, c] : terms_) {
      if (first) {
        g = e;
        first = false;
      } else {
        for (size_t k = 0; k < g.size(); ++k) g[k] = std::min(g[k], e[k]);
      }
    }
    return g;
  }
  MultiPoly shift_down(const Exponents& m) const {
    MultiPoly r;
    r.vars_ = vars_;
    for (auto& [e, c] : terms_) {
      Exponents ne = e;
      for (size_t k = 0; k < ne.size(); ++k) ne[k] -= m[k];
      r.terms_.emplace(std::move(ne), c);
    }
    return r;
  }

  // Restrict the variable list to those that actually occur (stable order).
  MultiPoly compacted() const {
    auto sv = support_vars();
    return sv.size() == vars_.size() ? *this : over(sv);
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      auto& [e, c] = *it;
      std::string mono;
      for (size_t k = 0; k < e.size(); ++k)
        if (e[k]) {
          if (!mono.empty()) mono += "*";
          mono += vars_[k];
          if (e[k] > 1) mono += "^" + std::to_string(e[k]);
        }
      std::string cs;
      bool neg = false;
      if (c.is_real()) {
        neg = sgn(c.re()) < 0;
        mpq_class a = abs(c.re());
        cs = a == 1 && !mono.empty() ? "" : a.get_str();
      } else {
        cs = "(" + c.str() + ")";
      }
      if (first)
        os << (neg ? "-" : "");
      else
        os << (neg ? "-" : "+");
      first = false;
      os << cs;
      if (!cs.empty() && !mono.empty()) os << "*";
      os << mono;
    }
    return os.str();
  }

  void add_term(const Exponents& e, const GaussianRational& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

 private:
  MultiPoly partial(int k) const {
    MultiPoly r;
    r.vars_ = vars_;
    for (auto& [e, c] : terms_)
      if (e[k] > 0) {
        Exponents ne = e;
        ne[k] -= 1;
        r.terms_.emplace(std::move(ne), c * GaussianRational(e[k]));
      }
    return r;
  }

  std::vector<std::string> vars_;
  Terms terms_;
};

inline std::ostream& operator<<(std::ostream& os, const MultiPoly& p) { return os << p.str(); }

}  // namespace p5iso
