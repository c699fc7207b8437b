#pragma once

#include <map>
#include <string>

#include "multipoly.hpp"

namespace p5iso {

// num/den over Q(i). Reduction is heuristic (monomial content, exact
// division, leading-coefficient normalisation); equality never relies on it.
class RationalFunction {
 public:
  RationalFunction() : num_(), den_(1) {}
  RationalFunction(const MultiPoly& p) : num_(p), den_(1) {}  // NOLINT implicit
  RationalFunction(const GaussianRational& c) : num_(c), den_(1) {}  // NOLINT implicit
  RationalFunction(long c) : num_(c), den_(1) {}  // NOLINT implicit
  RationalFunction(const MultiPoly& n, const MultiPoly& d) : num_(n), den_(d) {
    if (den_.is_zero()) throw DivisionByZero("rational function with zero denominator");
    reduce();
  }
  static RationalFunction var(const std::string& v) { return RationalFunction(MultiPoly::var(v)); }

  const MultiPoly& num() const { return num_; }
  const MultiPoly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  MultiPoly as_polynomial() const {
    if (!is_polynomial()) throw ShapeError("not a polynomial: " + str());
    return num_.scaled(den_.constant_value().inv());
  }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  GaussianRational constant_value() const {
    return num_.constant_value() / den_.constant_value();
  }

  RationalFunction operator-() const { return raw(-num_, den_); }

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_ == b.den_) return RationalFunction(a.num_ + b.num_, a.den_);
    if (b.den_.is_constant())
      return RationalFunction(a.num_ + b.num_ * a.den_.scaled(b.den_.constant_value().inv()), a.den_);
    if (a.den_.is_constant())
      return RationalFunction(a.num_ * b.den_.scaled(a.den_.constant_value().inv()) + b.num_, b.den_);
    if (auto q = a.den_.divide_exact(b.den_)) return RationalFunction(a.num_ + b.num_ * *q, a.den_);
    if (auto q = b.den_.divide_exact(a.den_)) return RationalFunction(a.num_ * *q + b.num_, b.den_);
    return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero() || b.is_zero()) return RationalFunction();
    // cross-cancel before multiplying
    MultiPoly an = a.num_, ad = a.den_, bn = b.num_, bd = b.den_;
    cancel(an, bd);
    cancel(bn, ad);
    return RationalFunction(an * bn, ad * bd);
  }
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    if (b.is_zero()) throw DivisionByZero("division by zero rational function");
    return a * raw(b.den_, b.num_, true);
  }
  RationalFunction& operator+=(const RationalFunction& o) { return *this = *this + o; }
  RationalFunction& operator-=(const RationalFunction& o) { return *this = *this - o; }
  RationalFunction& operator*=(const RationalFunction& o) { return *this = *this * o; }
  RationalFunction& operator/=(const RationalFunction& o) { return *this = *this / o; }

  RationalFunction pow(int n) const {
    if (n < 0) return RationalFunction(1) / pow(-n);
    return raw(num_.pow(n), den_.pow(n));
  }

  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return (a.num_ * b.den_ - b.num_ * a.den_).is_zero();
  }
  friend bool operator!=(const RationalFunction& a, const RationalFunction& b) { return !(a == b); }

  // Partial derivative; undeclared variables give zero.
  RationalFunction partial(const std::string& v) const {
    MultiPoly dn = num_.partial(v);
    if (den_.is_constant()) return raw(dn, den_);
    MultiPoly dd = den_.partial(v);
    if (dd.is_zero()) return RationalFunction(dn, den_);
    return RationalFunction(dn * den_ - num_ * dd, den_ * den_);
  }

  RationalFunction substitute(const std::string& v, const RationalFunction& val) const {
    if (!num_.has_var(v) && !den_.has_var(v)) return *this;
    return subst_poly(num_, v, val) / subst_poly(den_, v, val);
  }
  RationalFunction substitute(const std::map<std::string, RationalFunction>& vals) const {
    RationalFunction r = *this;
    for (auto& [v, f] : vals) r = r.substitute(v, f);
    return r;
  }

  GaussianRational eval(const std::map<std::string, GaussianRational>& at) const {
    GaussianRational d = den_.eval(at);
    if (d.is_zero()) throw DivisionByZero("denominator vanishes at evaluation point");
    return num_.eval(at) / d;
  }
  std::complex<double> eval(const std::map<std::string, std::complex<double>>& at) const {
    return num_.eval(at) / den_.eval(at);
  }

  std::string str() const {
    if (den_.is_constant()) return as_polynomial().str();
    return "(" + num_.str() + ")/(" + den_.str() + ")";
  }

 private:
  static RationalFunction raw(const MultiPoly& n, const MultiPoly& d, bool normalise = false) {
    RationalFunction r;
    r.num_ = n;
    r.den_ = d;
    if (normalise) r.normalise_lc();
    return r;
  }

  static MultiPoly power_of(std::map<int, MultiPoly>& cache, const MultiPoly& base, int k) {
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    MultiPoly p = k == 0 ? MultiPoly(1) : power_of(cache, base, k - 1) * base;
    cache[k] = p;
    return p;
  }

  // Horner-free substitution of a fraction: clear the common denominator d^deg.
  static RationalFunction subst_poly(const MultiPoly& p, const std::string& v, const RationalFunction& val) {
    if (!p.has_var(v)) return RationalFunction(p);
    if (val.is_polynomial()) return RationalFunction(p.substitute(v, val.as_polynomial()));
    int deg = p.degree_in(v);
    std::map<int, MultiPoly> npow, dpow;
    MultiPoly acc;
    for (int k = 0; k <= deg; ++k) {
      MultiPoly ck = p.coeff_in(v, k);
      if (ck.is_zero()) continue;
      acc += ck * power_of(npow, val.num_, k) * power_of(dpow, val.den_, deg - k);
    }
    return RationalFunction(acc, power_of(dpow, val.den_, deg));
  }

  // Remove a common factor between a and b when one divides the other or
  // they share monomial content.
  static void cancel(MultiPoly& a, MultiPoly& b) {
    if (a.is_zero() || b.is_constant() || a.is_constant()) return;
    if (a.vars() != b.vars()) {
      auto u = MultiPoly::merge_vars(a.vars(), b.vars());
      a = a.over(u);
      b = b.over(u);
    }
    Exponents ma = a.monomial_content(), mb = b.monomial_content(), g(ma.size());
    bool any = false;
    for (size_t k = 0; k < g.size(); ++k) {
      g[k] = std::min(ma[k], mb[k]);
      any |= g[k] > 0;
    }
    if (any) {
      a = a.shift_down(g);
      b = b.shift_down(g);
    }
    if (b.is_constant() || a.is_constant()) return;
    if (b.size() <= a.size()) {
      if (auto q = a.divide_exact(b)) {
        a = *q;
        b = MultiPoly(1);
      }
    } else if (auto q = b.divide_exact(a)) {
      b = *q;
      a = MultiPoly(1);
    }
  }

  void normalise_lc() {
    GaussianRational lc = den_.leading_term().second;
    if (!lc.is_one()) {
      GaussianRational s = lc.inv();
      num_ = num_.scaled(s);
      den_ = den_.scaled(s);
    }
  }

  void reduce() {
    if (num_.is_zero()) {
      den_ = MultiPoly(1);
      return;
    }
    cancel(num_, den_);
    normalise_lc();
  }

  MultiPoly num_, den_;
};

inline std::ostream& operator<<(std::ostream& os, const RationalFunction& f) { return os << f.str(); }

}  // namespace p5iso
