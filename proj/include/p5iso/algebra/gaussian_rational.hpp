#pragma once

#include <gmpxx.h>

#include <complex>
#include <ostream>
#include <string>

#include "../errors.hpp"

namespace p5iso {

// Element of Q(i): re + im*i with GMP rationals kept in lowest terms.
class GaussianRational {
 public:
  GaussianRational() : re_(0), im_(0) {}
  GaussianRational(long v) : re_(v), im_(0) {}  // NOLINT implicit
  GaussianRational(const mpq_class& re, const mpq_class& im = 0) : re_(re), im_(im) {
    re_.canonicalize();
    im_.canonicalize();
  }
  static GaussianRational frac(long p, long q) {
    if (q == 0) throw DivisionByZero("zero denominator");
    mpq_class r(p, q);
    r.canonicalize();
    return GaussianRational(r);
  }
  static GaussianRational i() { return GaussianRational(0, 1); }

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_one() const { return re_ == 1 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }

  GaussianRational operator-() const { return GaussianRational(-re_, -im_); }
  GaussianRational conj() const { return GaussianRational(re_, -im_); }
  mpq_class norm() const { return re_ * re_ + im_ * im_; }

  GaussianRational inv() const {
    if (is_zero()) throw DivisionByZero("inverse of zero in Q(i)");
    mpq_class n = norm();
    return GaussianRational(re_ / n, -im_ / n);
  }

  GaussianRational& operator+=(const GaussianRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    if (o.is_real()) {
      re_ *= o.re_;
      im_ *= o.re_;
      return *this;
    }
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class m = re_ * o.im_ + im_ * o.re_;
    re_ = r;
    im_ = m;
    return *this;
  }
  GaussianRational& operator/=(const GaussianRational& o) { return *this *= o.inv(); }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

  GaussianRational pow(long e) const {
    if (e < 0) return inv().pow(-e);
    GaussianRational r(1), b = *this;
    while (e) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  // "p/q", "r/s*i" or "p/q+r/s*i"; integers print without denominator.
  std::string str() const {
    if (is_real()) return re_.get_str();
    std::string ims;
    if (im_ == 1)
      ims = "i";
    else if (im_ == -1)
      ims = "-i";
    else
      ims = im_.get_str() + "*i";
    if (sgn(re_) == 0) return ims;
    return re_.get_str() + (ims[0] == '-' ? "" : "+") + ims;
  }

  // Parses the output of str() and plain rationals/decimals ("0.25").
  static GaussianRational parse(const std::string& s);

 private:
  mpq_class re_, im_;
};

inline std::ostream& operator<<(std::ostream& os, const GaussianRational& g) { return os << g.str(); }

namespace detail {
inline mpq_class parse_rational(std::string s) {
  if (s.empty()) throw ParseError("empty number");
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    s = s.substr(1);
  }
  mpq_class r;
  auto dot = s.find('.');
  auto slash = s.find('/');
  try {
    if (dot != std::string::npos) {
      std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
      if (ip.empty()) ip = "0";
      mpz_class den = 1;
      for (size_t k = 0; k < fp.size(); ++k) den *= 10;
      r = mpq_class(mpz_class(ip + fp, 10), den);
    } else if (slash != std::string::npos) {
      mpz_class d(s.substr(slash + 1), 10);
      if (d == 0) throw DivisionByZero("zero denominator in '" + s + "'");
      r = mpq_class(mpz_class(s.substr(0, slash), 10), d);
    } else {
      r = mpq_class(mpz_class(s, 10));
    }
  } catch (const std::invalid_argument&) {
    throw ParseError("bad number '" + s + "'");
  }
  r.canonicalize();
  return neg ? mpq_class(-r) : r;
}
}  // namespace detail

inline GaussianRational GaussianRational::parse(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParseError("empty number");
  if (s.back() != 'i') return GaussianRational(detail::parse_rational(s));
  // split real and imaginary parts at the last sign that is not leading
  std::string body = s.substr(0, s.size() - 1);
  if (!body.empty() && body.back() == '*') body.pop_back();
  size_t cut = std::string::npos;
  for (size_t k = body.size(); k-- > 1;)
    if (body[k] == '+' || body[k] == '-') {
      cut = k;
      break;
    }
  std::string rs = cut == std::string::npos ? "" : body.substr(0, cut);
  std::string is = cut == std::string::npos ? body : body.substr(cut);
  mpq_class im;
  if (is.empty() || is == "+")
    im = 1;
  else if (is == "-")
    im = -1;
  else
    im = detail::parse_rational(is);
  return GaussianRational(rs.empty() ? mpq_class(0) : detail::parse_rational(rs), im);
}

}  // namespace p5iso
