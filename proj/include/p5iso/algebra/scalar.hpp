#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "rational_function.hpp"

namespace p5iso {

using cplx = std::complex<double>;

// Uniform helpers over the three scalar kinds used by the chart code:
// GaussianRational (exact), RationalFunction (symbolic), cplx (numeric).
inline bool scalar_is_zero(const GaussianRational& x, double = 0) { return x.is_zero(); }
inline bool scalar_is_zero(const RationalFunction& x, double = 0) { return x.is_zero(); }
inline bool scalar_is_zero(const cplx& x, double tol) { return std::abs(x) <= tol; }

inline std::string scalar_str(const GaussianRational& x) { return x.str(); }
inline std::string scalar_str(const RationalFunction& x) { return x.str(); }
inline std::string scalar_str(const cplx& x) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", x.real(), x.imag());
  return buf;
}

inline cplx to_cplx(const GaussianRational& x) { return x.to_complex(); }
inline cplx to_cplx(const cplx& x) { return x; }

// Dense univariate polynomial in z, coefficient k multiplies z^k.
template <class S>
using UPoly = std::vector<S>;

template <class S>
UPoly<S> up_add(const UPoly<S>& a, const UPoly<S>& b) {
  UPoly<S> r(std::max(a.size(), b.size()), S(0));
  for (size_t k = 0; k < a.size(); ++k) r[k] += a[k];
  for (size_t k = 0; k < b.size(); ++k) r[k] += b[k];
  return r;
}
template <class S>
UPoly<S> up_scale(const S& s, const UPoly<S>& a) {
  UPoly<S> r = a;
  for (auto& x : r) x = s * x;
  return r;
}
template <class S>
UPoly<S> up_mul(const UPoly<S>& a, const UPoly<S>& b) {
  if (a.empty() || b.empty()) return {};
  UPoly<S> r(a.size() + b.size() - 1, S(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}
template <class S>
S up_eval(const UPoly<S>& a, const S& z) {
  S r(0);
  for (size_t k = a.size(); k-- > 0;) r = r * z + a[k];
  return r;
}
template <class S>
S up_coeff(const UPoly<S>& a, size_t k) {
  return k < a.size() ? a[k] : S(0);
}

}  // namespace p5iso
