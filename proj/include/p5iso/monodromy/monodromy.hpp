#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "../algebra/bareiss.hpp"
#include "../algebra/matrix.hpp"
#include "../algebra/rational_function.hpp"
#include "../algebra/scalar.hpp"

namespace p5iso {

template <class S>
struct MonodromyParamsT {
  S s1{0}, s2{0}, s3{1};
};
using MonodromyParams = MonodromyParamsT<GaussianRational>;

template <class S>
struct Mat2 {
  S a{1}, b{0}, c{0}, d{1};
};

template <class S>
struct Line {
  S y1{1}, y2{0};
};

template <class S>
struct Rank2MonodromyPointT {
  Mat2<S> m0, m1;
  S alpha{1}, f1{0}, f2{0};
  std::optional<Line<S>> line0, line1;
};
using Rank2MonodromyPoint = Rank2MonodromyPointT<GaussianRational>;

template <class S>
struct Rank2Validation {
  std::vector<S> relations;  // det m0 - 1, det m1 - 1, tr m0 - s1, tr m1 - s2, a1 a2 + b1 c2 - s3
  bool split = false;        // b1 = c1 = b2 = c2 = 0
  std::vector<S> lines;      // m y ^ y for the supplied eigenlines
  bool ok(double tol = 0) const {
    if (split) return false;
    for (auto& r : relations)
      if (!scalar_is_zero(r, tol)) return false;
    for (auto& r : lines)
      if (!scalar_is_zero(r, tol)) return false;
    return true;
  }
};

template <class S>
S line_residual(const Mat2<S>& m, const Line<S>& y) {
  return (m.a * y.y1 + m.b * y.y2) * y.y2 - (m.c * y.y1 + m.d * y.y2) * y.y1;
}

template <class S>
Rank2Validation<S> validate_rank2(const Rank2MonodromyPointT<S>& p, const MonodromyParamsT<S>& s, double tol = 0) {
  const auto &m0 = p.m0, &m1 = p.m1;
  Rank2Validation<S> v;
  v.relations = {m0.a * m0.d - m0.b * m0.c - S(1), m1.a * m1.d - m1.b * m1.c - S(1), m0.a + m0.d - s.s1,
                 m1.a + m1.d - s.s2, m0.a * m1.a + m0.b * m1.c - s.s3};
  v.split = scalar_is_zero(m0.b, tol) && scalar_is_zero(m0.c, tol) && scalar_is_zero(m1.b, tol) &&
            scalar_is_zero(m1.c, tol);
  if (p.line0) v.lines.push_back(line_residual(m0, *p.line0));
  if (p.line1) v.lines.push_back(line_residual(m1, *p.line1));
  return v;
}

template <class S>
Mat2<S> mul(const Mat2<S>& x, const Mat2<S>& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

// m0 m1 - diag(alpha, 1/alpha) [[1,0],[f2,1]] [[1,f1],[0,1]]
template <class S>
Mat2<S> monodromy_identity_residual(const Rank2MonodromyPointT<S>& p) {
  if (scalar_is_zero(p.alpha, 0)) throw InvalidParameter("alpha = 0");
  Mat2<S> lhs = mul(p.m0, p.m1);
  Mat2<S> rhs = mul(mul(Mat2<S>{p.alpha, S(0), S(0), S(1) / p.alpha}, Mat2<S>{S(1), S(0), p.f2, S(1)}),
                    Mat2<S>{S(1), p.f1, S(0), S(1)});
  return {lhs.a - rhs.a, lhs.b - rhs.b, lhs.c - rhs.c, lhs.d - rhs.d};
}

// Stokes entries read off from m0 m1 with alpha = s3.
template <class S>
void fill_stokes(Rank2MonodromyPointT<S>& p, const S& alpha) {
  p.alpha = alpha;
  p.f1 = (p.m0.a * p.m1.b + p.m0.b * p.m1.d) / alpha;
  p.f2 = alpha * (p.m0.c * p.m1.a + p.m0.d * p.m1.c);
}

// conjugation by diag(c, 1)
template <class S>
Rank2MonodromyPointT<S> gm_scale(const Rank2MonodromyPointT<S>& p, const S& c) {
  if (scalar_is_zero(c, 0)) throw InvalidParameter("scaling by 0");
  auto q = p;
  for (Mat2<S>* m : {&q.m0, &q.m1}) {
    m->b = m->b * c;
    m->c = m->c / c;
  }
  q.f1 = q.f1 * c;
  q.f2 = q.f2 / c;
  if (q.line0) q.line0->y1 = q.line0->y1 * c;
  if (q.line1) q.line1->y1 = q.line1->y1 * c;
  return q;
}

// ---------------------------------------------------------------------------
// Affine charts of the geometric quotient.

enum class MonChart { B1, C1, B2, C2 };

inline std::string chart_name(MonChart c) {
  switch (c) {
    case MonChart::B1: return "b1=1";
    case MonChart::C1: return "c1=1";
    case MonChart::B2: return "b2=1";
    case MonChart::C2: return "c2=1";
  }
  return "?";
}

template <class S>
struct ChartPoint2T {
  MonChart chart = MonChart::B1;
  std::vector<std::string> names;
  std::vector<S> coords;
  const S& at(const std::string& n) const {
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] == n) return coords[k];
    throw UnknownSymbol(n);
  }
};
using ChartPoint2 = ChartPoint2T<GaussianRational>;

namespace mon_detail {
template <class S>
S P1(const S& a1, const MonodromyParamsT<S>& s) {
  return a1 * (s.s1 - a1) - S(1);
}
template <class S>
S P2(const S& a2, const MonodromyParamsT<S>& s) {
  return a2 * (s.s2 - a2) - S(1);
}
template <class S>
S Q(const S& a1, const S& a2, const MonodromyParamsT<S>& s) {
  return s.s3 - a1 * a2;
}
}  // namespace mon_detail

// Free coordinates per chart (entries normalised to 1 and d_j eliminated):
//   b1=1: (a1, a2, b2)       c1 = P1, c2 = Q
//   c2=1: (a1, a2, c1)       b1 = Q,  b2 = P2
//   b2=1: (a1, a2, b1, c1)   c2 = P2
//   c1=1: (a1, a2, b2, c2)   b1 = P1
template <class S>
ChartPoint2T<S> chart_coords(const Rank2MonodromyPointT<S>& p, MonChart chart, double tol = 0) {
  S e;
  switch (chart) {
    case MonChart::B1: e = p.m0.b; break;
    case MonChart::C1: e = p.m0.c; break;
    case MonChart::B2: e = p.m1.b; break;
    case MonChart::C2: e = p.m1.c; break;
  }
  if (scalar_is_zero(e, tol)) throw OutsideChart("entry normalised by chart " + chart_name(chart) + " is zero");
  // b-entries scale by c, c-entries by 1/c
  bool is_b = chart == MonChart::B1 || chart == MonChart::B2;
  auto q = gm_scale(p, is_b ? S(1) / e : e);
  ChartPoint2T<S> cp;
  cp.chart = chart;
  switch (chart) {
    case MonChart::B1: cp.names = {"a1", "a2", "b2"}; cp.coords = {q.m0.a, q.m1.a, q.m1.b}; break;
    case MonChart::C2: cp.names = {"a1", "a2", "c1"}; cp.coords = {q.m0.a, q.m1.a, q.m0.c}; break;
    case MonChart::B2: cp.names = {"a1", "a2", "b1", "c1"}; cp.coords = {q.m0.a, q.m1.a, q.m0.b, q.m0.c}; break;
    case MonChart::C1: cp.names = {"a1", "a2", "b2", "c2"}; cp.coords = {q.m0.a, q.m1.a, q.m1.b, q.m1.c}; break;
  }
  return cp;
}

template <class S>
std::vector<S> chart_relations(const ChartPoint2T<S>& cp, const MonodromyParamsT<S>& s) {
  using namespace mon_detail;
  S a1 = cp.at("a1"), a2 = cp.at("a2");
  switch (cp.chart) {
    case MonChart::B1:  // a2(s2-a2) - b2(s3 - a1 a2) - 1
      return {a2 * (s.s2 - a2) - cp.at("b2") * Q(a1, a2, s) - S(1)};
    case MonChart::C2:
      return {Q(a1, a2, s) * cp.at("c1") - P1(a1, s)};
    case MonChart::B2:
      return {cp.at("b1") * P2(a2, s) - Q(a1, a2, s), cp.at("b1") * cp.at("c1") - P1(a1, s)};
    case MonChart::C1:
      return {P1(a1, s) * cp.at("c2") - Q(a1, a2, s), cp.at("b2") * cp.at("c2") - P2(a2, s)};
  }
  return {};
}

template <class S>
Rank2MonodromyPointT<S> from_chart(const ChartPoint2T<S>& cp, const MonodromyParamsT<S>& s) {
  using namespace mon_detail;
  S a1 = cp.at("a1"), a2 = cp.at("a2");
  Rank2MonodromyPointT<S> p;
  p.m0.a = a1;
  p.m0.d = s.s1 - a1;
  p.m1.a = a2;
  p.m1.d = s.s2 - a2;
  switch (cp.chart) {
    case MonChart::B1:
      p.m0.b = S(1), p.m0.c = P1(a1, s), p.m1.b = cp.at("b2"), p.m1.c = Q(a1, a2, s);
      break;
    case MonChart::C2:
      p.m0.b = Q(a1, a2, s), p.m0.c = cp.at("c1"), p.m1.b = P2(a2, s), p.m1.c = S(1);
      break;
    case MonChart::B2:
      p.m0.b = cp.at("b1"), p.m0.c = cp.at("c1"), p.m1.b = S(1), p.m1.c = P2(a2, s);
      break;
    case MonChart::C1:
      p.m0.b = P1(a1, s), p.m0.c = S(1), p.m1.b = cp.at("b2"), p.m1.c = cp.at("c2");
      break;
  }
  fill_stokes(p, s.s3);
  return p;
}

template <class S>
ChartPoint2T<S> chart_transition(const ChartPoint2T<S>& cp, MonChart target, const MonodromyParamsT<S>& s,
                                 double tol = 0) {
  return chart_coords(from_chart(cp, s), target, tol);
}

// G_m-invariant functions; two points are equivalent iff these agree (given not split).
template <class S>
std::vector<S> gm_invariants(const Rank2MonodromyPointT<S>& p) {
  return {p.m0.a, p.m0.d, p.m1.a, p.m1.d, p.m0.b * p.m0.c, p.m1.b * p.m1.c,
          p.m0.b * p.m1.c, p.m1.b * p.m0.c, p.f1 * p.f2, p.m0.b * p.f2, p.m1.c * p.f1};
}

// s1 = 2, chart b2 = 1, y2 = 1: (1 + c1 y1) a2 + c1 y1^2 (1 + a2(a2 - s2)) - s3
template <class S>
S parabolic_chart_residual(const S& c1, const S& y1, const S& a2, const S& s2, const S& s3) {
  return (S(1) + c1 * y1) * a2 + c1 * y1 * y1 * (S(1) + a2 * (a2 - s2)) - s3;
}

// Rebuild the full tuple (with line [y1 : 1]) from parabolic chart coordinates.
template <class S>
Rank2MonodromyPointT<S> from_parabolic_chart(const S& c1, const S& y1, const S& a2, const S& s2, const S& s3) {
  Rank2MonodromyPointT<S> p;
  S a1 = S(1) + c1 * y1;
  p.m0 = {a1, -(c1 * y1 * y1), c1, S(2) - a1};
  p.m1 = {a2, S(1), S(-1) + a2 * (s2 - a2), s2 - a2};
  p.line0 = Line<S>{y1, S(1)};
  fill_stokes(p, s3);
  return p;
}

// ---------------------------------------------------------------------------
// Fibres of pr : (matrices) -> (a1, a2).
//
// With a1, a2 fixed the remaining unknowns satisfy b1 c1 = P1, b2 c2 = P2,
// b1 c2 = Q, not all zero, modulo b -> c b, c -> c/c. Each support pattern of
// (b1, c1, b2, c2) is a torus stratum; weights are +-1 so G_m acts freely.

enum class FiberClass { OnePoint, Empty, Line, Special };

inline std::string fiber_class_name(FiberClass c) {
  switch (c) {
    case FiberClass::OnePoint: return "OnePoint";
    case FiberClass::Empty: return "Empty";
    case FiberClass::Line: return "Line";
    case FiberClass::Special: return "Special";
  }
  return "?";
}

struct FiberStratum {
  std::array<bool, 4> nonzero;  // b1, c1, b2, c2
  int dim = 0;                  // dimension after the G_m quotient
  std::string str() const {
    static const char* n[4] = {"b1", "c1", "b2", "c2"};
    std::string s = "{";
    for (int k = 0; k < 4; ++k)
      if (nonzero[k]) s += std::string(s.size() > 1 ? "," : "") + n[k];
    return s + "} ~ (C*)^" + std::to_string(dim);
  }
};

struct FiberResult {
  FiberClass cls = FiberClass::Special;
  std::vector<FiberStratum> strata;
  std::string description;
  // number of points over a finite field with q elements
  long long count(long long q) const {
    long long n = 0;
    for (auto& s : strata) {
      long long x = 1;
      for (int k = 0; k < s.dim; ++k) x *= (q - 1);
      n += x;
    }
    return n;
  }
};

inline std::vector<FiberStratum> fiber_strata(bool p1_zero, bool p2_zero, bool q_zero) {
  // equations as (i, j, rhs_zero)
  const int eq[3][2] = {{0, 1}, {2, 3}, {0, 3}};
  const bool rz[3] = {p1_zero, p2_zero, q_zero};
  std::vector<FiberStratum> out;
  for (int mask = 1; mask < 16; ++mask) {
    std::array<bool, 4> nz{};
    for (int k = 0; k < 4; ++k) nz[k] = (mask >> k) & 1;
    bool ok = true;
    std::vector<std::array<int, 4>> rows;
    for (int e = 0; e < 3 && ok; ++e) {
      bool prod_nz = nz[eq[e][0]] && nz[eq[e][1]];
      if (prod_nz == rz[e]) ok = false;
      if (prod_nz) {
        std::array<int, 4> r{};
        r[eq[e][0]] = 1;
        r[eq[e][1]] = 1;
        rows.push_back(r);
      }
    }
    if (!ok) continue;
    // rank over Q of the exponent rows (at most 3 rows of 0/1 vectors)
    std::vector<std::array<long, 4>> m;
    for (auto& r : rows) m.push_back({r[0], r[1], r[2], r[3]});
    int rank = 0;
    for (int col = 0; col < 4 && rank < (int)m.size(); ++col) {
      int piv = -1;
      for (int i = rank; i < (int)m.size(); ++i)
        if (m[i][col]) piv = i;
      if (piv < 0) continue;
      std::swap(m[piv], m[rank]);
      for (int i = 0; i < (int)m.size(); ++i)
        if (i != rank && m[i][col]) {
          long f = m[i][col], g = m[rank][col];
          for (int k = 0; k < 4; ++k) m[i][k] = m[i][k] * g - m[rank][k] * f;
        }
      ++rank;
    }
    int k = 0;
    for (bool b : nz) k += b;
    out.push_back({nz, k - rank - 1});
  }
  return out;
}

template <class S>
FiberResult pr_fiber_classify(const S& a1, const S& a2, const MonodromyParamsT<S>& s, double tol = 0) {
  using namespace mon_detail;
  bool p1z = scalar_is_zero(P1(a1, s), tol), p2z = scalar_is_zero(P2(a2, s), tol), qz = scalar_is_zero(Q(a1, a2, s), tol);
  bool special_s = scalar_is_zero(s.s1 - S(2), tol) || scalar_is_zero(s.s1 + S(2), tol) ||
                   scalar_is_zero(s.s2 - S(2), tol) || scalar_is_zero(s.s2 + S(2), tol);
  FiberResult r;
  r.strata = fiber_strata(p1z, p2z, qz);
  for (auto& st : r.strata) r.description += (r.description.empty() ? "" : " u ") + st.str();
  if (r.strata.empty()) r.description = "empty";
  if (special_s || p1z || p2z) {
    r.cls = FiberClass::Special;
    if (special_s) r.description += " (eigenline data not included)";
    return r;
  }
  int d0 = 0, d1 = 0, other = 0;
  for (auto& st : r.strata) (st.dim == 0 ? d0 : st.dim == 1 ? d1 : other)++;
  if (r.strata.empty())
    r.cls = FiberClass::Empty;
  else if (r.strata.size() == 1 && d0 == 1)
    r.cls = FiberClass::OnePoint;
  else if (d1 == 1 && d0 == 1 && other == 0)
    r.cls = FiberClass::Line;
  else
    r.cls = FiberClass::Special;
  return r;
}

// ---------------------------------------------------------------------------
// Rank 4.

template <class S>
struct Rank4MonodromyPointT {
  S x1{0}, x2{0}, x3{0}, x4{0}, y{0};
};
using Rank4MonodromyPoint = Rank4MonodromyPointT<GaussianRational>;

template <class S>
struct CharPoly4T {
  S p1{0}, p2{0}, p3{0};
  S p0{1}, p4{1};  // constant and leading coefficients as computed
};

template <class S>
Matrix<S> mon_infinity_rank4(const Rank4MonodromyPointT<S>& p) {
  Matrix<S> C(4, 4, S(0)), Y = Matrix<S>::identity(4), X = Matrix<S>::identity(4);
  C(0, 3) = S(-1);
  C(1, 0) = S(1);
  C(2, 1) = S(1);
  C(3, 2) = S(1);
  Y(1, 3) = p.y;
  X(1, 0) = p.x1;
  X(1, 2) = p.x2;
  X(3, 0) = p.x3;
  X(3, 2) = p.x4;
  return C * Y * X;
}

inline GaussianRational div_int(const GaussianRational& x, int k) { return x / GaussianRational(k); }
inline cplx div_int(const cplx& x, int k) { return x / double(k); }
inline MultiPoly div_int(const MultiPoly& x, int k) { return x.scaled(GaussianRational::frac(1, k)); }
inline RationalFunction div_int(const RationalFunction& x, int k) { return x / RationalFunction(k); }

// det(T - M) = sum c_k T^k via Faddeev-LeVerrier; returns c_0..c_n.
template <class S>
std::vector<S> charpoly(const Matrix<S>& A) {
  size_t n = A.rows();
  std::vector<S> c(n + 1, S(0));
  c[n] = S(1);
  Matrix<S> M(n, n, S(0));
  for (size_t k = 1; k <= n; ++k) {
    Matrix<S> AM = A * M;
    for (size_t i = 0; i < n; ++i) AM(i, i) = AM(i, i) + c[n - k + 1];
    M = AM;
    c[n - k] = div_int(S(-1) * (A * M).trace(), static_cast<int>(k));
  }
  return c;
}

template <class S>
CharPoly4T<S> rank4_charpoly(const Matrix<S>& mon) {
  auto c = charpoly(mon);
  CharPoly4T<S> p;
  p.p0 = c[0];
  p.p1 = c[1];
  p.p2 = c[2];
  p.p3 = c[3];
  p.p4 = c[4];
  return p;
}

// Symbolic fiber cubic in (y, x3, x4) with p1, p2, p3 as symbols: x1, x2 are
// eliminated from the coefficient equations that are linear in them.
inline MultiPoly rank4_fiber_cubic_symbolic() {
  Rank4MonodromyPointT<MultiPoly> pt{MultiPoly::var("x1"), MultiPoly::var("x2"), MultiPoly::var("x3"),
                                     MultiPoly::var("x4"), MultiPoly::var("y")};
  auto cp = rank4_charpoly(mon_infinity_rank4(pt));
  if (!(cp.p0 - MultiPoly(1)).is_zero() || !(cp.p4 - MultiPoly(1)).is_zero())
    throw DerivationFailure("charpoly is not of the form T^4 + ... + 1");
  std::vector<MultiPoly> eqs{cp.p1 - MultiPoly::var("p1"), cp.p2 - MultiPoly::var("p2"), cp.p3 - MultiPoly::var("p3")};
  const std::vector<std::string> elim{"x1", "x2"};
  std::vector<MultiPoly> linear, rest;
  for (auto& e : eqs) {
    bool lin = true, touches = false;
    for (auto& [ex, coef] : e.coefficients_in(elim)) {
      int deg = ex[0] + ex[1];
      if (deg > 1) lin = false;
      if (deg == 1) {
        touches = true;
        if (!coef.is_constant()) lin = false;
      }
    }
    (lin && touches && linear.size() < 2 ? linear : rest).push_back(e);
  }
  if (linear.size() != 2) throw DerivationFailure("x1, x2 do not enter two equations linearly");
  Matrix<MultiPoly> A(2, 2);
  std::vector<MultiPoly> rhs(2);
  for (int i = 0; i < 2; ++i) {
    A(i, 0) = linear[i].coeff_in("x1", 1);
    A(i, 1) = linear[i].coeff_in("x2", 1);
    rhs[i] = -(linear[i].coeff_in("x1", 0).coeff_in("x2", 0));
  }
  auto sol = bareiss_solve(A, rhs);
  std::map<std::string, RationalFunction> sub{{"x1", sol[0]}, {"x2", sol[1]}};
  RationalFunction cubic = RationalFunction(rest.at(0)).substitute(sub);
  if (!cubic.is_polynomial()) throw DerivationFailure("elimination left a denominator");
  MultiPoly c = cubic.as_polynomial().compacted();
  // normalise to a monic y x3 x4 term
  MultiPoly lead = c.coefficients_in({"y", "x3", "x4"})[Exponents{1, 1, 1}];
  if (!lead.is_constant() || lead.is_zero()) throw DerivationFailure("no y*x3*x4 term");
  return c.scaled(lead.constant_value().inv());
}

inline MultiPoly rank4_fiber_cubic(const CharPoly4T<GaussianRational>& p) {
  static const MultiPoly sym = rank4_fiber_cubic_symbolic();
  return sym.substitute("p1", MultiPoly(p.p1)).substitute("p2", MultiPoly(p.p2)).substitute("p3", MultiPoly(p.p3)).compacted();
}

}  // namespace p5iso
