#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "../algebra/diff_operator.hpp"
#include "../algebra/scalar.hpp"

namespace p5iso {

template <class S>
struct ThetaT {
  S theta0{0}, theta1{0}, theta_inf{0};
  S theta() const { return theta_inf + S(1); }
};
using Theta = ThetaT<GaussianRational>;
using ThetaNum = ThetaT<cplx>;
using ThetaSym = ThetaT<RationalFunction>;

// theta0, theta1 and theta = theta_inf + 1 as free symbols.
inline ThetaSym symbolic_theta() {
  return {RationalFunction::var("theta0"), RationalFunction::var("theta1"),
          RationalFunction::var("theta") - RationalFunction(1)};
}
inline ThetaSym lift(const Theta& th) { return {th.theta0, th.theta1, th.theta_inf}; }
inline ThetaNum to_numeric(const Theta& th) { return {th.theta0.to_complex(), th.theta1.to_complex(), th.theta_inf.to_complex()}; }

enum class Rank2Chart { M1, M2 };

// M1: (a0, b0, c1, t). M2: (A2, B1, C1, C2, C3, t) with C0 = theta0^2/4.
template <class S>
struct Rank2ChartPointT {
  Rank2Chart chart = Rank2Chart::M1;
  S a0{0}, b0{0}, c1{0};
  S A2{0}, B1{0}, C1{0}, C2{0}, C3{0};
  S t{1};

  static Rank2ChartPointT m1(S a0, S b0, S c1, S t) {
    Rank2ChartPointT p;
    p.chart = Rank2Chart::M1;
    p.a0 = a0;
    p.b0 = b0;
    p.c1 = c1;
    p.t = t;
    return p;
  }
  static Rank2ChartPointT m2(S A2, S B1, S C1, S C2, S C3, S t) {
    Rank2ChartPointT p;
    p.chart = Rank2Chart::M2;
    p.A2 = A2;
    p.B1 = B1;
    p.C1 = C1;
    p.C2 = C2;
    p.C3 = C3;
    p.t = t;
    return p;
  }
};
using Rank2ChartPoint = Rank2ChartPointT<GaussianRational>;

// The general operator d/dz + N/(z(z-1)) with N = [[a, c], [b, -a]],
// a = a0+a1 z+a2 z^2, b = b0+b1 z, c = c0+...+c3 z^3.
template <class S>
struct GeneralOperatorT {
  UPoly<S> a{S(0), S(0), S(0)}, b{S(0), S(0)}, c{S(0), S(0), S(0), S(0)};
  S t{1};
};

// g(e1) = lambda1 e1, g(e2) = lambda2 e2 + (alpha + beta z) e1.
template <class S>
struct GaugeTransformT {
  S lambda1{1}, lambda2{1}, alpha{0}, beta{0};
};

template <class S>
std::array<S, 4> m1_c_coeffs(const Rank2ChartPointT<S>& p, const ThetaT<S>& th) {
  const S& t = p.t;
  const S& b0 = p.b0;
  S th_ = th.theta();
  S c3 = t * t / S(4);
  S c2 = th_ * t / S(2) - (b0 + S(2)) * t * t / S(4);
  S c0 = th.theta1 * th.theta1 / S(4) - th.theta0 * th.theta0 / S(4) -
         (b0 + S(1)) * (p.c1 - (b0 + S(1)) * t * t / S(4) + th_ * t / S(2));
  return {c0, p.c1, c2, c3};
}

// Right side minus left side of the M1 cubic a0^2 = ... .
template <class S>
S m1_cubic_residual(const S& a0, const S& b0, const S& c1, const S& t, const ThetaT<S>& th) {
  S th_ = th.theta();
  S rhs = -(t * t / S(4)) * b0 * b0 * b0 + (-(t * t) / S(2) + th_ * t / S(2) + c1) * b0 * b0 +
          (-(th.theta1 * th.theta1) / S(4) + th.theta0 * th.theta0 / S(4) + th_ * t / S(2) - t * t / S(4) + c1) * b0 +
          th.theta0 * th.theta0 / S(4);
  return a0 * a0 - rhs;
}

template <class S>
GeneralOperatorT<S> to_general(const Rank2ChartPointT<S>& p, const ThetaT<S>& th) {
  GeneralOperatorT<S> g;
  g.t = p.t;
  if (p.chart == Rank2Chart::M1) {
    auto c = m1_c_coeffs(p, th);
    g.a = {p.a0, S(0), S(0)};
    g.b = {p.b0, S(1)};
    g.c = {c[0], c[1], c[2], c[3]};
  } else {
    g.a = {S(0), S(0), p.A2};
    g.b = {S(1), p.B1};
    g.c = {th.theta0 * th.theta0 / S(4), p.C1, p.C2, p.C3};
  }
  return g;
}

// Determinant relations at 0, 1 and infinity (four of them), as lhs - rhs.
template <class S>
std::vector<S> general_residuals(const GeneralOperatorT<S>& g, const ThetaT<S>& th) {
  const auto& a = g.a;
  const auto& b = g.b;
  const auto& c = g.c;
  const S& t = g.t;
  S a_at1 = up_eval(a, S(1)), b_at1 = up_eval(b, S(1)), c_at1 = up_eval(c, S(1));
  return {
      a[0] * a[0] + b[0] * c[0] - th.theta0 * th.theta0 / S(4),
      a_at1 * a_at1 + b_at1 * c_at1 - th.theta1 * th.theta1 / S(4),
      a[2] * a[2] + b[1] * c[3] - t * t / S(4),
      S(2) * a[2] * a[2] + S(2) * a[1] * a[2] + a[2] + b[0] * c[3] + b[1] * c[2] + S(2) * b[1] * c[3] -
          t * th.theta() / S(2),
  };
}

template <class S>
GeneralOperatorT<S> apply_gauge(const GeneralOperatorT<S>& g, const GaugeTransformT<S>& G) {
  if (scalar_is_zero(G.lambda1, 0) || scalar_is_zero(G.lambda2, 0))
    throw InvalidParameter("gauge scalars must be nonzero");
  UPoly<S> q{G.alpha / G.lambda2, G.beta / G.lambda2};
  S r = G.lambda2 / G.lambda1;
  GeneralOperatorT<S> out;
  out.t = g.t;
  UPoly<S> na = up_add(g.a, up_scale(S(-1), up_mul(q, g.b)));
  UPoly<S> nb = up_scale(S(1) / r, g.b);
  UPoly<S> zz{S(0), S(-1), S(1)};
  UPoly<S> inner = up_add(up_add(g.c, up_scale(S(2), up_mul(g.a, q))),
                          up_add(up_scale(S(-1), up_mul(g.b, up_mul(q, q))), up_scale(q[1], zz)));
  UPoly<S> nc = up_scale(r, inner);
  na.resize(std::max<size_t>(na.size(), 3), S(0));
  nc.resize(std::max<size_t>(nc.size(), 4), S(0));
  out.a = na;
  out.b = nb;
  out.c = nc;
  return out;
}

// Gauge normalisation into M1 (b1 = 1, a1 = a2 = 0); needs b1 != 0.
template <class S>
std::pair<Rank2ChartPointT<S>, GaugeTransformT<S>> normalize_to_m1(const GeneralOperatorT<S>& g, double tol = 0) {
  const S& b0 = g.b[0];
  const S& b1 = g.b[1];
  if (scalar_is_zero(b1, tol)) throw OutsideOverlap("b1 = 0: point is not in chart M1");
  S q1 = g.a[2] / b1;
  S q0 = (g.a[1] - q1 * b0) / b1;
  GaugeTransformT<S> G{S(1), b1, q0 * b1, q1 * b1};
  auto n = apply_gauge(g, G);
  return {Rank2ChartPointT<S>::m1(n.a[0], n.b[0], n.c[1], g.t), G};
}

// Gauge normalisation into M2 (b0 = 1, a0 = a1 = 0); needs b0 != 0.
template <class S>
std::pair<Rank2ChartPointT<S>, GaugeTransformT<S>> normalize_to_m2(const GeneralOperatorT<S>& g, double tol = 0) {
  const S& b0 = g.b[0];
  const S& b1 = g.b[1];
  if (scalar_is_zero(b0, tol)) throw OutsideOverlap("b0 = 0: point is not in chart M2");
  S q0 = g.a[0] / b0;
  S q1 = (g.a[1] - q0 * b1) / b0;
  GaugeTransformT<S> G{S(1), b0, q0 * b0, q1 * b0};
  auto n = apply_gauge(g, G);
  return {Rank2ChartPointT<S>::m2(n.a[2], n.b[1], n.c[1], n.c[2], n.c[3], g.t), G};
}

template <class S>
std::vector<S> chart_residuals(const Rank2ChartPointT<S>& p, const ThetaT<S>& th) {
  if (scalar_is_zero(p.t, 0)) throw InvalidParameter("t = 0");
  if (p.chart == Rank2Chart::M1) return {m1_cubic_residual(p.a0, p.b0, p.c1, p.t, th)};
  auto r = general_residuals(to_general(p, th), th);
  return {r[1], r[2], r[3]};
}

template <class S>
bool on_moduli(const Rank2ChartPointT<S>& p, const ThetaT<S>& th, double tol = 1e-10) {
  for (auto& r : chart_residuals(p, th))
    if (!scalar_is_zero(r, tol)) return false;
  return true;
}

template <class S>
Rank2ChartPointT<S> chart_transition(const Rank2ChartPointT<S>& p, Rank2Chart target, const ThetaT<S>& th,
                                     double tol = 0) {
  if (p.chart == target) return p;
  auto g = to_general(p, th);
  return target == Rank2Chart::M1 ? normalize_to_m1(g, tol).first : normalize_to_m2(g, tol).first;
}

// N(z) entries as polynomials in z over S.
template <class S>
std::array<std::array<UPoly<S>, 2>, 2> numerator_matrix(const GeneralOperatorT<S>& g) {
  return {{{g.a, g.c}, {g.b, up_scale(S(-1), g.a)}}};
}

inline RationalFunction to_rf(const GaussianRational& x) { return RationalFunction(x); }
inline RationalFunction to_rf(const RationalFunction& x) { return x; }

// d/dz + N/(z(z-1)) as a DiffOperator over Q(i)(z, ...).
template <class S>
DiffOperator general_to_operator(const GeneralOperatorT<S>& g) {
  auto N = numerator_matrix(g);
  RationalFunction z = RationalFunction::var("z");
  RationalFunction inv = RationalFunction(1) / (z * (z - RationalFunction(1)));
  Matrix<RationalFunction> M(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      RationalFunction e(0);
      for (size_t k = N[i][j].size(); k-- > 0;) e = e * z + to_rf(N[i][j][k]);
      M(i, j) = e * inv;
    }
  return DiffOperator(Derivation::dz(), M);
}

template <class S>
DiffOperator to_operator(const Rank2ChartPointT<S>& p, const ThetaT<S>& th) {
  for (auto& r : chart_residuals(p, th))
    if (!scalar_is_zero(r, 0)) throw NotOnModuli("chart relation residual " + scalar_str(r));
  return general_to_operator(to_general(p, th));
}

// Read (a0, b0, c1) back off an M1-normalised operator d/dz + N/(z(z-1)).
inline Rank2ChartPoint extract_m1(const DiffOperator& op, const GaussianRational& t) {
  RationalFunction z = RationalFunction::var("z");
  RationalFunction zz = z * (z - RationalFunction(1));
  auto entry = [&](int i, int j, int k) {
    RationalFunction e = op.matrix(i, j) * zz;
    if (!e.is_polynomial()) throw OutsideChart("operator is not of the form d/dz + N/(z(z-1))");
    MultiPoly p = e.as_polynomial();
    MultiPoly c = p.has_var("z") ? p.coeff_in("z", k) : (k == 0 ? p : MultiPoly());
    if (!c.is_constant()) throw OutsideChart("entry depends on symbols other than z");
    return c.constant_value();
  };
  if (!entry(1, 0, 1).is_one() || !entry(0, 0, 1).is_zero() || !entry(0, 0, 2).is_zero())
    throw OutsideChart("operator is not in M1 normal form");
  return Rank2ChartPoint::m1(entry(0, 0, 0), entry(1, 0, 0), entry(0, 1, 1), t);
}

// Reducible locus: lower-triangular operators with diagonal +-(a0+a1 z+a2 z^2).
struct ReducibleParams {
  int eps0 = 1, eps1 = 1, eps2 = 1;
  GaussianRational b0{0}, b1{1};
  GaussianRational t{1};
};

template <class S>
S reducible_theta(int e0, int e1, int e2, const ThetaT<S>& th) {
  return S(e2) * (S(e1) * th.theta1 - S(e0) * th.theta0 + S(1));
}

template <class S>
GeneralOperatorT<S> reducible_general(int e0, int e1, int e2, const S& b0, const S& b1, const S& t,
                                      const ThetaT<S>& th, double tol = 0) {
  if (!scalar_is_zero(th.theta() - reducible_theta(e0, e1, e2, th), tol))
    throw NoSuchReduciblePoint("theta is not eps2*(eps1*theta1 - eps0*theta0 + 1)");
  if (scalar_is_zero(b0, tol) && scalar_is_zero(b1, tol)) throw InvalidParameter("[b0:b1] = [0:0]");
  GeneralOperatorT<S> g;
  g.t = t;
  S a0 = S(e0) * th.theta0 / S(2);
  S a2 = S(e2) * t / S(2);
  S a1 = S(e1) * th.theta1 / S(2) - a0 - a2;
  g.a = {a0, a1, a2};
  g.b = {b0, b1};
  g.c = {S(0), S(0), S(0), S(0)};
  return g;
}

inline DiffOperator reducible_operator(const ReducibleParams& r, const Theta& th) {
  for (int e : {r.eps0, r.eps1, r.eps2})
    if (e != 1 && e != -1) throw InvalidParameter("eps must be +-1");
  return general_to_operator(reducible_general(r.eps0, r.eps1, r.eps2, r.b0, r.b1, r.t, th));
}

// All sign triples admitting a reducible point for the given parameters.
template <class S>
std::vector<std::array<int, 3>> admissible_eps(const ThetaT<S>& th, double tol = 0) {
  std::vector<std::array<int, 3>> out;
  for (int e0 : {1, -1})
    for (int e1 : {1, -1})
      for (int e2 : {1, -1})
        if (scalar_is_zero(th.theta() - reducible_theta(e0, e1, e2, th), tol)) out.push_back({e0, e1, e2});
  return out;
}

// Projective pair [y1:y2].
template <class S>
struct ProjPair {
  S y1{1}, y2{0};
};

template <class S>
struct ParabolicPointT {
  Rank2ChartPointT<S> base;
  std::optional<ProjPair<S>> line0, line1;
};
using ParabolicPoint = ParabolicPointT<GaussianRational>;

inline bool is_integer(const GaussianRational& x) { return x.is_real() && x.re().get_den() == 1; }
inline GaussianRational abs_real(const GaussianRational& x) {
  return x.re() < 0 ? -x : x;
}

// Residue of N/(z(z-1)) at z = 0 is -N(0); at z = 1 it is N(1).
inline Matrix<GaussianRational> residue_matrix(const GeneralOperatorT<GaussianRational>& g, int at) {
  auto N = numerator_matrix(g);
  GaussianRational zp(at), s(at == 0 ? -1 : 1);
  Matrix<GaussianRational> R(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) R(i, j) = s * up_eval(N[i][j], zp);
  return R;
}

// [y1:y2] must be an eigenvector of the residue with eigenvalue -|theta|/2.
inline bool parabolic_lift_check(const ParabolicPoint& pp, const Theta& th) {
  auto g = to_general(pp.base, th);
  auto check = [&](const ProjPair<GaussianRational>& v, int at, const GaussianRational& theta_j) {
    if (!is_integer(theta_j))
      throw UnexpectedParabolicData("eigenline supplied at z=" + std::to_string(at) + " but theta is not an integer");
    if (v.y1.is_zero() && v.y2.is_zero()) throw InvalidParameter("[0:0] is not a projective point");
    auto R = residue_matrix(g, at);
    GaussianRational eta = -abs_real(theta_j) / GaussianRational(2);
    GaussianRational r1 = R(0, 0) * v.y1 + R(0, 1) * v.y2 - eta * v.y1;
    GaussianRational r2 = R(1, 0) * v.y1 + R(1, 1) * v.y2 - eta * v.y2;
    return r1.is_zero() && r2.is_zero();
  };
  bool ok = true;
  if (pp.line0) ok &= check(*pp.line0, 0, th.theta0);
  if (pp.line1) ok &= check(*pp.line1, 1, th.theta1);
  return ok;
}

}  // namespace p5iso
