#pragma once

#include <map>
#include <string>
#include <vector>

#include "../moduli/rank2.hpp"
#include "../algebra/parse.hpp"
#include "linear_matching.hpp"

namespace p5iso {

// unknown'' (or unknown' for order 1) = rhs, where `dsym` names unknown'.
struct ScalarODE {
  std::string unknown;
  std::string dsym;
  int order = 2;
  RationalFunction rhs;
};

template <class S>
struct P5ParamsT {
  S alpha{0}, beta{0}, gamma{0}, delta{0};
};
using P5Params = P5ParamsT<GaussianRational>;

template <class S>
P5ParamsT<S> p5_standard_params(const ThetaT<S>& th) {
  return {th.theta1 * th.theta1 / S(2), -(th.theta0 * th.theta0) / S(2), -th.theta(), S(-1) / S(2)};
}

// Standard P5 right-hand side y'' = F(y, y', t).
template <class S>
S p5_standard_rhs(const S& y, const S& dy, const S& t, const P5ParamsT<S>& p) {
  S ym1 = y - S(1);
  return (S(1) / (S(2) * y) + S(1) / ym1) * dy * dy - dy / t + ym1 * ym1 / (t * t) * (p.alpha * y + p.beta / y) +
         p.gamma * y / t + p.delta * y * (y + S(1)) / ym1;
}

struct LaxPairRank2 {
  DiffOperator A_op;  // d/dz + A on the M1 chart
  DiffOperator B_op;  // d/dt + B; its derivation carries the flow
  std::map<std::string, RationalFunction> flow;  // a0, b0, c1 -> time derivatives
};

namespace lax2_detail {
inline RationalFunction v(const char* s) { return RationalFunction::var(s); }

inline Rank2ChartPointT<RationalFunction> symbolic_m1_point() {
  return Rank2ChartPointT<RationalFunction>::m1(v("a0"), v("b0"), v("c1"), v("t"));
}

// a0^2 expressed through the cubic.
inline MultiPoly cubic_a0_square(const ThetaSym& th) {
  RationalFunction r = -m1_cubic_residual(RationalFunction(0), v("b0"), v("c1"), v("t"), th);
  return r.as_polynomial();
}

inline MultiPoly reduce_poly_mod_cubic(const MultiPoly& p, const MultiPoly& a0sq) {
  int d = p.degree_in("a0");
  if (d < 2) return p;
  MultiPoly out, a0 = MultiPoly::var("a0");
  MultiPoly pw(1);
  std::vector<MultiPoly> rpow{MultiPoly(1)};
  for (int k = 0; k <= d; ++k) {
    MultiPoly ck = p.coeff_in("a0", k);
    while (static_cast<int>(rpow.size()) <= k / 2) rpow.push_back(rpow.back() * a0sq);
    if (!ck.is_zero()) out += ck * rpow[k / 2] * (k % 2 ? a0 : MultiPoly(1));
  }
  return out;
}
}  // namespace lax2_detail

// Reduce a rational function on the M1 chart modulo the cubic relation.
inline RationalFunction reduce_mod_cubic(const RationalFunction& f, const ThetaSym& th) {
  MultiPoly r = lax2_detail::cubic_a0_square(th);
  return RationalFunction(lax2_detail::reduce_poly_mod_cubic(f.num(), r),
                          lax2_detail::reduce_poly_mod_cubic(f.den(), r));
}

inline Matrix<RationalFunction> lax_bracket(const LaxPairRank2& lp) { return lie_bracket(lp.A_op, lp.B_op); }

// Solve [d/dz + A, d/dt + B] = 0 for a traceless B of z-degree <= 2 and the
// flow of (a0, b0, c1).
inline LaxPairRank2 solve_lax_pair(const ThetaSym& th = symbolic_theta()) {
  using RF = RationalFunction;
  auto A = general_to_operator(to_general(lax2_detail::symbolic_m1_point(), th));
  std::vector<std::string> unknowns;
  Matrix<RF> B(2, 2, RF(0));
  RF z = RF::var("z");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k) {
        std::string name = "B" + std::to_string(i + 1) + std::to_string(j + 1) + "_" + std::to_string(k);
        unknowns.push_back(name);
        B(i, j) = B(i, j) + RF::var(name) * z.pow(k);
      }
  std::map<std::string, RF> dsyms{{"a0", RF::var("da0")}, {"b0", RF::var("db0")}, {"c1", RF::var("dc1")}};
  for (auto& [x, d] : dsyms) unknowns.push_back("d" + x);
  DiffOperator Bop(Derivation::dt(dsyms), B);
  auto R = lie_bracket(A, Bop);
  LinearMatcher lm(unknowns, {"z"});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) lm.add_identity(R(i, j).num());
  for (int k = 0; k < 3; ++k) {
    std::string s = std::to_string(k);
    lm.add_identity(MultiPoly::var("B11_" + s) + MultiPoly::var("B22_" + s));
  }
  auto sol = lm.solve();
  Matrix<RF> Bs(2, 2, RF(0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) Bs(i, j) = B(i, j).substitute(sol);
  LaxPairRank2 lp;
  lp.A_op = A;
  for (auto& [x, d] : dsyms) lp.flow[x] = sol.at("d" + x);
  lp.B_op = DiffOperator(Derivation::dt(lp.flow), Bs);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!reduce_mod_cubic(lax_bracket(lp)(i, j), th).is_zero())
        throw DerivationFailure("bracket residual does not vanish for the solved pair");
  return lp;
}

// d/dt of the cubic relation along the flow, reduced modulo the relation.
inline RationalFunction cubic_tangency_residual(const LaxPairRank2& lp, const ThetaSym& th = symbolic_theta()) {
  using namespace lax2_detail;
  RationalFunction F = m1_cubic_residual(v("a0"), v("b0"), v("c1"), v("t"), th);
  return reduce_mod_cubic(lp.B_op.derivation(F), th);
}

// q = -b0; eliminate a0 (from b0') and c1 (from the cubic) to get q'' = F(q, q', t).
inline ScalarODE derive_p5_scalar(const LaxPairRank2& lp, const ThetaSym& th = symbolic_theta()) {
  using RF = RationalFunction;
  using namespace lax2_detail;
  const RF& db0 = lp.flow.at("b0");
  if (db0.den().has_var("a0") && db0.den().degree_in("a0") > 0)
    throw DerivationFailure("b0' has a0 in its denominator: " + db0.str());
  if (db0.num().degree_in("a0") != 1) throw DerivationFailure("b0' is not affine in a0: " + db0.str());
  // db0 = (alpha*a0 + beta)/den  and  db0 = -dq
  MultiPoly alpha = db0.num().coeff_in("a0", 1), beta = db0.num().coeff_in("a0", 0);
  RF a0_of = (RF(-1) * v("dq") * RF(db0.den()) - RF(beta)) / RF(alpha);

  RF F = m1_cubic_residual(v("a0"), v("b0"), v("c1"), v("t"), th);
  if (F.num().degree_in("c1") != 1) throw DerivationFailure("cubic is not affine in c1");
  MultiPoly gam = F.num().coeff_in("c1", 1), del = F.num().coeff_in("c1", 0);
  RF c1_of = RF(-del) / RF(gam);

  RF qdd = RF(-1) * lp.B_op.derivation(db0);
  qdd = qdd.substitute("c1", c1_of);
  qdd = qdd.substitute("a0", a0_of);
  qdd = qdd.substitute("b0", RF(-1) * v("q"));
  return {"q", "dq", 2, qdd};
}

struct CoefficientMatch {
  std::string monomial;  // in q, dq
  std::string derived, target;
  bool match = false;
};

// Clear both sides by the common denominator 2 t^2 q (q-1) and compare the
// coefficients of each monomial in (q, dq) over Q(theta0, theta1, theta, t).
inline std::vector<CoefficientMatch> compare_scalar_odes(const ScalarODE& derived, const ScalarODE& target) {
  using RF = RationalFunction;
  MultiPoly K = parse_rational_function("2*t^2*q*(q-1)").as_polynomial();
  auto clear = [&](const RF& f) {
    auto q = (f.num() * K).divide_exact(f.den());
    return q ? *q : f.num() * K;  // falls back to unnormalised form
  };
  MultiPoly dc = clear(derived.rhs), tc = clear(target.rhs);
  std::vector<std::string> keys{derived.unknown, derived.dsym};
  auto dm = dc.coefficients_in(keys), tm = tc.coefficients_in(keys);
  std::map<Exponents, bool> all;
  for (auto& [e, c] : dm) all[e] = true;
  for (auto& [e, c] : tm) all[e] = true;
  std::vector<CoefficientMatch> out;
  for (auto& [e, unused] : all) {
    MultiPoly a = dm.count(e) ? dm[e] : MultiPoly(), b = tm.count(e) ? tm[e] : MultiPoly();
    std::string mono;
    for (size_t k = 0; k < keys.size(); ++k)
      if (e[k]) mono += (mono.empty() ? "" : "*") + keys[k] + (e[k] > 1 ? "^" + std::to_string(e[k]) : "");
    out.push_back({mono.empty() ? "1" : mono, a.compacted().str(), b.compacted().str(), a == b});
  }
  return out;
}

// Substitute q = y/(y-1) and return y'' = G(y, y', t).
inline RationalFunction scalar_in_y(const ScalarODE& q_eq) {
  using RF = RationalFunction;
  RF y = RF::var("y"), dy = RF::var("dy"), ym1 = y - RF(1);
  RF qdd = q_eq.rhs.substitute(q_eq.dsym, RF(-1) * dy / ym1.pow(2)).substitute(q_eq.unknown, y / ym1);
  // q'' = -y''/(y-1)^2 + 2 y'^2/(y-1)^3
  return ym1.pow(2) * (RF(2) * dy * dy / ym1.pow(3) - qdd);
}

inline RationalFunction p5_standard_rhs_symbolic(const P5ParamsT<RationalFunction>& p) {
  using RF = RationalFunction;
  return p5_standard_rhs(RF::var("y"), RF::var("dy"), RF::var("t"), p);
}

// A Riccati equation u' = r0 + r1 u + r2 u^2 for u = b1/b0 on the reducible locus.
struct RiccatiResult {
  ScalarODE ode;
  RationalFunction r0, r1, r2;
  std::map<std::string, RationalFunction> partner;  // alpha1, beta0, beta1
};

// Theta is optional: when absent, theta0, theta1 stay symbolic and theta is
// eliminated through the compatibility relation.
inline RiccatiResult derive_riccati(std::array<int, 3> eps, const std::optional<Theta>& th_num = std::nullopt) {
  using RF = RationalFunction;
  for (int e : eps)
    if (e != 1 && e != -1) throw InvalidParameter("eps must be +-1");
  ThetaSym th = symbolic_theta();
  if (th_num) {
    th = lift(*th_num);
    if (!(th.theta() - reducible_theta(eps[0], eps[1], eps[2], th)).is_zero())
      throw NoSuchReduciblePoint("theta is not eps2*(eps1*theta1 - eps0*theta0 + 1)");
  } else {
    th.theta_inf = reducible_theta(eps[0], eps[1], eps[2], th) - RF(1);
  }
  auto g = reducible_general(eps[0], eps[1], eps[2], RF::var("b0"), RF::var("b1"), RF::var("t"), th);
  auto A = general_to_operator(g);
  RF z = RF::var("z");
  // gauge fixed by alpha0 = 0
  RF alpha = RF::var("alpha1") * z, beta = RF::var("beta0") + RF::var("beta1") * z;
  Matrix<RF> B{{alpha, RF(0)}, {beta, RF(-1) * alpha}};
  std::map<std::string, RF> dsyms{{"b0", RF::var("db0")}, {"b1", RF::var("db1")}};
  auto R = lie_bracket(A, DiffOperator(Derivation::dt(dsyms), B));
  LinearMatcher lm({"alpha1", "beta0", "beta1", "db0", "db1"}, {"z"});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) lm.add_identity(R(i, j).num());
  auto sol = lm.solve();
  RF b0 = RF::var("b0"), b1 = RF::var("b1");
  RF du = (sol.at("db1") * b0 - b1 * sol.at("db0")) / (b0 * b0);
  du = du.substitute("b1", RF::var("u") * b0);
  if (du.num().has_var("b0") && (du.num().degree_in("b0") > 0 || du.den().degree_in("b0") > 0)) {
    // the ratio must not depend on the scaling of (b0, b1)
    RF probe = du.substitute("b0", RF(1));
    if (probe != du) throw DerivationFailure("u' depends on b0: " + du.str());
    du = probe;
  }
  if (du.den().degree_in("u") > 0 || du.num().degree_in("u") > 2)
    throw DerivationFailure("u' is not a Riccati right side: " + du.str());
  RiccatiResult res;
  res.ode = {"u", "du", 1, du};
  MultiPoly n = du.num();
  RF den(du.den());
  res.r0 = RF(n.coeff_in("u", 0)) / den;
  res.r1 = RF(n.coeff_in("u", 1)) / den;
  res.r2 = RF(n.coeff_in("u", 2)) / den;
  res.partner = {{"alpha1", sol.at("alpha1")}, {"beta0", sol.at("beta0")}, {"beta1", sol.at("beta1")}};
  return res;
}

}  // namespace p5iso
