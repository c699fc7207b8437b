#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "../algebra/diff_operator.hpp"
#include "../algebra/scalar.hpp"
#include "lax2.hpp"
#include "linear_matching.hpp"

namespace p5iso {

// ---------------------------------------------------------------------------
// Equivariant arithmetic on N = C(z^{1/4}) (x) M with basis e0..e3.
// Coefficients are Laurent polynomials in w = z^{1/4} over Q(i)(params).

using WPoly = std::map<int, RationalFunction>;
using NElem = std::array<WPoly, 4>;

namespace r4 {
inline RationalFunction v(const std::string& s) { return RationalFunction::var(s); }
inline RationalFunction ipow(int k) {
  static const GaussianRational I[4] = {GaussianRational(1), GaussianRational::i(), GaussianRational(-1),
                                        -GaussianRational::i()};
  return RationalFunction(I[((k % 4) + 4) % 4]);
}

inline void add_into(WPoly& a, int k, const RationalFunction& c) {
  if (c.is_zero()) return;
  auto it = a.find(k);
  if (it == a.end()) {
    a.emplace(k, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) a.erase(it);
  }
}
inline WPoly add(const WPoly& a, const WPoly& b) {
  WPoly r = a;
  for (auto& [k, c] : b) add_into(r, k, c);
  return r;
}
inline WPoly mul(const WPoly& a, const WPoly& b) {
  WPoly r;
  for (auto& [i, x] : a)
    for (auto& [j, y] : b) add_into(r, i + j, x * y);
  return r;
}
inline WPoly scale(const RationalFunction& s, const WPoly& a) {
  WPoly r;
  for (auto& [k, c] : a) add_into(r, k, s * c);
  return r;
}
inline WPoly mono(int k, const RationalFunction& c = RationalFunction(1)) {
  WPoly r;
  add_into(r, k, c);
  return r;
}
// gamma^j : w -> i^j w
inline WPoly twist(const WPoly& a, int j) {
  WPoly r;
  for (auto& [k, c] : a) add_into(r, k, ipow(j * k) * c);
  return r;
}
inline NElem add(const NElem& a, const NElem& b) {
  NElem r;
  for (int j = 0; j < 4; ++j) r[j] = add(a[j], b[j]);
  return r;
}
inline NElem scale(const WPoly& s, const NElem& a) {
  NElem r;
  for (int j = 0; j < 4; ++j) r[j] = mul(s, a[j]);
  return r;
}
inline bool is_zero(const NElem& a) {
  for (auto& p : a)
    if (!p.empty()) return false;
  return true;
}
}  // namespace r4

// A sigma-equivariant operator, fixed by the image of e0 and by the way it
// differentiates scalar coefficients.
struct EquivariantOperator {
  NElem image_e0;
  std::function<WPoly(const WPoly&)> deriv;

  NElem image(int j) const {
    NElem r;
    for (int k = 0; k < 4; ++k) r[(k + j) % 4] = r4::twist(image_e0[k], j);
    return r;
  }
  NElem apply(const NElem& x) const {
    NElem r;
    for (int j = 0; j < 4; ++j) {
      if (x[j].empty()) continue;
      r[j] = r4::add(r[j], deriv(x[j]));
      r = r4::add(r, r4::scale(x[j], image(j)));
    }
    return r;
  }
};

// z d/dz on Laurent polynomials in w: w^k -> (k/4) w^k.
inline WPoly zdz_w(const WPoly& a) {
  WPoly r;
  for (auto& [k, c] : a) r4::add_into(r, k, RationalFunction(GaussianRational::frac(k, 4)) * c);
  return r;
}

// d/dt on coefficients, chain rule through `deps`.
inline std::function<WPoly(const WPoly&)> dt_w(std::map<std::string, RationalFunction> deps) {
  Derivation d = Derivation::dt(std::move(deps));
  return [d](const WPoly& a) {
    WPoly r;
    for (auto& [k, c] : a) r4::add_into(r, k, d(c));
    return r;
  };
}

// Basis vectors w^{shift_m} * sum_j i^{jm} e_j.
struct InvariantBasis {
  std::array<int, 4> shift;
  static InvariantBasis standard() { return {{0, 1, 2, 3}}; }
  static InvariantBasis canonical() { return {{0, -3, -2, -1}}; }

  NElem vec(int m) const {
    NElem r;
    for (int j = 0; j < 4; ++j) r[j] = r4::mono(shift[m], r4::ipow(j * m));
    return r;
  }
  // Coordinates (as functions of z) of a sigma-invariant element.
  std::array<RationalFunction, 4> coords(const NElem& x) const {
    std::array<RationalFunction, 4> c;
    RationalFunction z = RationalFunction::var("z");
    for (auto& [k, coef] : x[0]) {
      int n = ((k % 4) + 4) % 4;
      int l = (k - shift[n]);
      if (l % 4 != 0) throw DerivationFailure("exponent does not fit the basis");
      c[n] += coef * z.pow(l / 4);
    }
    // invariance check: rebuild and compare
    NElem back;
    for (int m = 0; m < 4; ++m) {
      NElem bm = vec(m);
      for (int j = 0; j < 4; ++j)
        for (auto& [k, cc] : bm[j]) {
          // c[m] is a Laurent polynomial in z = w^4
          const RationalFunction& cm = c[m];
          if (cm.is_zero()) continue;
          MultiPoly num = cm.num();
          MultiPoly den = cm.den();
          auto dz = den.coefficients_in({"z"});
          if (dz.size() != 1) throw DerivationFailure("coordinate is not a Laurent polynomial in z");
          int dzexp = dz.begin()->first[0];
          RationalFunction dcoef(dz.begin()->second);
          for (auto& [e, nc] : num.coefficients_in({"z"}))
            r4::add_into(back[j], k + 4 * (e[0] - dzexp), cc * RationalFunction(nc) / dcoef);
        }
    }
    for (int j = 0; j < 4; ++j)
      if (!r4::is_zero(NElem{r4::add(back[j], r4::scale(RationalFunction(-1), x[j])), {}, {}, {}}))
        throw DerivationFailure("element is not sigma-invariant");
    return c;
  }
  // Matrix (column convention) of an equivariant operator on this basis.
  Matrix<RationalFunction> matrix_of(const EquivariantOperator& op) const {
    Matrix<RationalFunction> M(4, 4);
    for (int m = 0; m < 4; ++m) {
      auto c = coords(op.apply(vec(m)));
      for (int n = 0; n < 4; ++n) M(n, m) = c[n];
    }
    return M;
  }
};

// e-basis coefficients (a1, a2, a3, b1, b3) and t.
struct Rank4Alt {
  RationalFunction a1, a2, a3, b1, b3, t;
  static Rank4Alt symbolic() { return {r4::v("a1"), r4::v("a2"), r4::v("a3"), r4::v("b1"), r4::v("b3"), r4::v("t")}; }
};

// D(e0) = (w^2 + (t/4) w + c) e0 + (a1 + b1 w) e1 + a2 e2 + (a3 + b3 w) e3,
// c = -3/8 for the basis of invariants and +3/8 for the canonical lattice.
inline EquivariantOperator d_operator(const Rank4Alt& p, const GaussianRational& c) {
  using RF = RationalFunction;
  NElem e;
  e[0] = r4::add(r4::add(r4::mono(2), r4::mono(1, p.t / RF(4))), r4::mono(0, RF(c)));
  e[1] = r4::add(r4::mono(0, p.a1), r4::mono(1, p.b1));
  e[2] = r4::mono(0, p.a2);
  e[3] = r4::add(r4::mono(0, p.a3), r4::mono(1, p.b3));
  return {e, zdz_w};
}

// E(e0) = w e0 + h1 e1 + h2 e2 + h3 e3.
inline EquivariantOperator e_operator(const RationalFunction& h1, const RationalFunction& h2,
                                      const RationalFunction& h3, std::map<std::string, RationalFunction> deps) {
  NElem e;
  e[0] = r4::mono(1);
  e[1] = r4::mono(0, h1);
  e[2] = r4::mono(0, h2);
  e[3] = r4::mono(0, h3);
  return {e, dt_w(std::move(deps))};
}

// ---------------------------------------------------------------------------
// Parameters and the entry dictionary between (eps, f) and (a, b).

template <class S>
struct Rank4ParamsT {
  std::array<S, 4> eps{};
  std::array<S, 4> f{};
  S a1{0}, a2{0}, a3{0}, b1{0}, b3{0};
  S t{1};
};
using Rank4Params = Rank4ParamsT<RationalFunction>;

template <class S>
S imag_unit();
template <>
inline RationalFunction imag_unit<RationalFunction>() {
  return RationalFunction(GaussianRational::i());
}
template <>
inline GaussianRational imag_unit<GaussianRational>() {
  return GaussianRational::i();
}
template <>
inline cplx imag_unit<cplx>() {
  return cplx(0, 1);
}

template <class S>
std::array<S, 4> f_from_b(const S& b1, const S& b3, const S& t) {
  S I = imag_unit<S>(), q = t / S(4);
  return {q + b1 + b3, q - I * b1 + I * b3, q - b1 - b3, q + I * b1 - I * b3};
}
template <class S>
std::array<S, 4> eps_from_a(const S& a1, const S& a2, const S& a3) {
  S I = imag_unit<S>();
  return {S(-3) / S(8) + a1 + a2 + a3, S(-1) / S(8) - I * a1 - a2 + I * a3, S(1) / S(8) - a1 + a2 - a3,
          S(3) / S(8) + I * a1 - a2 - I * a3};
}
// inverse of f_from_b on the constraint surface
template <class S>
std::pair<S, S> b_from_f(const S& f0, const S& f1, const S& t) {
  S I = imag_unit<S>(), q = t / S(4);
  S u = f0 - q, v = I * (f1 - q);
  return {(u + v) / S(2), (u - v) / S(2)};
}
template <class S>
std::array<S, 3> a_from_eps(const std::array<S, 4>& e) {
  S I = imag_unit<S>();
  S e0 = e[0] + S(3) / S(8), e1 = e[1] + S(1) / S(8), e2 = e[2] - S(1) / S(8), e3 = e[3] - S(3) / S(8);
  S a2 = (e0 + e2) / S(2);
  S s = (e0 - e2) / S(2);             // a1 + a3
  S d = (e3 - e1) / (S(2) * I);       // a1 - a3
  return {(s + d) / S(2), a2, (s - d) / S(2)};
}

template <class S>
void validate_params(const Rank4ParamsT<S>& p, double tol = 0) {
  if (!scalar_is_zero(p.eps[0] + p.eps[1] + p.eps[2] + p.eps[3], tol)) throw InvalidParams("sum of eps is not 0");
  if (!scalar_is_zero(p.f[0] + p.f[2] - p.t / S(2), tol) || !scalar_is_zero(p.f[1] + p.f[3] - p.t / S(2), tol))
    throw InvalidParams("f0 + f2 = f1 + f3 = t/2 violated");
}

// z d/dz + [[eps0,0,z,z f0],[f1,eps1,0,z],[1,f2,eps2,0],[0,1,f3,eps3]].
inline Matrix<RationalFunction> d_matrix_f_form(const std::array<RationalFunction, 4>& e,
                                                const std::array<RationalFunction, 4>& f) {
  using RF = RationalFunction;
  RF z = RF::var("z"), O(0), one(1);
  return Matrix<RF>{{e[0], O, z, z * f[0]}, {f[1], e[1], O, z}, {one, f[2], e[2], O}, {O, one, f[3], e[3]}};
}

inline DiffOperator build_D(const Rank4Params& p) {
  validate_params(p);
  return DiffOperator(Derivation::zdz(), d_matrix_f_form(p.eps, p.f));
}

inline DiffOperator build_D_equivariant(const Rank4Alt& p) {
  return DiffOperator(Derivation::zdz(), InvariantBasis::standard().matrix_of(d_operator(p, GaussianRational::frac(-3, 8))));
}

inline Matrix<RationalFunction> e_matrix(const std::array<RationalFunction, 4>& g) {
  using RF = RationalFunction;
  RF z = RF::var("z"), O(0), one(1);
  return Matrix<RF>{{g[0], O, O, z}, {one, g[1], O, O}, {O, one, g[2], O}, {O, O, one, g[3]}};
}

inline DiffOperator build_E(const std::array<RationalFunction, 4>& g,
                            std::map<std::string, RationalFunction> deps = {}) {
  if (!(g[0] + g[1] + g[2] + g[3]).is_zero()) throw InvalidParams("sum of g is not 0");
  return DiffOperator(Derivation::dt(std::move(deps)), e_matrix(g));
}

// Matrix of E on the basis of invariants when E(e0) = w e0 + sum h_j e_j.
inline Matrix<RationalFunction> e_matrix_from_h(const RationalFunction& h1, const RationalFunction& h2,
                                                const RationalFunction& h3) {
  return InvariantBasis::standard().matrix_of(e_operator(h1, h2, h3, {}));
}

// ---------------------------------------------------------------------------
// Derivations.

struct FSystem {
  RationalFunction df0, df1;               // f0', f1' in terms of f0, f1, t, eps
  std::array<RationalFunction, 4> g;       // solved E diagonal
  RationalFunction two_t_df0() const { return RationalFunction(2) * RationalFunction::var("t") * df0; }
  RationalFunction two_t_df1() const { return RationalFunction(2) * RationalFunction::var("t") * df1; }
};

inline FSystem derive_f_system() {
  using RF = RationalFunction;
  RF t = r4::v("t");
  std::array<RF, 4> eps{r4::v("eps0"), r4::v("eps1"), r4::v("eps2"), r4::v("eps3")};
  std::array<RF, 4> f{r4::v("f0"), r4::v("f1"), t / RF(2) - r4::v("f0"), t / RF(2) - r4::v("f1")};
  DiffOperator D(Derivation::zdz(), d_matrix_f_form(eps, f));
  std::array<RF, 4> g{r4::v("g0"), r4::v("g1"), r4::v("g2"), RF(-1) * (r4::v("g0") + r4::v("g1") + r4::v("g2"))};
  DiffOperator E(Derivation::dt({{"f0", r4::v("df0")}, {"f1", r4::v("df1")}}), e_matrix(g));
  auto R = lie_bracket(D, E);
  LinearMatcher lm({"g0", "g1", "g2", "df0", "df1"}, {"z"});
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) lm.add_identity(R(i, j).num());
  auto sol = lm.solve();
  FSystem fs;
  fs.df0 = sol.at("df0");
  fs.df1 = sol.at("df1");
  fs.g = {sol.at("g0"), sol.at("g1"), sol.at("g2"), RF(-1) * (sol.at("g0") + sol.at("g1") + sol.at("g2"))};
  return fs;
}

struct BSystem {
  RationalFunction db1, db3, h1, h2, h3;
  RationalFunction H;  // Hamiltonian transcribed for the identity checks
};

inline BSystem derive_b_hamiltonian() {
  using RF = RationalFunction;
  Rank4Alt p = Rank4Alt::symbolic();
  auto D = d_operator(p, GaussianRational::frac(-3, 8));
  auto E = e_operator(r4::v("h1"), r4::v("h2"), r4::v("h3"), {{"b1", r4::v("db1")}, {"b3", r4::v("db3")}});
  NElem e0;
  e0[0] = r4::mono(0);
  NElem lhs = D.apply(E.apply(e0)), rhs = E.apply(D.apply(e0));
  LinearMatcher lm({"h1", "h2", "h3", "db1", "db3"}, {});
  for (int j = 0; j < 4; ++j) {
    WPoly diff = r4::add(lhs[j], r4::scale(RF(-1), rhs[j]));
    for (auto& [k, c] : diff) lm.add_identity(c.num());
  }
  auto sol = lm.solve();
  BSystem b;
  b.db1 = sol.at("db1");
  b.db3 = sol.at("db3");
  b.h1 = sol.at("h1");
  b.h2 = sol.at("h2");
  b.h3 = sol.at("h3");
  return b;
}

struct CanonicalFG {
  RationalFunction df, dg;
  std::array<RationalFunction, 4> k;  // E diagonal on the canonical basis
};

// z d/dz + [[eps0,0,1,g],[z f,eps1,0,z],[z,t/2-g,eps2,0],[0,1,t/2-f,eps3]], eps3 = -eps0-eps1-eps2.
inline Matrix<RationalFunction> canonical_d_matrix_fg(const RationalFunction& f, const RationalFunction& g,
                                                      const std::array<RationalFunction, 4>& e) {
  using RF = RationalFunction;
  RF z = RF::var("z"), t = r4::v("t"), O(0), one(1);
  return Matrix<RF>{{e[0], O, one, g}, {z * f, e[1], O, z}, {z, t / RF(2) - g, e[2], O}, {O, one, t / RF(2) - f, e[3]}};
}
inline Matrix<RationalFunction> canonical_e_matrix(const std::array<RationalFunction, 4>& k) {
  using RF = RationalFunction;
  RF z = RF::var("z"), O(0), one(1);
  return Matrix<RF>{{k[0], O, O, one}, {z, k[1], O, O}, {O, one, k[2], O}, {O, O, one, k[3]}};
}

inline CanonicalFG derive_canonical_fg() {
  using RF = RationalFunction;
  std::array<RF, 4> e{r4::v("eps0"), r4::v("eps1"), r4::v("eps2"),
                      RF(-1) * (r4::v("eps0") + r4::v("eps1") + r4::v("eps2"))};
  DiffOperator D(Derivation::zdz(), canonical_d_matrix_fg(r4::v("f"), r4::v("g"), e));
  std::array<RF, 4> k{r4::v("k0"), r4::v("k1"), r4::v("k2"), RF(-1) * (r4::v("k0") + r4::v("k1") + r4::v("k2"))};
  DiffOperator E(Derivation::dt({{"f", r4::v("df")}, {"g", r4::v("dg")}}), canonical_e_matrix(k));
  auto R = lie_bracket(D, E);
  LinearMatcher lm({"k0", "k1", "k2", "df", "dg"}, {"z"});
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) lm.add_identity(R(i, j).num());
  auto sol = lm.solve();
  CanonicalFG c;
  c.df = sol.at("df");
  c.dg = sol.at("dg");
  c.k = {sol.at("k0"), sol.at("k1"), sol.at("k2"), RF(-1) * (sol.at("k0") + sol.at("k1") + sol.at("k2"))};
  return c;
}

// ---------------------------------------------------------------------------
// Cyclic symmetry f0 -> f1 -> f2 -> f3 -> f0 with an affine action on eps.

using EpsAction = std::array<RationalFunction, 4>;  // new eps_j in terms of eps0..eps3

inline RationalFunction on_sum_zero(const RationalFunction& x) {
  using RF = RationalFunction;
  return x.substitute("eps3", RF(-1) * (r4::v("eps0") + r4::v("eps1") + r4::v("eps2")));
}

inline RationalFunction apply_eps(const RationalFunction& x, const EpsAction& a) {
  // simultaneous substitution through fresh names
  RationalFunction r = x;
  for (int j = 0; j < 4; ++j) r = r.substitute("eps" + std::to_string(j), r4::v("_e" + std::to_string(j)));
  for (int j = 0; j < 4; ++j) r = r.substitute("_e" + std::to_string(j), a[j]);
  return r;
}

inline EpsAction compose(const EpsAction& outer, const EpsAction& inner) {
  EpsAction r;
  for (int j = 0; j < 4; ++j) r[j] = apply_eps(outer[j], inner);
  return r;
}

inline EpsAction identity_eps_action() { return {r4::v("eps0"), r4::v("eps1"), r4::v("eps2"), r4::v("eps3")}; }

struct CyclicCheck {
  bool invariant = false;
  bool order_four = false;
  bool ok() const { return invariant && order_four; }
};

// The shifted system f~_j = f_{j+1} must satisfy the same equations with eps
// replaced by the candidate action (checked on sum eps = 0).
inline CyclicCheck check_cyclic_symmetry(const EpsAction& act, const FSystem& fs) {
  using RF = RationalFunction;
  RF t = r4::v("t");
  std::map<std::string, RF> shift{{"f0", r4::v("f1")}, {"f1", t / RF(2) - r4::v("f0")}};
  auto shifted = [&](const RF& x) {
    RF r = x.substitute("f0", r4::v("_f0")).substitute("f1", r4::v("_f1"));
    r = r.substitute("_f0", shift["f0"]).substitute("_f1", shift["f1"]);
    return apply_eps(r, act);
  };
  RF half(GaussianRational::frac(1, 2));
  CyclicCheck c;
  c.invariant = on_sum_zero(shifted(fs.df0) - fs.df1).is_zero() &&
                on_sum_zero(shifted(fs.df1) - (half - fs.df0)).is_zero();
  // the f-part alone already has order exactly 4, so only the fourth power matters
  EpsAction p = act;
  for (int k = 1; k < 4; ++k) p = compose(act, p);
  bool back = true;
  for (int j = 0; j < 4; ++j) back &= on_sum_zero(p[j] - r4::v("eps" + std::to_string(j))).is_zero();
  c.order_four = back;
  return c;
}

// Solve for an affine eps-action (on sum eps = 0) making the f-system invariant.
inline EpsAction find_cyclic_eps_action(const FSystem& fs) {
  using RF = RationalFunction;
  std::vector<std::string> unk;
  EpsAction act;
  for (int j = 0; j < 3; ++j) {
    RF e = r4::v("c" + std::to_string(j));
    unk.push_back("c" + std::to_string(j));
    for (int k = 0; k < 3; ++k) {
      std::string m = "m" + std::to_string(j) + std::to_string(k);
      unk.push_back(m);
      e += r4::v(m) * r4::v("eps" + std::to_string(k));
    }
    act[j] = e;
  }
  act[3] = RF(-1) * (act[0] + act[1] + act[2]);
  RF t = r4::v("t"), half(GaussianRational::frac(1, 2));
  auto shifted = [&](const RF& x) {
    RF r = x.substitute("f0", r4::v("_f0")).substitute("f1", r4::v("_f1"));
    r = r.substitute("_f0", r4::v("f1")).substitute("_f1", t / RF(2) - r4::v("f0"));
    return apply_eps(on_sum_zero(r), act);
  };
  RF r1 = shifted(fs.df0) - on_sum_zero(fs.df1);
  RF r2 = shifted(fs.df1) - (half - on_sum_zero(fs.df0));
  LinearMatcher lm(unk, {"f0", "f1", "t", "eps0", "eps1", "eps2"});
  lm.add_identity(r1.num());
  lm.add_identity(r2.num());
  auto sol = lm.solve();
  EpsAction out;
  for (int j = 0; j < 4; ++j) out[j] = on_sum_zero(act[j].substitute(sol));
  return out;
}

// Hamiltonian identity residuals: (t b1' - dH/db3, t b3' + dH/db1) and the
// same without the factor t.
struct HamiltonianCheck {
  RationalFunction with_t_1, with_t_2, without_t_1, without_t_2;
};
inline HamiltonianCheck hamiltonian_residuals(const BSystem& b, const RationalFunction& H) {
  RationalFunction t = r4::v("t");
  return {t * b.db1 - H.partial("b3"), t * b.db3 + H.partial("b1"), b.db1 - H.partial("b3"), b.db3 + H.partial("b1")};
}

// det for small matrices by cofactor expansion.
inline RationalFunction det(const Matrix<RationalFunction>& m) {
  size_t n = m.rows();
  if (n == 1) return m(0, 0);
  RationalFunction s(0);
  for (size_t j = 0; j < n; ++j) {
    if (m(0, j).is_zero()) continue;
    Matrix<RationalFunction> minor(n - 1, n - 1);
    for (size_t i = 1; i < n; ++i)
      for (size_t k = 0, c = 0; k < n; ++k)
        if (k != j) minor(i - 1, c++) = m(i, k);
    RationalFunction term = m(0, j) * det(minor);
    s = (j % 2) ? s - term : s + term;
  }
  return s;
}

}  // namespace p5iso
