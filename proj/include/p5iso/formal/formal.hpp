#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "p5iso/algebra/gaussian_rational.hpp"
#include "p5iso/algebra/matrix.hpp"
#include "p5iso/errors.hpp"

namespace p5iso {

using GMat = Matrix<GaussianRational>;

// Operator z d/dz + A with A = sum_{n<=order} A_n z^n over Q(i); A_0 has
// eigenvalues +-theta/2.
struct FormalConnection {
  int order = 0;
  std::vector<GMat> coeffs;
  GaussianRational theta;

  GMat coeff(int n) const {
    return n >= 0 && n < static_cast<int>(coeffs.size()) ? coeffs[n] : GMat(2, 2, GaussianRational(0));
  }
};

// Laurent polynomial in z and vectors of them on the basis e1, e2.
using Laurent = std::map<int, GaussianRational>;
using LVec = std::array<Laurent, 2>;

struct NormalFormResult {
  int order = 0;
  GaussianRational theta;
  std::vector<GMat> gauge;  // U_0..U_order
  GMat normal_const = GMat(2, 2, GaussianRational(0));
  std::optional<int> resonance_m;  // 0 for the theta = 0 branch
  GaussianRational obstruction_a;  // 0 or 1

  // Coefficient list of normal_const + a z^m E12.
  std::vector<GMat> normal_matrix() const {
    int m = resonance_m.value_or(0);
    std::vector<GMat> out(std::max(m, 0) + 1, GMat(2, 2, GaussianRational(0)));
    out[0] = normal_const;
    if (resonance_m && m > 0) out[m](0, 1) = obstruction_a;
    return out;
  }
};

enum class LatticeKind { Unique, ProjectiveLineFamily };
struct LatticeClass {
  LatticeKind kind = LatticeKind::Unique;
  std::optional<std::string> parametrization;
};

enum class EigenlineKind { None, UniqueLine, ProjectiveLine };
struct EigenlineSet {
  EigenlineKind kind = EigenlineKind::None;
  GaussianRational eta;
  std::optional<LVec> witness;                // original coordinates
  std::optional<std::array<LVec, 2>> pencil;  // lines C(c1 v1 + c2 v2)
  std::optional<LVec> normal_witness;          // normal-form coordinates
  int exact_below = 0;  // D(v) = eta v holds for all exponents <= exact_below
};

inline const char* lattice_kind_name(LatticeKind k) {
  return k == LatticeKind::Unique ? "Unique" : "ProjectiveLineFamily";
}
inline const char* eigenline_kind_name(EigenlineKind k) {
  switch (k) {
    case EigenlineKind::None: return "None";
    case EigenlineKind::UniqueLine: return "UniqueLine";
    default: return "ProjectiveLine";
  }
}

namespace formal_detail {

using GR = GaussianRational;

inline GMat zero2() { return GMat(2, 2, GR(0)); }

inline std::optional<long> as_integer(const GR& x) {
  if (!x.is_real() || x.re().get_den() != 1) return std::nullopt;
  return x.re().get_num().get_si();
}

inline GMat inverse2(const GMat& m) {
  GR d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (d.is_zero()) throw SingularSystem("singular 2x2 matrix");
  GR id = d.inv();
  return GMat{{m(1, 1) * id, -m(0, 1) * id}, {-m(1, 0) * id, m(0, 0) * id}};
}

// Nonzero vector in ker(A - l).
inline std::array<GR, 2> eigvec(const GMat& A, const GR& l) {
  GR p = A(0, 0) - l, q = A(0, 1), r = A(1, 0), s = A(1, 1) - l;
  if (!q.is_zero() || !p.is_zero()) return {q, -p};
  if (!r.is_zero() || !s.is_zero()) return {-s, r};
  return {GR(1), GR(0)};
}

inline void add_to(Laurent& f, int e, const GR& c) {
  if (c.is_zero()) return;
  auto& x = f[e];
  x += c;
  if (x.is_zero()) f.erase(e);
}

inline int min_exp(const LVec& v) {
  int m = 0;
  bool any = false;
  for (auto& f : v)
    for (auto& [e, c] : f)
      if (!any || e < m) m = e, any = true;
  return m;
}

// (sum_n M_n z^n) * v, keeping products with total exponent <= cap.
inline LVec apply_series(const std::vector<GMat>& M, const LVec& v, int cap) {
  LVec out;
  for (int n = 0; n < static_cast<int>(M.size()); ++n)
    for (int j = 0; j < 2; ++j)
      for (auto& [e, c] : v[j]) {
        if (n + e > cap) continue;
        for (int i = 0; i < 2; ++i) add_to(out[i], n + e, M[n](i, j) * c);
      }
  return out;
}

inline LVec monomial(int k, int idx) {
  LVec v;
  v[idx][k] = GR(1);
  return v;
}

}  // namespace formal_detail

inline FormalConnection make_connection(std::vector<GMat> coeffs, const GaussianRational& theta, int order = -1) {
  FormalConnection c;
  c.coeffs = std::move(coeffs);
  c.theta = theta;
  int cand = static_cast<int>(std::ceil(std::abs(theta.re().get_d())));
  c.order = order >= 0 ? order : std::max(static_cast<int>(c.coeffs.size()) - 1, 2 * cand + 4);
  return c;
}

// Solves U (z d/dz + A) = (z d/dz + N) U order by order.
inline NormalFormResult normal_form(const FormalConnection& conn) {
  using namespace formal_detail;
  if (conn.coeffs.empty()) throw BadLeadingTerm("no coefficients");
  for (auto& m : conn.coeffs)
    if (m.rows() != 2 || m.cols() != 2) throw ShapeError("coefficients must be 2x2");
  const GMat& A0 = conn.coeffs[0];
  GR th = conn.theta;
  if (!A0.trace().is_zero() || A0(0, 0) * A0(1, 1) - A0(0, 1) * A0(1, 0) != -(th * th) / GR(4))
    throw BadLeadingTerm("A0 does not have eigenvalues +-theta/2");

  NormalFormResult nf;
  nf.order = conn.order;
  const int K = conn.order;
  std::optional<long> mi = as_integer(th);
  bool resonant = mi.has_value();
  int m = resonant ? static_cast<int>(std::labs(*mi)) : 0;
  if (resonant) {
    th = GR(m);
    if (K < 2 * m + 2)
      throw InsufficientOrder("order " + std::to_string(K) + " < " + std::to_string(2 * m + 2));
  }
  nf.theta = th;

  GMat P = GMat::identity(2);
  if (resonant && m == 0) {
    if (!(A0 == zero2())) {
      int c = (A0(0, 0).is_zero() && A0(1, 0).is_zero()) ? 1 : 0;
      P = GMat{{A0(0, c), GR(c == 0)}, {A0(1, c), GR(c == 1)}};
    }
  } else if (resonant || !(A0(0, 1).is_zero() && A0(1, 0).is_zero())) {
    GR l = -th / GR(2);
    auto v1 = eigvec(A0, l), v2 = eigvec(A0, -l);
    P = GMat{{v1[0], v2[0]}, {v1[1], v2[1]}};
  }
  GMat Pi = inverse2(P);
  std::vector<GMat> A(K + 1);
  for (int n = 0; n <= K; ++n) A[n] = Pi * conn.coeff(n) * P;
  const GMat& N0 = A[0];
  bool nilpotent = resonant && m == 0 && !N0(0, 1).is_zero();

  std::vector<GMat> U(K + 1, zero2());
  U[0] = GMat::identity(2);
  GR a(0);
  for (int n = 1; n <= K; ++n) {
    GMat R = zero2();
    for (int i = 1; i <= n; ++i) R = R + U[n - i] * A[i];
    if (resonant && m > 0 && n > m) {
      GMat E = zero2();
      E(0, 1) = a;
      R = R - E * U[n - m];
    }
    GMat X = zero2();
    GR nn(n);
    if (nilpotent) {
      X(1, 0) = R(1, 0) / nn;
      X(0, 0) = (R(0, 0) - X(1, 0)) / nn;
      X(1, 1) = (R(1, 1) + X(1, 0)) / nn;
      X(0, 1) = (R(0, 1) + X(0, 0) - X(1, 1)) / nn;
    } else {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          if (resonant && m > 0 && n == m && i == 0 && j == 1) {
            a = R(0, 1);
            continue;
          }
          X(i, j) = R(i, j) / (nn + N0(i, i) - N0(j, j));
        }
    }
    U[n] = X;
  }

  GMat Dg = GMat::identity(2);
  if (resonant && m > 0) {
    if (!a.is_zero()) Dg(1, 1) = a;
    a = a.is_zero() ? GR(0) : GR(1);
  } else if (resonant) {
    a = nilpotent ? GR(1) : GR(0);
  }
  nf.gauge.resize(K + 1);
  for (int n = 0; n <= K; ++n) nf.gauge[n] = Dg * U[n] * Pi;
  nf.normal_const = N0;
  if (resonant) {
    nf.resonance_m = m;
    nf.obstruction_a = a;
  }
  return nf;
}

// Coefficients of U A - z U' - N U for exponents 0..order.
inline std::vector<GMat> gauge_identity_residual(const FormalConnection& conn, const NormalFormResult& nf) {
  using namespace formal_detail;
  auto N = nf.normal_matrix();
  std::vector<GMat> out;
  for (int n = 0; n <= nf.order; ++n) {
    GMat r = zero2();
    for (int i = 0; i <= n; ++i) r = r + nf.gauge[n - i] * conn.coeff(i);
    r = r - GR(n) * nf.gauge[n];
    for (int j = 0; j < static_cast<int>(N.size()) && j <= n; ++j) r = r - N[j] * nf.gauge[n - j];
    out.push_back(r);
  }
  return out;
}

inline LatticeClass classify_lattices(const NormalFormResult& nf) {
  LatticeClass c;
  if (nf.resonance_m && *nf.resonance_m > 0 && nf.obstruction_a.is_zero()) {
    c.kind = LatticeKind::ProjectiveLineFamily;
    c.parametrization = "P(C b1 + C z^-" + std::to_string(*nf.resonance_m) + " b2)";
  }
  return c;
}

// z d/dz v + A v, truncated to exponents <= cap.
inline LVec apply_connection(const std::vector<GMat>& A, const LVec& v, int cap) {
  using namespace formal_detail;
  LVec out = apply_series(A, v, cap);
  for (int i = 0; i < 2; ++i)
    for (auto& [e, c] : v[i])
      if (e <= cap) add_to(out[i], e, GaussianRational(e) * c);
  return out;
}

inline EigenlineSet eigenline_set(const NormalFormResult& nf, const GaussianRational& eta) {
  using namespace formal_detail;
  EigenlineSet r;
  r.eta = eta;
  const int K = nf.order;
  GMat g0i = inverse2(nf.gauge[0]);
  std::vector<GMat> inv(K + 1, zero2());
  inv[0] = g0i;
  for (int n = 1; n <= K; ++n) {
    GMat acc = zero2();
    for (int k = 1; k <= n; ++k) acc = acc + nf.gauge[k] * inv[n - k];
    inv[n] = -(g0i * acc);
  }
  auto to_original = [&](const LVec& w, int shift_cap) { return apply_series(inv, w, shift_cap); };

  std::vector<LVec> basis;
  if (!nf.resonance_m) {
    for (int idx = 0; idx < 2; ++idx) {
      auto k = as_integer(eta - nf.normal_const(idx, idx));
      if (k) {
        basis.push_back(monomial(static_cast<int>(*k), idx));
        break;
      }
    }
  } else {
    int m = *nf.resonance_m;
    auto kk = as_integer(eta + GR::frac(m, 2));
    if (kk) {
      int k = static_cast<int>(*kk);
      bool a1 = !nf.obstruction_a.is_zero();
      if (m > 0 && k == m)
        basis.push_back(a1 ? monomial(m, 0) : monomial(0, 1));
      else if (a1)
        basis.push_back(monomial(k, 0));
      else
        basis = {monomial(k, 0), monomial(k - m, 1)};
    }
  }
  if (basis.empty()) return r;
  int lo = 0;
  for (auto& b : basis) lo = std::min(lo, min_exp(b));
  r.exact_below = K + lo;
  int cap = K + lo;
  if (basis.size() == 1) {
    r.kind = EigenlineKind::UniqueLine;
    r.normal_witness = basis[0];
    r.witness = to_original(basis[0], cap);
  } else {
    r.kind = EigenlineKind::ProjectiveLine;
    r.pencil = std::array<LVec, 2>{to_original(basis[0], cap), to_original(basis[1], cap)};
  }
  return r;
}

// JSON: {"theta": "1/3", "coeffs": [[["a","b"],["c","d"]], ...], "order": K?}
inline FormalConnection formal_from_json(const nlohmann::json& j) {
  auto scalar = [](const nlohmann::json& x) {
    if (x.is_string()) return GaussianRational::parse(x.get<std::string>());
    if (x.is_number_integer()) return GaussianRational(x.get<long>());
    throw ParseError("expected rational string");
  };
  if (!j.contains("theta") || !j.contains("coeffs")) throw ParseError("need theta and coeffs");
  std::vector<GMat> cs;
  for (auto& m : j.at("coeffs")) {
    if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2) throw ParseError("coefficient must be 2x2");
    cs.push_back(GMat{{scalar(m[0][0]), scalar(m[0][1])}, {scalar(m[1][0]), scalar(m[1][1])}});
  }
  return make_connection(std::move(cs), scalar(j.at("theta")), j.value("order", -1));
}

inline nlohmann::json laurent_to_json(const Laurent& f) {
  nlohmann::json o = nlohmann::json::object();
  for (auto& [e, c] : f) o[std::to_string(e)] = c.str();
  return o;
}

inline nlohmann::json mat_to_json(const GMat& m) {
  return nlohmann::json::array({nlohmann::json::array({m(0, 0).str(), m(0, 1).str()}),
                                nlohmann::json::array({m(1, 0).str(), m(1, 1).str()})});
}

inline nlohmann::json normal_form_to_json(const NormalFormResult& nf) {
  nlohmann::json j;
  j["theta"] = nf.theta.str();
  j["order"] = nf.order;
  j["normal_const"] = mat_to_json(nf.normal_const);
  j["resonance_m"] = nf.resonance_m ? nlohmann::json(*nf.resonance_m) : nlohmann::json(nullptr);
  j["obstruction_a"] = nf.resonance_m ? nlohmann::json(nf.obstruction_a.str()) : nlohmann::json(nullptr);
  nlohmann::json g = nlohmann::json::array();
  for (auto& u : nf.gauge) g.push_back(mat_to_json(u));
  j["gauge"] = g;
  return j;
}

inline nlohmann::json eigenline_to_json(const EigenlineSet& e) {
  nlohmann::json j;
  j["kind"] = eigenline_kind_name(e.kind);
  j["eta"] = e.eta.str();
  auto vec = [](const LVec& v) { return nlohmann::json::array({laurent_to_json(v[0]), laurent_to_json(v[1])}); };
  if (e.witness) j["witness"] = vec(*e.witness);
  if (e.pencil) j["pencil"] = nlohmann::json::array({vec((*e.pencil)[0]), vec((*e.pencil)[1])});
  j["exact_below"] = e.exact_below;
  return j;
}

}  // namespace p5iso
