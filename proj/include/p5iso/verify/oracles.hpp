#pragma once
// Brute-force oracles shared by the unit tests, the CLI and the acceptance suite.

#include <optional>
#include <random>
#include <vector>

#include "p5iso/formal/formal.hpp"

namespace p5iso::oracle {

using GR = GaussianRational;

class ExactRng {
 public:
  explicit ExactRng(uint64_t seed = 20261016) : g_(seed) {}
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(g_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
  mpq_class rational(long range = 9, long maxden = 7) {
    mpq_class q(integer(-range, range), integer(1, maxden));
    q.canonicalize();
    return q;
  }
  mpq_class nonzero_rational(long range = 9, long maxden = 7) {
    for (;;)
      if (auto q = rational(range, maxden); q != 0) return q;
  }
  GR gauss(bool complex = true) { return GR(rational(), complex ? rational() : mpq_class(0)); }
  GR nonzero_gauss(bool complex = true) {
    for (;;)
      if (auto g = gauss(complex); !g.is_zero()) return g;
  }
  std::mt19937_64& engine() { return g_; }

 private:
  std::mt19937_64 g_;
};

// ---------------------------------------------------------------------------
// Formal 2x2 series.

using Series = std::vector<GMat>;

inline GMat mat2(GR a, GR b, GR c, GR d) { return GMat{{a, b}, {c, d}}; }
inline GMat zero2() { return mat2(GR(0), GR(0), GR(0), GR(0)); }

inline GMat inv2(const GMat& m) {
  GR d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return mat2(m(1, 1) / d, -m(0, 1) / d, -m(1, 0) / d, m(0, 0) / d);
}

inline Series series_mul(const Series& a, const Series& b, int K) {
  Series c(K + 1, zero2());
  for (int i = 0; i < (int)a.size() && i <= K; ++i)
    for (int j = 0; j < (int)b.size() && i + j <= K; ++j) c[i + j] = c[i + j] + a[i] * b[j];
  return c;
}

inline Series series_inverse(const Series& g, int K) {
  Series v(K + 1, zero2());
  GMat g0i = inv2(g[0]);
  v[0] = g0i;
  for (int n = 1; n <= K; ++n) {
    GMat acc = zero2();
    for (int k = 1; k <= n && k < (int)g.size(); ++k) acc = acc + g[k] * v[n - k];
    v[n] = -(g0i * acc);
  }
  return v;
}

// A = G^{-1} (z G' + N G): the connection gauge-equivalent to N via U = G.
inline Series conjugate_normal(const Series& N, const Series& G, int K) {
  Series rhs = series_mul(N, G, K);
  for (int n = 0; n < (int)G.size() && n <= K; ++n) rhs[n] = rhs[n] + GR(n) * G[n];
  return series_mul(series_inverse(G, K), rhs, K);
}

inline Series random_gauge(ExactRng& r, int deg) {
  Series G;
  for (;;) {
    GMat g0 = mat2(r.gauss(), r.gauss(), r.gauss(), r.gauss());
    if (!(g0(0, 0) * g0(1, 1) - g0(0, 1) * g0(1, 0)).is_zero()) {
      G.push_back(g0);
      break;
    }
  }
  for (int n = 1; n <= deg; ++n) G.push_back(mat2(r.gauss(), r.gauss(), r.gauss(), r.gauss()));
  return G;
}

// diag(-m/2, m/2) + a z^m E12
inline Series normal_series(int m, const GR& a) {
  Series N(m + 1, zero2());
  N[0] = mat2(GR::frac(-m, 2), GR(0), GR(0), GR::frac(m, 2));
  N[m](0, 1) += a;
  return N;
}

// ---------------------------------------------------------------------------
// Lattice search over 2x2 matrices of Laurent polynomials.

using LMat = std::array<std::array<Laurent, 2>, 2>;

inline Laurent lmul(const Laurent& a, const Laurent& b) {
  Laurent c;
  for (auto& [i, x] : a)
    for (auto& [j, y] : b) c[i + j] += x * y;
  std::erase_if(c, [](auto& kv) { return kv.second.is_zero(); });
  return c;
}

inline Laurent ladd(Laurent a, const Laurent& b, const GR& s = GR(1)) {
  for (auto& [j, y] : b) a[j] += s * y;
  std::erase_if(a, [](auto& kv) { return kv.second.is_zero(); });
  return a;
}

inline LMat lmm(const LMat& a, const LMat& b) {
  LMat c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) c[i][j] = ladd(c[i][j], lmul(a[i][k], b[k][j]));
  return c;
}

// Inverse for matrices whose determinant is a nonzero constant.
inline std::optional<LMat> linv(const LMat& b) {
  Laurent d = ladd(lmul(b[0][0], b[1][1]), lmul(b[0][1], b[1][0]), GR(-1));
  if (d.size() != 1 || d.begin()->first != 0) return std::nullopt;
  GR di = d.begin()->second.inv();
  LMat r;
  r[0][0] = ladd({}, b[1][1], di);
  r[0][1] = ladd({}, b[0][1], -di);
  r[1][0] = ladd({}, b[1][0], -di);
  r[1][1] = ladd({}, b[0][0], di);
  return r;
}

inline bool integral(const LMat& m) {
  for (auto& row : m)
    for (auto& f : row)
      if (!f.empty() && f.begin()->first < 0) return false;
  return true;
}

// Number of distinct D-invariant lattices with exponents +-m/2 among bases
// (c1 e1 + c2 z^-m e2, completion) with (c1, c2) on a small grid.
inline int brute_force_lattices(int m, const GR& a) {
  LMat N;
  N[0][0][0] = GR::frac(-m, 2);
  N[1][1][0] = GR::frac(m, 2);
  if (!a.is_zero()) N[0][1][m] += a;
  std::vector<LMat> found;
  const std::vector<long> grid{-1, 0, 1, 2};
  for (long c1 : grid)
    for (long c2 : grid) {
      if (!c1 && !c2) continue;
      LMat B;
      if (c2) {
        if (c1) B[0][0][0] = GR(c1);
        B[1][0][-m] = GR(c2);
        B[0][1][m] = GR(1);
      } else {
        B[0][0][0] = GR(1);
        B[1][1][0] = GR(1);
      }
      auto Bi = linv(B);
      if (!Bi) continue;
      LMat zB;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (auto& [e, c] : B[i][j])
            if (e) zB[i][j][e] = GR(e) * c;
      LMat Np = lmm(*Bi, lmm(N, B));
      LMat corr = lmm(*Bi, zB);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Np[i][j] = ladd(Np[i][j], corr[i][j]);
      if (!integral(Np)) continue;
      auto at0 = [&](int i, int j) { return Np[i][j].count(0) ? Np[i][j].at(0) : GR(0); };
      if (!(at0(0, 0) + at0(1, 1)).is_zero()) continue;
      if (at0(0, 0) * at0(1, 1) - at0(0, 1) * at0(1, 0) != GR(-m * m) / GR(4)) continue;
      bool seen = false;
      for (auto& F : found) {
        LMat T = lmm(*linv(F), B);
        if (integral(T) && linv(T) && integral(*linv(T))) seen = true;
      }
      if (!seen) found.push_back(B);
    }
  return static_cast<int>(found.size());
}

// ---------------------------------------------------------------------------
// Finite-field counting for the fibres of pr.

// Orbits of b1 c1 = P1, b2 c2 = P2, b1 c2 = Q over F_p, not all zero, under
// (b, c) -> (k b, c / k).
inline long long brute_orbits(long p, long P1, long P2, long Q) {
  long long n = 0;
  for (long b1 = 0; b1 < p; ++b1)
    for (long c1 = 0; c1 < p; ++c1) {
      if ((b1 * c1 - P1) % p) continue;
      for (long c2 = 0; c2 < p; ++c2) {
        if ((b1 * c2 - Q) % p) continue;
        for (long b2 = 0; b2 < p; ++b2) {
          if ((b2 * c2 - P2) % p) continue;
          if (!b1 && !c1 && !b2 && !c2) continue;
          ++n;
        }
      }
    }
  return n / (p - 1);
}

// Reduction of a rational mod p; nullopt when p divides the denominator.
inline std::optional<long> mod_p(const mpq_class& q, long p) {
  mpz_class num = q.get_num() % p, den = q.get_den() % p;
  if (den == 0) return std::nullopt;
  if (num < 0) num += p;
  mpz_class inv;
  mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mpz_class(p).get_mpz_t());
  return mpz_class((num * inv) % p).get_si();
}

}  // namespace p5iso::oracle
