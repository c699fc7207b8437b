#pragma once

#include <vector>

#include "matrix.hpp"
#include "rational_function.hpp"

namespace p5iso {

namespace detail {
inline std::pair<size_t, int> pivot_cost(const MultiPoly& p) { return {p.size(), p.total_degree()}; }
}  // namespace detail

// Fraction-free Gaussian elimination for A x = rhs with A m-by-n, m >= n.
// Pivot rows are chosen by smallest entry (term count, then degree). Extra
// rows must reduce to 0 = 0, otherwise Inconsistent is thrown. The solution
// is checked by substitution before it is returned.
inline std::vector<RationalFunction> bareiss_solve(const Matrix<MultiPoly>& A, const std::vector<MultiPoly>& rhs) {
  const size_t m = A.rows(), n = A.cols();
  if (rhs.size() != m) throw ShapeError("rhs length does not match matrix rows");
  if (m < n) throw SingularSystem("underdetermined system (" + std::to_string(m) + " equations, " +
                                  std::to_string(n) + " unknowns)");
  std::vector<std::vector<MultiPoly>> M(m, std::vector<MultiPoly>(n + 1));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) M[i][j] = A(i, j);
    M[i][n] = rhs[i];
  }
  MultiPoly prev(1);
  for (size_t k = 0; k < n; ++k) {
    size_t best = m;
    for (size_t r = k; r < m; ++r)
      if (!M[r][k].is_zero() &&
          (best == m || detail::pivot_cost(M[r][k]) < detail::pivot_cost(M[best][k])))
        best = r;
    if (best == m) throw SingularSystem("no pivot in column " + std::to_string(k));
    std::swap(M[k], M[best]);
    const MultiPoly& piv = M[k][k];
    for (size_t i = k + 1; i < m; ++i) {
      const MultiPoly lead = M[i][k];
      for (size_t j = k + 1; j <= n; ++j) {
        MultiPoly v = piv * M[i][j];
        if (!lead.is_zero() && !M[k][j].is_zero()) v -= lead * M[k][j];
        auto q = v.divide_exact(prev);
        if (!q) throw DerivationFailure("Bareiss step not exact at column " + std::to_string(k));
        M[i][j] = std::move(*q);
      }
      M[i][k] = MultiPoly();
    }
    prev = M[k][k];
  }
  for (size_t i = n; i < m; ++i)
    if (!M[i][n].is_zero()) throw Inconsistent("residual " + M[i][n].str() + " in reduced row " + std::to_string(i));

  std::vector<RationalFunction> x(n);
  for (size_t kk = n; kk-- > 0;) {
    RationalFunction acc(M[kk][n]);
    for (size_t j = kk + 1; j < n; ++j)
      if (!M[kk][j].is_zero() && !x[j].is_zero()) acc -= RationalFunction(M[kk][j]) * x[j];
    x[kk] = acc / RationalFunction(M[kk][kk]);
  }
  for (size_t i = 0; i < m; ++i) {
    RationalFunction r(-rhs[i]);
    for (size_t j = 0; j < n; ++j)
      if (!A(i, j).is_zero()) r += RationalFunction(A(i, j)) * x[j];
    if (!r.is_zero()) throw Inconsistent("back-substitution residual " + r.str() + " in row " + std::to_string(i));
  }
  return x;
}

// Same, for rational-function coefficients: each row is cleared of
// denominators first.
inline std::vector<RationalFunction> bareiss_solve(const Matrix<RationalFunction>& A,
                                                   const std::vector<RationalFunction>& rhs) {
  const size_t m = A.rows(), n = A.cols();
  if (rhs.size() != m) throw ShapeError("rhs length does not match matrix rows");
  Matrix<MultiPoly> P(m, n);
  std::vector<MultiPoly> b(m);
  for (size_t i = 0; i < m; ++i) {
    MultiPoly lcm = rhs[i].den();
    for (size_t j = 0; j < n; ++j) {
      const MultiPoly& d = A(i, j).den();
      if (d.is_constant() || lcm.divide_exact(d)) continue;
      if (auto q = d.divide_exact(lcm))
        lcm = d;
      else
        lcm = lcm * d;
    }
    RationalFunction L(lcm);
    for (size_t j = 0; j < n; ++j) P(i, j) = (A(i, j) * L).as_polynomial();
    b[i] = (rhs[i] * L).as_polynomial();
  }
  return bareiss_solve(P, b);
}

}  // namespace p5iso
