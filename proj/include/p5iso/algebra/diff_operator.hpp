#pragma once

#include <map>
#include <string>

#include "matrix.hpp"
#include "rational_function.hpp"

namespace p5iso {

enum class DerivKind { DZ, ZDZ, DT };

// A derivation of the coefficient field: d/dz, z d/dz or d/dt. For d/dt,
// `dependents` lists the t-derivatives of symbols that depend on t (for
// example a0 -> da0), so the chain rule is applied automatically.
struct Derivation {
  DerivKind kind = DerivKind::DZ;
  std::string var = "z";
  std::map<std::string, RationalFunction> dependents;

  static Derivation dz(std::string v = "z") { return {DerivKind::DZ, std::move(v), {}}; }
  static Derivation zdz(std::string v = "z") { return {DerivKind::ZDZ, std::move(v), {}}; }
  static Derivation dt(std::map<std::string, RationalFunction> deps = {}, std::string v = "t") {
    return {DerivKind::DT, std::move(v), std::move(deps)};
  }

  RationalFunction operator()(const RationalFunction& f) const {
    RationalFunction r = f.partial(var);
    if (kind == DerivKind::ZDZ) r = r * RationalFunction::var(var);
    for (auto& [x, dx] : dependents) {
      RationalFunction px = f.partial(x);
      if (!px.is_zero()) r += px * dx;
    }
    return r;
  }
  Matrix<RationalFunction> operator()(const Matrix<RationalFunction>& m) const {
    return m.map([this](const RationalFunction& f) { return (*this)(f); });
  }
};

// derivation + matrix, i.e. the operator  delta + A  acting on column vectors.
struct DiffOperator {
  Derivation derivation;
  Matrix<RationalFunction> matrix;

  DiffOperator() = default;
  DiffOperator(Derivation d, Matrix<RationalFunction> m) : derivation(std::move(d)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw ShapeError("operator matrix must be square");
  }
  size_t size() const { return matrix.rows(); }
};

// [L1, L2] = delta1(A2) - delta2(A1) + A1 A2 - A2 A1 for L_k = delta_k + A_k.
inline Matrix<RationalFunction> lie_bracket(const DiffOperator& L1, const DiffOperator& L2) {
  if (L1.size() != L2.size()) throw ShapeError("bracket of operators of different sizes");
  const auto& A = L1.matrix;
  const auto& B = L2.matrix;
  return L1.derivation(B) - L2.derivation(A) + A * B - B * A;
}

}  // namespace p5iso
