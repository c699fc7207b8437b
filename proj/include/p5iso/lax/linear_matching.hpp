#pragma once

#include <map>
#include <string>
#include <vector>

#include "../algebra/bareiss.hpp"

namespace p5iso {

// Collects linear equations  sum_j coeff_j * u_j + const = 0  from polynomial
// identities in auxiliary variables (e.g. z): every coefficient of every
// monomial in `aux` must vanish.
class LinearMatcher {
 public:
  LinearMatcher(std::vector<std::string> unknowns, std::vector<std::string> aux)
      : unknowns_(std::move(unknowns)), aux_(std::move(aux)) {}

  void add_identity(const MultiPoly& p) {
    std::vector<std::string> keys = unknowns_;
    keys.insert(keys.end(), aux_.begin(), aux_.end());
    const size_t nu = unknowns_.size();
    std::map<Exponents, std::vector<MultiPoly>> rows;  // aux exponent -> [coeffs..., const]
    for (auto& [e, c] : p.coefficients_in(keys)) {
      Exponents ae(e.begin() + nu, e.end());
      int deg = 0, which = -1;
      for (size_t j = 0; j < nu; ++j)
        if (e[j]) {
          deg += e[j];
          which = static_cast<int>(j);
        }
      if (deg > 1) throw DerivationFailure("identity is not linear in the unknowns");
      auto& row = rows[ae];
      if (row.empty()) row.assign(nu + 1, MultiPoly());
      row[which < 0 ? nu : which] += c;
    }
    for (auto& [ae, row] : rows) rows_.push_back(row);
  }
  void add_linear(const std::vector<MultiPoly>& coeffs, const MultiPoly& constant) {
    auto row = coeffs;
    row.push_back(constant);
    rows_.push_back(row);
  }

  size_t equations() const { return rows_.size(); }

  std::map<std::string, RationalFunction> solve() const {
    const size_t nu = unknowns_.size();
    std::vector<std::vector<MultiPoly>> live;
    for (auto& r : rows_) {
      bool any = false;
      for (auto& x : r) any |= !x.is_zero();
      if (any) live.push_back(r);
    }
    Matrix<MultiPoly> A(live.size(), nu);
    std::vector<MultiPoly> b(live.size());
    for (size_t i = 0; i < live.size(); ++i) {
      for (size_t j = 0; j < nu; ++j) A(i, j) = live[i][j];
      b[i] = -live[i][nu];
    }
    std::vector<RationalFunction> x;
    try {
      x = bareiss_solve(A, b);
    } catch (const SingularSystem& e) {
      throw DerivationFailure(std::string("linear system for the unknowns is singular: ") + e.what());
    } catch (const Inconsistent& e) {
      throw DerivationFailure(std::string("linear system for the unknowns is inconsistent: ") + e.what());
    }
    std::map<std::string, RationalFunction> out;
    for (size_t j = 0; j < nu; ++j) out[unknowns_[j]] = x[j];
    return out;
  }

 private:
  std::vector<std::string> unknowns_, aux_;
  std::vector<std::vector<MultiPoly>> rows_;
};

}  // namespace p5iso
