#pragma once

#include <complex>
#include <string>
#include <vector>

#include "p5iso/algebra/rational_function.hpp"
#include "p5iso/errors.hpp"

namespace p5iso {

// Polynomial with complex double coefficients over a fixed variable order.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  CompiledPoly(const MultiPoly& p, const std::vector<std::string>& order) {
    std::vector<int> slot;
    for (auto& v : p.vars()) {
      int k = -1;
      for (size_t i = 0; i < order.size(); ++i)
        if (order[i] == v) k = static_cast<int>(i);
      slot.push_back(k);
    }
    for (auto& [e, c] : p.terms()) {
      Term t{c.to_complex(), {}};
      for (size_t i = 0; i < e.size(); ++i)
        if (e[i]) {
          if (slot[i] < 0) throw UnknownSymbol("variable '" + p.vars()[i] + "' not in evaluation order");
          t.powers.emplace_back(slot[i], e[i]);
        }
      terms_.push_back(std::move(t));
    }
  }

  std::complex<double> operator()(const std::vector<std::complex<double>>& x) const {
    std::complex<double> s = 0;
    for (auto& t : terms_) {
      std::complex<double> m = t.coef;
      for (auto& [k, e] : t.powers)
        for (int j = 0; j < e; ++j) m *= x[k];
      s += m;
    }
    return s;
  }

 private:
  struct Term {
    std::complex<double> coef;
    std::vector<std::pair<int, int>> powers;
  };
  std::vector<Term> terms_;
};

class CompiledRF {
 public:
  CompiledRF() = default;
  CompiledRF(const RationalFunction& f, const std::vector<std::string>& order)
      : num_(f.num(), order), den_(f.den(), order) {}
  std::complex<double> operator()(const std::vector<std::complex<double>>& x) const { return num_(x) / den_(x); }

 private:
  CompiledPoly num_, den_;
};

}  // namespace p5iso
