#pragma once

#include <functional>
#include <vector>

#include "../errors.hpp"

namespace p5iso {

// Dense row-major matrix over any ring-like value type.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, const T& fill = T()) : r_(rows), c_(cols), a_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    r_ = rows.size();
    c_ = r_ ? rows.begin()->size() : 0;
    for (auto& row : rows) {
      if (row.size() != c_) throw ShapeError("ragged matrix literal");
      a_.insert(a_.end(), row.begin(), row.end());
    }
  }
  static Matrix identity(size_t n) {
    Matrix m(n, n, T(0));
    for (size_t k = 0; k < n; ++k) m(k, k) = T(1);
    return m;
  }

  size_t rows() const { return r_; }
  size_t cols() const { return c_; }
  T& operator()(size_t i, size_t j) { return a_[i * c_ + j]; }
  const T& operator()(size_t i, size_t j) const { return a_[i * c_ + j]; }

  template <class F>
  auto map(F&& f) const -> Matrix<decltype(f(std::declval<const T&>()))> {
    Matrix<decltype(f(std::declval<const T&>()))> out(r_, c_);
    for (size_t i = 0; i < r_; ++i)
      for (size_t j = 0; j < c_; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

  Matrix transpose() const {
    Matrix t(c_, r_);
    for (size_t i = 0; i < r_; ++i)
      for (size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  T trace() const {
    if (r_ != c_) throw ShapeError("trace of non-square matrix");
    T s(0);
    for (size_t k = 0; k < r_; ++k) s += (*this)(k, k);
    return s;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.r_ != b.r_ || a.c_ != b.c_) throw ShapeError("matrix sum shape mismatch");
    Matrix m = a;
    for (size_t k = 0; k < m.a_.size(); ++k) m.a_[k] += b.a_[k];
    return m;
  }
  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.r_ != b.r_ || a.c_ != b.c_) throw ShapeError("matrix difference shape mismatch");
    Matrix m = a;
    for (size_t k = 0; k < m.a_.size(); ++k) m.a_[k] -= b.a_[k];
    return m;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.c_ != b.r_) throw ShapeError("matrix product shape mismatch");
    Matrix m(a.r_, b.c_, T(0));
    for (size_t i = 0; i < a.r_; ++i)
      for (size_t k = 0; k < a.c_; ++k) {
        const T& aik = a(i, k);
        for (size_t j = 0; j < b.c_; ++j) m(i, j) += aik * b(k, j);
      }
    return m;
  }
  friend Matrix operator*(const T& s, const Matrix& a) {
    Matrix m = a;
    for (auto& x : m.a_) x = s * x;
    return m;
  }
  Matrix operator-() const {
    Matrix m = *this;
    for (auto& x : m.a_) x = -x;
    return m;
  }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    if (a.r_ != b.r_ || a.c_ != b.c_) return false;
    for (size_t k = 0; k < a.a_.size(); ++k)
      if (!(a.a_[k] == b.a_[k])) return false;
    return true;
  }

  const std::vector<T>& data() const { return a_; }

 private:
  size_t r_ = 0, c_ = 0;
  std::vector<T> a_;
};

}  // namespace p5iso
