#pragma once

// Small dense linear-algebra kernels shared across the library. Everything
// here targets tiny matrices (tableaux and stability matrices, n <= 64), so
// the implementations favor robustness over blocking or vectorization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adiglm {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class... Parts>
[[noreturn]] void fail(const Parts&... parts) {
  std::ostringstream msg;
  (msg << ... << parts);
  throw Error(msg.str());
}

inline float real_sqrt(float x) { return std::sqrt(x); }
inline double real_sqrt(double x) { return std::sqrt(x); }
inline long double real_sqrt(long double x) { return std::sqrt(x); }
inline float real_abs(float x) { return std::fabs(x); }
inline double real_abs(double x) { return std::fabs(x); }
inline long double real_abs(long double x) { return std::fabs(x); }

} // namespace detail

template <class T>
struct scalar_traits {
  using real_type = T;
  static real_type magnitude(const T& x) { return detail::real_abs(x); }
};

template <class R>
struct scalar_traits<std::complex<R>> {
  using real_type = R;
  // Overflow-safe modulus; avoids std::abs so non-standard reals work too.
  static R magnitude(const std::complex<R>& z) {
    R a = detail::real_abs(z.real());
    R b = detail::real_abs(z.imag());
    R m = a > b ? a : b;
    if (m == R(0)) return R(0);
    R p = a / m, q = b / m;
    return m * detail::real_sqrt(p * p + q * q);
  }
};

template <class T>
typename scalar_traits<T>::real_type magnitude(const T& x) {
  return scalar_traits<T>::magnitude(x);
}

template <class R>
std::complex<R> complex_sqrt(const std::complex<R>& z) {
  R m = magnitude(z);
  if (m == R(0)) return {};
  R re = z.real(), im = z.imag();
  R w = detail::real_sqrt((m + detail::real_abs(re)) / R(2));
  if (re >= R(0)) return {w, im / (R(2) * w)};
  R v = detail::real_abs(im) / (R(2) * w);
  return im >= R(0) ? std::complex<R>(v, w) : std::complex<R>(v, -w);
}

template <class T>
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> entries)
      : rows_(rows), cols_(cols), data_(entries) {
    if (data_.size() != rows * cols)
      detail::fail("Matrix: initializer has ", data_.size(), " entries, expected ", rows * cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

using Complex = std::complex<double>;
using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows())
    detail::fail("matrix product: ", a.rows(), "x", a.cols(), " * ", b.rows(), "x", b.cols());
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      T aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

template <class T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) detail::fail("matrix sum: shape mismatch");
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) detail::fail("matrix difference: shape mismatch");
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

template <class T, class Scalar>
  requires std::convertible_to<Scalar, T>
Matrix<T> operator*(const Scalar& s, const Matrix<T>& m) {
  Matrix<T> out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = T(s) * out(i, j);
  return out;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& m, std::span<const T> x) {
  if (m.cols() != x.size()) detail::fail("matvec: shape mismatch");
  std::vector<T> out(m.rows(), T{});
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * x[j];
  return out;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& m, const std::vector<T>& x) {
  return m * std::span<const T>(x);
}

template <class T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

template <class T>
typename scalar_traits<T>::real_type max_abs(const Matrix<T>& m) {
  typename scalar_traits<T>::real_type best{};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, magnitude(m(i, j)));
  return best;
}

template <class T>
typename scalar_traits<T>::real_type max_abs(std::span<const T> v) {
  typename scalar_traits<T>::real_type best{};
  for (const T& x : v) best = std::max(best, magnitude(x));
  return best;
}

inline ComplexMatrix to_complex(const RealMatrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

// Solves A X = B by Gaussian elimination with partial pivoting. A and B are
// consumed by value; throws on an exactly singular pivot column.
template <class T>
Matrix<T> lu_solve(Matrix<T> a, Matrix<T> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) detail::fail("lu_solve: matrix is ", a.rows(), "x", a.cols(), ", expected square");
  if (b.rows() != n) detail::fail("lu_solve: rhs has ", b.rows(), " rows, expected ", n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    auto best = magnitude(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      auto m = magnitude(a(i, k));
      if (m > best) { best = m; piv = i; }
    }
    if (best == decltype(best){})
      detail::fail("lu_solve: singular matrix (pivot column ", k, ")");
    if (piv != k) {
      for (std::size_t j = k; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      T m = a(i, k) / a(k, k);
      if (m == T{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= m * b(k, j);
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc = b(ri, j);
      for (std::size_t k = ri + 1; k < n; ++k) acc -= a(ri, k) * b(k, j);
      b(ri, j) = acc / a(ri, ri);
    }
  }
  return b;
}

template <class T>
std::vector<T> lu_solve(const Matrix<T>& a, std::span<const T> rhs) {
  Matrix<T> b(rhs.size(), 1);
  for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
  Matrix<T> x = lu_solve(a, std::move(b));
  std::vector<T> out(x.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x(i, 0);
  return out;
}

// Numerical rank by Gaussian elimination with full pivoting: pivots larger
// than tol (absolute) count. Adequate for the tiny diagnostics matrices here.
template <class T>
std::size_t numerical_rank(Matrix<T> a, typename scalar_traits<T>::real_type tol) {
  const std::size_t m = a.rows(), n = a.cols();
  std::size_t rank = 0;
  for (std::size_t step = 0; step < std::min(m, n); ++step) {
    std::size_t pi = step, pj = step;
    auto best = magnitude(a(step, step));
    for (std::size_t i = step; i < m; ++i)
      for (std::size_t j = step; j < n; ++j)
        if (magnitude(a(i, j)) > best) { best = magnitude(a(i, j)); pi = i; pj = j; }
    if (best <= tol) break;
    ++rank;
    for (std::size_t j = 0; j < n; ++j) std::swap(a(step, j), a(pi, j));
    for (std::size_t i = 0; i < m; ++i) std::swap(a(i, step), a(i, pj));
    for (std::size_t i = step + 1; i < m; ++i) {
      T f = a(i, step) / a(step, step);
      for (std::size_t j = step; j < n; ++j) a(i, j) -= f * a(step, j);
    }
  }
  return rank;
}

template <class T>
struct LeastSquaresResult {
  std::vector<T> solution;
  T residual_norm;
};

// Householder QR least squares for real scalar types, m >= n.
template <class T>
LeastSquaresResult<T> least_squares(Matrix<T> a, std::vector<T> b) {
  const std::size_t m = a.rows(), n = a.cols();
  if (b.size() != m) detail::fail("least_squares: rhs length ", b.size(), ", expected ", m);
  if (m < n) detail::fail("least_squares: underdetermined system (", m, " rows, ", n, " cols)");
  for (std::size_t k = 0; k < n; ++k) {
    T norm{};
    for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = detail::real_sqrt(norm);
    if (norm == T{}) detail::fail("least_squares: rank-deficient column ", k);
    if (a(k, k) > T{}) norm = -norm;
    for (std::size_t i = k; i < m; ++i) a(i, k) /= norm;
    a(k, k) -= T(1);
    // apply I - v v^T / v_k to remaining columns and rhs (v stored in col k)
    for (std::size_t j = k + 1; j < n; ++j) {
      T dot{};
      for (std::size_t i = k; i < m; ++i) dot += a(i, k) * a(i, j);
      dot /= a(k, k);
      for (std::size_t i = k; i < m; ++i) a(i, j) += dot * a(i, k);
    }
    T dot{};
    for (std::size_t i = k; i < m; ++i) dot += a(i, k) * b[i];
    dot /= a(k, k);
    for (std::size_t i = k; i < m; ++i) b[i] += dot * a(i, k);
    a(k, k) = norm; // R diagonal
  }
  std::vector<T> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    T acc = b[ri];
    for (std::size_t j = ri + 1; j < n; ++j) acc -= a(ri, j) * x[j];
    x[ri] = acc / a(ri, ri);
  }
  T resid{};
  for (std::size_t i = n; i < m; ++i) resid += b[i] * b[i];
  return {std::move(x), detail::real_sqrt(resid)};
}

} // namespace adiglm
