#pragma once

// Dense complex eigenvalues for the stability analysis. The matrices are at
// most a few times the stage count (<= 12x12 in practice, capped at 64), so a
// single-shift complex Hessenberg QR with Wilkinson and occasional
// exceptional shifts is plenty. Templated on the real type: the stiff-limit
// diagnostics run the same code in extended precision, where the defective
// eigenvalue of the limit block is resolvable.

#include <limits>
#include <vector>

#include "adiglm/core.hpp"

namespace adiglm {

namespace detail {

template <class R>
struct eig_epsilon {
  static constexpr R value = std::numeric_limits<R>::epsilon();
};

template <class R>
struct Givens {
  R c;
  std::complex<R> s;
};

// G * [f; g] = [r; 0] with G = [[c, s], [-conj(s), c]], c real.
template <class R>
Givens<R> make_givens(const std::complex<R>& f, const std::complex<R>& g) {
  using C = std::complex<R>;
  R fm = magnitude(f), gm = magnitude(g);
  if (gm == R(0)) return {R(1), C(0)};
  if (fm == R(0)) return {R(0), conj(g) / gm};
  R d = fm > gm ? fm : gm;
  R p = fm / d, q = gm / d;
  R denom = d * detail::real_sqrt(p * p + q * q);
  C phase = f / fm;
  return {fm / denom, phase * (conj(g) / denom)};
}

} // namespace detail

// Eigenvalues of a dense complex matrix (values only, no vectors). Throws on
// non-square input, n > 64, or a stalled QR iteration.
template <class R>
std::vector<std::complex<R>> eigenvalues(Matrix<std::complex<R>> h) {
  using C = std::complex<R>;
  const std::size_t n = h.rows();
  if (h.cols() != n) detail::fail("eigenvalues: matrix is ", h.rows(), "x", h.cols());
  if (n > 64) detail::fail("eigenvalues: dimension ", n, " exceeds the supported cap of 64");
  std::vector<C> eigs;
  eigs.reserve(n);
  if (n == 0) return eigs;
  if (n == 1) return {h(0, 0)};

  const R eps = detail::eig_epsilon<R>::value;

  // Householder reduction to upper Hessenberg form.
  std::vector<C> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    R norm{};
    for (std::size_t i = k + 1; i < n; ++i) {
      R m = magnitude(h(i, k));
      norm += m * m;
    }
    norm = detail::real_sqrt(norm);
    if (norm == R(0)) continue;
    C x0 = h(k + 1, k);
    C alpha = magnitude(x0) == R(0) ? C(-norm) : -(x0 / magnitude(x0)) * norm;
    R vnorm2{};
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      R m = magnitude(v[i]);
      vnorm2 += m * m;
    }
    if (vnorm2 == R(0)) continue;
    // Left update: rows k+1.., all columns from k.
    for (std::size_t j = k; j < n; ++j) {
      C dot{};
      for (std::size_t i = k + 1; i < n; ++i) dot += conj(v[i]) * h(i, j);
      dot *= R(2) / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i] * dot;
    }
    // Right update: all rows, columns k+1...
    for (std::size_t i = 0; i < n; ++i) {
      C dot{};
      for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      dot *= R(2) / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= dot * conj(v[j]);
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = C(0);
  }

  R scale = max_abs(h);
  if (scale == R(0)) scale = R(1);

  auto two_by_two = [&](std::size_t lo) {
    C a = h(lo, lo), b = h(lo, lo + 1), cc = h(lo + 1, lo), d = h(lo + 1, lo + 1);
    C half = (a - d) / R(2);
    C disc = complex_sqrt(half * half + b * cc);
    C mid = (a + d) / R(2);
    eigs.push_back(mid + disc);
    eigs.push_back(mid - disc);
  };

  std::size_t hi = n - 1;
  int block_iters = 0;
  while (true) {
    // Deflate trailing converged eigenvalues and locate the active block.
    std::size_t lo = hi;
    while (lo > 0) {
      R off = magnitude(h(lo, lo - 1));
      R diag_scale = magnitude(h(lo - 1, lo - 1)) + magnitude(h(lo, lo));
      if (diag_scale == R(0)) diag_scale = scale;
      if (off <= eps * diag_scale) {
        h(lo, lo - 1) = C(0);
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eigs.push_back(h(hi, hi));
      block_iters = 0;
      if (hi == 0) break;
      --hi;
      continue;
    }
    if (lo + 1 == hi) {
      two_by_two(lo);
      block_iters = 0;
      if (hi == 1) break;
      hi -= 2;
      continue;
    }

    if (++block_iters > 60)
      detail::fail("eigenvalues: QR iteration stalled on a block of size ", hi - lo + 1);

    C shift;
    if (block_iters % 10 == 0) {
      // Exceptional shift to break occasional symmetry-induced cycles.
      shift = h(hi, hi) + C(R(0.75) * magnitude(h(hi, hi - 1)));
    } else {
      C a = h(hi - 1, hi - 1), b = h(hi - 1, hi), cc = h(hi, hi - 1), d = h(hi, hi);
      C half = (a - d) / R(2);
      C disc = complex_sqrt(half * half + b * cc);
      C l1 = half + disc, l2 = half - disc; // eigenvalues minus d
      shift = d + (magnitude(l1) < magnitude(l2) ? l1 : l2);
    }

    for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= shift;
    std::vector<detail::Givens<R>> rots(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) {
      auto g = detail::make_givens(h(k, k), h(k + 1, k));
      rots[k - lo] = g;
      for (std::size_t j = k; j <= hi; ++j) {
        C top = h(k, j), bot = h(k + 1, j);
        h(k, j) = g.c * top + g.s * bot;
        h(k + 1, j) = -conj(g.s) * top + g.c * bot;
      }
      h(k + 1, k) = C(0);
    }
    for (std::size_t k = lo; k < hi; ++k) {
      auto g = rots[k - lo];
      std::size_t row_hi = k + 1 < hi ? k + 1 : hi;
      for (std::size_t i = lo; i <= row_hi; ++i) {
        C left = h(i, k), right = h(i, k + 1);
        h(i, k) = g.c * left + conj(g.s) * right;
        h(i, k + 1) = -g.s * left + g.c * right;
      }
    }
    for (std::size_t i = lo; i <= hi; ++i) h(i, i) += shift;
  }
  return eigs;
}

template <class R>
R spectral_radius(const Matrix<std::complex<R>>& m) {
  R best{};
  for (const auto& lambda : eigenvalues(m)) best = std::max(best, magnitude(lambda));
  return best;
}

inline double spectral_radius(const RealMatrix& m) { return spectral_radius(to_complex(m)); }

} // namespace adiglm
