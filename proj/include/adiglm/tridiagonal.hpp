#pragma once

// Tridiagonal operators, LU factorization of shifted operators (I - h*gamma*T)
// with partial pivoting, and line-wise application over tensor-product grids.
// Grid ordering is lexicographic with the first axis fastest; directional
// solves walk strided lines in place rather than transposing the field.

#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "adiglm/core.hpp"

namespace adiglm {

template <class S>
struct Tridiagonal {
  std::vector<S> sub, diag, sup; // lengths n-1, n, n-1

  Tridiagonal() = default;
  Tridiagonal(std::vector<S> sub_, std::vector<S> diag_, std::vector<S> sup_)
      : sub(std::move(sub_)), diag(std::move(diag_)), sup(std::move(sup_)) {
    if (diag.empty() || sub.size() + 1 != diag.size() || sup.size() + 1 != diag.size())
      detail::fail("Tridiagonal: band lengths ", sub.size(), "/", diag.size(), "/", sup.size(),
                   " are inconsistent");
  }

  static Tridiagonal constant(std::size_t n, S lower, S main, S upper) {
    return Tridiagonal(std::vector<S>(n - 1, lower), std::vector<S>(n, main),
                       std::vector<S>(n - 1, upper));
  }
  static Tridiagonal zero(std::size_t n) { return constant(n, S{}, S{}, S{}); }

  std::size_t size() const { return diag.size(); }

  void apply(std::span<const S> x, std::span<S> out) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      S acc = diag[i] * x[i];
      if (i > 0) acc += sub[i - 1] * x[i - 1];
      if (i + 1 < n) acc += sup[i] * x[i + 1];
      out[i] = acc;
    }
  }
};

// LU factors of (I - h*gamma*T) with partial pivoting; pivoting fills in one
// extra superdiagonal. Safe for the indefinite shifts that show up in
// stability experiments, at negligible extra cost over a plain Thomas sweep.
template <class S>
class TridiagonalFactor {
public:
  TridiagonalFactor(const Tridiagonal<S>& t, double h, double gamma) : h_(h), gamma_(gamma) {
    const std::size_t n = t.size();
    const S shift = S(h * gamma);
    d0_.resize(n);
    for (std::size_t i = 0; i < n; ++i) d0_[i] = S(1) - shift * t.diag[i];
    d1_.assign(n > 1 ? n - 1 : 0, S{});
    d2_.assign(n > 2 ? n - 2 : 0, S{});
    lower_.assign(n > 1 ? n - 1 : 0, S{});
    swapped_.assign(n > 1 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      d1_[i] = -shift * t.sup[i];
      lower_[i] = -shift * t.sub[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (magnitude(d0_[i]) >= magnitude(lower_[i])) {
        if (magnitude(d0_[i]) == typename scalar_traits<S>::real_type{})
          detail::fail("factor_shifted: singular pivot at row ", i,
                       " (h*gamma = ", h * gamma, ")");
        S fact = lower_[i] / d0_[i];
        lower_[i] = fact;
        d0_[i + 1] -= fact * d1_[i];
        if (i + 2 < n) d2_[i] = S{};
      } else {
        S fact = d0_[i] / lower_[i];
        d0_[i] = lower_[i];
        lower_[i] = fact;
        S temp = d1_[i];
        d1_[i] = d0_[i + 1];
        d0_[i + 1] = temp - fact * d0_[i + 1];
        if (i + 2 < n) {
          d2_[i] = d1_[i + 1];
          d1_[i + 1] = -fact * d1_[i + 1];
        }
        swapped_[i] = 1;
      }
    }
    if (magnitude(d0_[n - 1]) == typename scalar_traits<S>::real_type{})
      detail::fail("factor_shifted: singular pivot at row ", n - 1, " (h*gamma = ", h * gamma, ")");
  }

  std::size_t size() const { return d0_.size(); }
  double h() const { return h_; }
  double gamma() const { return gamma_; }

  // Solves (I - h*gamma*T) x = b in place over a strided slice.
  void solve_strided(S* b, std::ptrdiff_t stride) const {
    const std::size_t n = size();
    auto at = [&](std::size_t i) -> S& { return b[std::ptrdiff_t(i) * stride]; };
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped_[i]) {
        at(i + 1) -= lower_[i] * at(i);
      } else {
        S temp = at(i);
        at(i) = at(i + 1);
        at(i + 1) = temp - lower_[i] * at(i + 1);
      }
    }
    at(n - 1) /= d0_[n - 1];
    if (n > 1) at(n - 2) = (at(n - 2) - d1_[n - 2] * at(n - 1)) / d0_[n - 2];
    for (std::size_t ri = n - 1; ri-- > 1;) {
      std::size_t i = ri - 1;
      at(i) = (at(i) - d1_[i] * at(i + 1) - d2_[i] * at(i + 2)) / d0_[i];
    }
  }

  void solve_in_place(std::span<S> b) const {
    if (b.size() != size())
      detail::fail("tridiagonal solve: rhs length ", b.size(), ", expected ", size());
    solve_strided(b.data(), 1);
  }

private:
  std::vector<S> lower_, d0_, d1_, d2_;
  std::vector<unsigned char> swapped_;
  double h_, gamma_;
};

template <class S>
TridiagonalFactor<S> factor_shifted(const Tridiagonal<S>& t, double h, double gamma) {
  return TridiagonalFactor<S>(t, h, gamma);
}

struct GridLayout {
  std::vector<std::size_t> extents; // first axis fastest

  std::size_t total() const {
    std::size_t n = 1;
    for (std::size_t e : extents) n *= e;
    return n;
  }
  int rank() const { return int(extents.size()); }
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= extents[a];
    return s;
  }
};

// Visits the base offset of every grid line along `axis`.
template <class F>
void for_each_line(const GridLayout& grid, int axis, F&& fn) {
  const std::size_t stride = grid.stride(axis);
  const std::size_t block = stride * grid.extents[axis];
  const std::size_t blocks = grid.total() / block;
  for (std::size_t ob = 0; ob < blocks; ++ob)
    for (std::size_t in = 0; in < stride; ++in) fn(ob * block + in, stride);
}

// out = (I x .. x T x .. x I) in, with T acting along `axis`.
template <class S>
void apply_lines(const GridLayout& grid, int axis, const Tridiagonal<S>& t,
                 std::span<const S> in, std::span<S> out) {
  if (axis < 0 || axis >= grid.rank()) detail::fail("apply_lines: axis ", axis, " out of range");
  if (t.size() != grid.extents[axis])
    detail::fail("apply_lines: operator size ", t.size(), " vs grid extent ", grid.extents[axis]);
  if (in.size() != grid.total() || out.size() != grid.total())
    detail::fail("apply_lines: state length ", in.size(), ", expected ", grid.total());
  const std::size_t n = t.size();
  for_each_line(grid, axis, [&](std::size_t base, std::size_t stride) {
    for (std::size_t i = 0; i < n; ++i) {
      S acc = t.diag[i] * in[base + i * stride];
      if (i > 0) acc += t.sub[i - 1] * in[base + (i - 1) * stride];
      if (i + 1 < n) acc += t.sup[i] * in[base + (i + 1) * stride];
      out[base + i * stride] = acc;
    }
  });
}

// In-place solve of (I - h*gamma*L_axis) x = rhs, where L_axis is the
// Kronecker lift of the factored 1D operator along `axis`.
template <class S>
void solve_lines(const GridLayout& grid, int axis, const TridiagonalFactor<S>& factor,
                 std::span<S> state) {
  if (axis < 0 || axis >= grid.rank()) detail::fail("solve_lines: axis ", axis, " out of range");
  if (factor.size() != grid.extents[axis])
    detail::fail("solve_lines: factor size ", factor.size(), " vs grid extent ",
                 grid.extents[axis]);
  if (state.size() != grid.total())
    detail::fail("solve_lines: state length ", state.size(), ", expected ", grid.total());
  for_each_line(grid, axis, [&](std::size_t base, std::size_t stride) {
    factor.solve_strided(state.data() + base, std::ptrdiff_t(stride));
  });
}

} // namespace adiglm
