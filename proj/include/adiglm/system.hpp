#pragma once

// Additively partitioned right-hand sides over tensor-product grids. Each
// partition is a directional tridiagonal operator (per grid line) plus an
// affine part carrying forcing and boundary contributions; partitions without
// an operator are pure forcing and can only be treated explicitly.

#include <functional>
#include <optional>

#include "adiglm/tridiagonal.hpp"

namespace adiglm {

template <class S>
struct DirectionalOperator {
  int axis = 0;
  Tridiagonal<S> line_operator; // acts along every grid line of `axis`
};

// Affine callbacks accumulate into their output span (they never clear it),
// so right-hand-side assembly needs no scratch vectors.
template <class S>
using AffineFn = std::function<void(double t, std::span<S> accumulate_into)>;

template <class S>
using StateFn = std::function<void(double t, std::span<S> out)>;

template <class S>
struct PartitionedSystem {
  struct Partition {
    std::optional<DirectionalOperator<S>> op;
    AffineFn<S> affine; // null means zero
  };

  GridLayout grid;
  std::vector<Partition> partitions;
  StateFn<S> exact;   // null if no closed-form solution is available
  StateFn<S> initial; // null means: take the exact solution at t0

  std::size_t dimension() const { return grid.total(); }
  int n_partitions() const { return int(partitions.size()); }

  void apply_operator(int sigma, std::span<const S> y, std::span<S> out) const {
    const Partition& p = partitions[std::size_t(sigma)];
    if (p.op) {
      apply_lines(grid, p.op->axis, p.op->line_operator, y, out);
    } else {
      std::fill(out.begin(), out.end(), S{});
    }
  }

  void affine_part(int sigma, double t, std::span<S> out) const {
    std::fill(out.begin(), out.end(), S{});
    const Partition& p = partitions[std::size_t(sigma)];
    if (p.affine) p.affine(t, out);
  }

  // f^sigma(t, y) = L^sigma y + g^sigma(t)
  void rhs(int sigma, double t, std::span<const S> y, std::span<S> out) const {
    apply_operator(sigma, y, out);
    const Partition& p = partitions[std::size_t(sigma)];
    if (p.affine) p.affine(t, out);
  }

  std::vector<S> exact_state(double t) const {
    if (!exact) detail::fail("system has no exact solution");
    std::vector<S> out(dimension());
    exact(t, std::span<S>(out));
    return out;
  }

  std::vector<S> initial_state(double t0) const {
    if (initial) {
      std::vector<S> out(dimension());
      initial(t0, std::span<S>(out));
      return out;
    }
    if (!exact) detail::fail("system has neither an initial state nor an exact solution");
    return exact_state(t0);
  }
};

// The scalar linear test problem u' = sum_sigma lambda_sigma u, the primary
// step-correctness oracle: one ADI-GLM step on it must reproduce the
// stability matrix applied to the external stages.
template <class S>
PartitionedSystem<S> scalar_test_system(const std::vector<S>& lambdas, S y0) {
  PartitionedSystem<S> sys;
  sys.grid = GridLayout{{1}};
  S total{};
  for (const S& lambda : lambdas) {
    total += lambda;
    typename PartitionedSystem<S>::Partition part;
    part.op = DirectionalOperator<S>{0, Tridiagonal<S>({}, {lambda}, {})};
    sys.partitions.push_back(std::move(part));
  }
  sys.exact = [y0, total](double t, std::span<S> out) { out[0] = y0 * std::exp(total * t); };
  return sys;
}

// ||numeric - exact||_2 / ||exact||_2
template <class S>
double relative_l2_error(std::span<const S> numeric, std::span<const S> exact) {
  if (numeric.size() != exact.size())
    detail::fail("relative_l2_error: lengths ", numeric.size(), " and ", exact.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    double d = magnitude(numeric[i] - exact[i]);
    double e = magnitude(exact[i]);
    num += d * d;
    den += e * e;
  }
  if (den == 0) detail::fail("relative_l2_error: exact state has zero norm");
  return std::sqrt(num / den);
}

template <class S>
double relative_l2_error(const std::vector<S>& numeric, const std::vector<S>& exact) {
  return relative_l2_error(std::span<const S>(numeric), std::span<const S>(exact));
}

} // namespace adiglm
