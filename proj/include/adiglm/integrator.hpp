#pragma once

// The partitioned ADI-GLM time stepper. Stages are swept in the alternating
// order {Y_1^(1), Y_1^(2), ..., Y_1^(N), Y_2^(1), ...}; each stage solve is
// implicit only in its own direction, so only factored 1D line systems are
// ever solved. Includes the finite-difference starting procedure for the
// external stages and the trivial ending procedure (c_s = 1).

#include "adiglm/system.hpp"
#include "adiglm/tableau.hpp"

namespace adiglm {

template <class S>
struct ExternalStages {
  // xi[family][stage index i][component]; family count is the layout's
  // stage_row_count (duplicate trailing families are never stored).
  std::vector<std::vector<std::vector<S>>> xi;

  std::size_t families() const { return xi.size(); }
};

template <class S>
struct StepReport {
  std::vector<std::vector<std::vector<S>>> stages; // [family][stage][component]
  ExternalStages<S> next;
  long linear_solves = 0;   // directional sweeps (one per implicit stage)
  long rhs_evaluations = 0; // partition right-hand-side evaluations
};

template <class S>
class Stepper {
public:
  Stepper(AdiMethod method, PartitionLayout layout, const PartitionedSystem<S>& sys, double h)
      : method_(std::move(method)), layout_(layout), sys_(&sys) {
    validate_layout(layout_);
    if (sys.n_partitions() != layout_.n_partitions)
      detail::fail("stepper: system has ", sys.n_partitions(), " partitions, layout expects ",
                   layout_.n_partitions);
    for (int sigma = 0; sigma < layout_.n_stiff; ++sigma)
      if (!sys.partitions[std::size_t(sigma)].op)
        detail::fail("stepper: stiff partition ", sigma + 1, " has no directional operator");
    set_step(h);
  }

  const AdiMethod& method() const { return method_; }
  const PartitionLayout& layout() const { return layout_; }
  double step_size() const { return h_; }
  long factorizations() const { return factorizations_; }

  // (Re)builds the directional factorizations; a no-op while h is unchanged.
  void set_step(double h) {
    if (!factors_.empty() && h == h_) return;
    factors_.clear();
    factors_.reserve(std::size_t(layout_.n_stiff));
    for (int sigma = 0; sigma < layout_.n_stiff; ++sigma) {
      const auto& op = *sys_->partitions[std::size_t(sigma)].op;
      try {
        factors_.push_back(factor_shifted(op.line_operator, h, method_.gamma));
      } catch (const Error& e) {
        detail::fail("stepper: factorization for partition ", sigma + 1, " failed: ", e.what());
      }
      ++factorizations_;
    }
    h_ = h;
  }

  StepReport<S> step(double t, const ExternalStages<S>& xi) const {
    const int n_fam = layout_.stage_row_count();
    const int n_parts = layout_.n_partitions;
    const std::size_t s = method_.internal_stages();
    const std::size_t r = method_.external_stages();
    const std::size_t d = sys_->dimension();
    if (xi.families() != std::size_t(n_fam))
      detail::fail("step: external stages carry ", xi.families(), " families, expected ", n_fam);

    StepReport<S> report;
    report.stages.assign(std::size_t(n_fam), std::vector<std::vector<S>>(s));
    std::vector<std::vector<std::vector<S>>> f_vals(
        std::size_t(n_parts), std::vector<std::vector<S>>(s, std::vector<S>(d)));
    std::vector<S> work(d);

    for (std::size_t i = 0; i < s; ++i) {
      const double stage_time = t + method_.c()[i] * h_;
      for (int fam = 0; fam < n_fam; ++fam) {
        std::vector<S> rhs = xi.xi[std::size_t(fam)][i]; // U = I
        for (int part = 0; part < n_parts; ++part) {
          const RealMatrix& a = layout_.implicit_block(fam, part) ? method_.implicit_base.A
                                                                  : method_.explicit_base.A;
          for (std::size_t j = 0; j < i; ++j) {
            const double coeff = h_ * a(i, j);
            if (coeff == 0.0) continue;
            const auto& f = f_vals[std::size_t(part)][j];
            for (std::size_t k = 0; k < d; ++k) rhs[k] += coeff * f[k];
          }
        }
        for (int part = 0; part < fam; ++part) {
          const double coeff = h_ * method_.gamma;
          const auto& f = f_vals[std::size_t(part)][i];
          for (std::size_t k = 0; k < d; ++k) rhs[k] += coeff * f[k];
        }
        // (I - h gamma L^fam) Y = rhs + h gamma g^fam(stage_time)
        const auto& partition = sys_->partitions[std::size_t(fam)];
        if (partition.affine) {
          std::fill(work.begin(), work.end(), S{});
          partition.affine(stage_time, work);
          const double coeff = h_ * method_.gamma;
          for (std::size_t k = 0; k < d; ++k) rhs[k] += coeff * work[k];
        }
        solve_lines(sys_->grid, partition.op->axis, factors_[std::size_t(fam)],
                    std::span<S>(rhs));
        ++report.linear_solves;
        sys_->rhs(fam, stage_time, rhs, std::span<S>(f_vals[std::size_t(fam)][i]));
        ++report.rhs_evaluations;
        report.stages[std::size_t(fam)][i] = std::move(rhs);
      }
      // Explicit partitions alias the last computed family's stage values.
      for (int part = n_fam; part < n_parts; ++part) {
        sys_->rhs(part, stage_time, report.stages[std::size_t(n_fam - 1)][i],
                  std::span<S>(f_vals[std::size_t(part)][i]));
        ++report.rhs_evaluations;
      }
    }

    report.next.xi.assign(std::size_t(n_fam), std::vector<std::vector<S>>(r, std::vector<S>(d)));
    for (int fam = 0; fam < n_fam; ++fam) {
      for (std::size_t i = 0; i < r; ++i) {
        std::vector<S>& out = report.next.xi[std::size_t(fam)][i];
        for (std::size_t j = 0; j < r; ++j) {
          const double v = method_.V()(i, j);
          if (v == 0.0) continue;
          const auto& prev = xi.xi[std::size_t(fam)][j];
          for (std::size_t k = 0; k < d; ++k) out[k] += v * prev[k];
        }
        for (int part = 0; part < n_parts; ++part) {
          const RealMatrix& b = layout_.implicit_block(fam, part) ? method_.implicit_base.B
                                                                  : method_.explicit_base.B;
          for (std::size_t j = 0; j < s; ++j) {
            const double coeff = h_ * b(i, j);
            if (coeff == 0.0) continue;
            const auto& f = f_vals[std::size_t(part)][j];
            for (std::size_t k = 0; k < d; ++k) out[k] += coeff * f[k];
          }
        }
      }
    }
    return report;
  }

private:
  AdiMethod method_;
  PartitionLayout layout_;
  const PartitionedSystem<S>* sys_;
  double h_ = 0;
  std::vector<TridiagonalFactor<S>> factors_;
  long factorizations_ = 0;
};

namespace detail {

// Reference trajectory fallback: classical RK4 on the full right-hand side
// with 100 substeps per node interval. Only exercised when the problem has no
// closed-form solution.
template <class S>
std::vector<std::vector<S>> rk4_reference_nodes(const PartitionedSystem<S>& sys, double t0,
                                                double h, int p, long* rhs_evals) {
  const std::size_t d = sys.dimension();
  const int n_parts = sys.n_partitions();
  std::vector<std::vector<S>> nodes(static_cast<std::size_t>(p));
  nodes[0] = sys.initial_state(t0);
  auto full_rhs = [&](double t, const std::vector<S>& y, std::vector<S>& out) {
    std::vector<S> part(d);
    std::fill(out.begin(), out.end(), S{});
    for (int sigma = 0; sigma < n_parts; ++sigma) {
      sys.rhs(sigma, t, y, std::span<S>(part));
      if (rhs_evals) ++*rhs_evals;
      for (std::size_t k = 0; k < d; ++k) out[k] += part[k];
    }
  };
  std::vector<S> k1(d), k2(d), k3(d), k4(d), tmp(d);
  std::vector<S> y = nodes[0];
  double t = t0;
  for (int node = 1; node < p; ++node) {
    const int substeps = 100;
    const double dt = h / substeps;
    for (int step = 0; step < substeps; ++step) {
      full_rhs(t, y, k1);
      for (std::size_t k = 0; k < d; ++k) tmp[k] = y[k] + (dt / 2) * k1[k];
      full_rhs(t + dt / 2, tmp, k2);
      for (std::size_t k = 0; k < d; ++k) tmp[k] = y[k] + (dt / 2) * k2[k];
      full_rhs(t + dt / 2, tmp, k3);
      for (std::size_t k = 0; k < d; ++k) tmp[k] = y[k] + dt * k3[k];
      full_rhs(t + dt, tmp, k4);
      for (std::size_t k = 0; k < d; ++k)
        y[k] += (dt / 6) * (k1[k] + S(2) * k2[k] + S(2) * k3[k] + k4[k]);
      t += dt;
    }
    nodes[std::size_t(node)] = y;
  }
  return nodes;
}

// One-sided finite-difference weights on the uniform nodes 0, 1, ..., p-1:
// row j maps samples f(k h) to h^j f^(j)(t_0). From the Taylor expansion,
// f(k h) = sum_j (k^j / j!) h^j f^(j)(t_0) + O(h^p), so the weights are the
// inverse of the local Vandermonde-in-Taylor-form matrix.
inline RealMatrix scaled_derivative_weights(int p) {
  RealMatrix taylor(p, p); // taylor(k, j) = k^j / j!
  for (int k = 0; k < p; ++k) {
    double value = 1, fact = 1;
    for (int j = 0; j < p; ++j) {
      if (j > 0) {
        value *= k;
        fact *= j;
      }
      taylor(k, j) = value / fact;
    }
  }
  return lu_solve(taylor, RealMatrix::identity(p));
}

} // namespace detail

// Initializes the external stages at t0: samples f^sigma along a reference
// trajectory on the nodes t0 + k h (k = 0..p-1), forms h^k-scaled derivative
// approximations by one-sided finite differences, and combines them with the
// per-family derivative weights. Accurate to O(h^{p+1}).
template <class S>
ExternalStages<S> start_external_stages(const AdiMethod& m, const PartitionLayout& layout,
                                        const PartitionedSystem<S>& sys, double t0, double h,
                                        const std::vector<std::vector<S>>* reference_nodes = nullptr,
                                        long* rhs_evals = nullptr) {
  validate_layout(layout);
  const int p = m.order;
  const int n_parts = layout.n_partitions;
  const int n_fam = layout.stage_row_count();
  const std::size_t d = sys.dimension();
  const std::size_t r = m.external_stages();

  std::vector<std::vector<S>> nodes;
  if (reference_nodes) {
    if (reference_nodes->size() != std::size_t(p))
      detail::fail("starting procedure: ", reference_nodes->size(), " reference nodes, expected ",
                   p);
    for (const auto& node : *reference_nodes)
      if (node.size() != d)
        detail::fail("starting procedure: reference node has length ", node.size(), ", expected ",
                     d);
    nodes = *reference_nodes;
  } else if (sys.exact) {
    nodes.resize(std::size_t(p));
    for (int k = 0; k < p; ++k) nodes[std::size_t(k)] = sys.exact_state(t0 + k * h);
  } else {
    nodes = detail::rk4_reference_nodes(sys, t0, h, p, rhs_evals);
  }

  // f^sigma at the nodes, then scaled derivatives h^j (f^sigma)^(j)(t0).
  RealMatrix weights = detail::scaled_derivative_weights(p);
  std::vector<std::vector<std::vector<S>>> scaled(
      static_cast<std::size_t>(n_parts),
      std::vector<std::vector<S>>(static_cast<std::size_t>(p), std::vector<S>(d)));
  {
    std::vector<std::vector<S>> f_nodes(static_cast<std::size_t>(p), std::vector<S>(d));
    for (int sigma = 0; sigma < n_parts; ++sigma) {
      for (int k = 0; k < p; ++k) {
        sys.rhs(sigma, t0 + k * h, nodes[std::size_t(k)], std::span<S>(f_nodes[std::size_t(k)]));
        if (rhs_evals) ++*rhs_evals;
      }
      for (int j = 0; j < p; ++j) {
        auto& out = scaled[std::size_t(sigma)][std::size_t(j)];
        for (int k = 0; k < p; ++k) {
          const double w = weights(j, k);
          if (w == 0.0) continue;
          for (std::size_t kk = 0; kk < d; ++kk) out[kk] += w * f_nodes[std::size_t(k)][kk];
        }
      }
    }
  }

  ExternalStages<S> xi;
  xi.xi.assign(std::size_t(n_fam), std::vector<std::vector<S>>(r, std::vector<S>(d)));
  for (int fam = 0; fam < n_fam; ++fam) {
    for (std::size_t i = 0; i < r; ++i) {
      std::vector<S>& out = xi.xi[std::size_t(fam)][i];
      const double w0 = m.implicit_base.W(i, 0);
      for (std::size_t kk = 0; kk < d; ++kk) out[kk] = w0 * nodes[0][kk];
      for (int sigma = 0; sigma < n_parts; ++sigma) {
        const RealMatrix& w = layout.implicit_block(fam, sigma) ? m.implicit_base.W
                                                                : m.explicit_base.W;
        for (int k = 1; k <= p; ++k) {
          const double coeff = w(i, k) * h;
          if (coeff == 0.0) continue;
          const auto& deriv = scaled[std::size_t(sigma)][std::size_t(k - 1)];
          for (std::size_t kk = 0; kk < d; ++kk) out[kk] += coeff * deriv[kk];
        }
      }
    }
  }
  return xi;
}

// Ending procedure: with c_s = 1 the last computed internal stage is already
// the new solution value.
template <class S>
std::vector<S> finish(const AdiMethod& m, const StepReport<S>& report) {
  (void)m;
  return report.stages.back().back();
}

struct IntegrationCounters {
  long rhs_evaluations = 0; // step loop only
  long linear_solves = 0;
  long factorizations = 0;
  long start_rhs_evaluations = 0;
};

template <class S>
struct IntegrationResult {
  std::vector<S> state;
  std::optional<double> rel_l2_error;
  IntegrationCounters counters;
};

template <class S>
IntegrationResult<S> integrate(const AdiMethod& m, const PartitionLayout& layout,
                               const PartitionedSystem<S>& sys, double t0, double tf,
                               long nsteps) {
  if (nsteps < m.order)
    detail::fail("integrate: nsteps = ", nsteps, " is below the method order ", m.order);
  const double h = (tf - t0) / double(nsteps);
  Stepper<S> stepper(m, layout, sys, h);
  IntegrationResult<S> result;
  ExternalStages<S> xi = start_external_stages<S>(m, layout, sys, t0, h, nullptr,
                                                   &result.counters.start_rhs_evaluations);
  StepReport<S> report;
  for (long n = 0; n < nsteps; ++n) {
    report = stepper.step(t0 + n * h, xi);
    xi = std::move(report.next);
    result.counters.rhs_evaluations += report.rhs_evaluations;
    result.counters.linear_solves += report.linear_solves;
  }
  result.counters.factorizations = stepper.factorizations();
  result.state = finish(m, report);
  if (sys.exact) result.rel_l2_error = relative_l2_error(result.state, sys.exact_state(tf));
  return result;
}

} // namespace adiglm
