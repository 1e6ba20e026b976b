#pragma once

// GLM tableau data model: dimension/preconsistency validation, numerical
// order-condition residuals, W reconstruction from the order conditions,
// block assembly of the alternating-directions tableaux, and stage
// permutation.

#include <cstdio>
#include <optional>
#include <string>

#include "adiglm/core.hpp"

namespace adiglm {

// One GLM in (A, U, B, V, W, c) form. W has p+1 columns (w_0 .. w_p) and ties
// external stages to solution derivatives.
struct BaseTableau {
  RealMatrix A, U, B, V, W;
  std::vector<double> c;
  int p = 0; // order
  int q = 0; // stage order

  std::size_t internal_stages() const { return A.rows(); } // s
  std::size_t external_stages() const { return B.rows(); } // r
};

inline void validate_dimensions(const BaseTableau& t) {
  const std::size_t s = t.internal_stages(), r = t.external_stages();
  if (s == 0) detail::fail("tableau: A is empty");
  if (t.A.cols() != s) detail::fail("tableau: A is ", t.A.rows(), "x", t.A.cols());
  if (t.U.rows() != s || t.U.cols() != r)
    detail::fail("tableau: U is ", t.U.rows(), "x", t.U.cols(), ", expected ", s, "x", r);
  if (t.B.cols() != s)
    detail::fail("tableau: B is ", t.B.rows(), "x", t.B.cols(), ", expected ", r, "x", s);
  if (t.V.rows() != r || t.V.cols() != r)
    detail::fail("tableau: V is ", t.V.rows(), "x", t.V.cols(), ", expected ", r, "x", r);
  if (t.W.rows() != r || t.W.cols() != std::size_t(t.p + 1))
    detail::fail("tableau: W is ", t.W.rows(), "x", t.W.cols(), ", expected ", r, "x", t.p + 1);
  if (t.c.size() != s) detail::fail("tableau: c has length ", t.c.size(), ", expected ", s);
  if (t.q != t.p && t.q != t.p - 1)
    detail::fail("tableau: stage order ", t.q, " not in {p, p-1} for p = ", t.p);
}

namespace detail {

inline double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// c^{ok}: elementwise power, with c^{o0} = 1.
inline std::vector<double> abscissa_power(std::span<const double> c, int k) {
  std::vector<double> out(c.size(), 1.0);
  for (int rep = 0; rep < k; ++rep)
    for (std::size_t i = 0; i < c.size(); ++i) out[i] *= c[i];
  return out;
}

} // namespace detail

struct OrderConditionReport {
  std::vector<double> stage_residuals;  // k = 1..q
  std::vector<double> update_residuals; // k = 1..p

  double max_residual() const {
    double m = 0;
    for (double v : stage_residuals) m = std::max(m, v);
    for (double v : update_residuals) m = std::max(m, v);
    return m;
  }
};

// Max-abs residual of each order condition: for k = 1..q the internal-stage
// family c^{ok}/k! - A c^{o(k-1)}/(k-1)! - U w_k, and for k = 1..p the
// external-stage family sum_{l=0..k} w_{k-l}/l! - B c^{o(k-1)}/(k-1)! - V w_k.
inline OrderConditionReport check_order_conditions(const BaseTableau& t) {
  validate_dimensions(t);
  const std::size_t s = t.internal_stages(), r = t.external_stages();
  OrderConditionReport report;
  auto w_col = [&](int k) {
    std::vector<double> w(r);
    for (std::size_t i = 0; i < r; ++i) w[i] = t.W(i, k);
    return w;
  };
  for (int k = 1; k <= t.q; ++k) {
    auto ck = detail::abscissa_power(t.c, k);
    auto ck1 = detail::abscissa_power(t.c, k - 1);
    auto a_ck1 = t.A * std::span<const double>(ck1);
    auto u_wk = t.U * w_col(k);
    double worst = 0;
    for (std::size_t i = 0; i < s; ++i)
      worst = std::max(worst, std::abs(ck[i] / detail::factorial(k) -
                                       a_ck1[i] / detail::factorial(k - 1) - u_wk[i]));
    report.stage_residuals.push_back(worst);
  }
  for (int k = 1; k <= t.p; ++k) {
    auto ck1 = detail::abscissa_power(t.c, k - 1);
    auto b_ck1 = t.B * std::span<const double>(ck1);
    auto v_wk = t.V * w_col(k);
    double worst = 0;
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0;
      for (int l = 0; l <= k; ++l) acc += t.W(i, k - l) / detail::factorial(l);
      worst = std::max(worst, std::abs(acc - b_ck1[i] / detail::factorial(k - 1) - v_wk[i]));
    }
    report.update_residuals.push_back(worst);
  }
  return report;
}

// (||U w0 - 1||_inf, ||V w0 - w0||_inf)
inline std::pair<double, double> preconsistency_residual(const BaseTableau& t) {
  validate_dimensions(t);
  std::vector<double> w0(t.external_stages());
  for (std::size_t i = 0; i < w0.size(); ++i) w0[i] = t.W(i, 0);
  auto uw0 = t.U * w0;
  auto vw0 = t.V * w0;
  double first = 0, second = 0;
  for (std::size_t i = 0; i < uw0.size(); ++i) first = std::max(first, std::abs(uw0[i] - 1.0));
  for (std::size_t i = 0; i < vw0.size(); ++i) second = std::max(second, std::abs(vw0[i] - w0[i]));
  return {first, second};
}

struct SolveWResult {
  RealMatrix W;    // r x (p+1), first column fixed to ones
  double residual; // least-squares residual of the stacked conditions
};

// Recovers W from the order conditions with w_0 = 1 imposed, solving the
// stacked stage/update conditions (k = 1..p each) in the least-squares sense.
// Requires p = q = r = s, which holds for every cataloged method.
inline SolveWResult solve_w(const RealMatrix& A, const RealMatrix& U, const RealMatrix& B,
                            const RealMatrix& V, std::span<const double> c, int p) {
  const std::size_t s = A.rows(), r = V.rows();
  if (s != r || std::size_t(p) != s)
    detail::fail("solve_w: requires p = r = s, got p = ", p, ", s = ", s, ", r = ", r);
  const std::size_t unknowns = r * std::size_t(p);
  const std::size_t rows = std::size_t(p) * (s + r);
  RealMatrix m(rows, unknowns);
  std::vector<double> rhs(rows);
  std::size_t row = 0;
  for (int k = 1; k <= p; ++k) { // stage conditions: U w_k = c^k/k! - A c^{k-1}/(k-1)!
    auto ck = detail::abscissa_power(c, k);
    auto ck1 = detail::abscissa_power(c, k - 1);
    auto a_ck1 = A * std::span<const double>(ck1);
    for (std::size_t i = 0; i < s; ++i, ++row) {
      for (std::size_t j = 0; j < r; ++j) m(row, (k - 1) * r + j) = U(i, j);
      rhs[row] = ck[i] / detail::factorial(k) - a_ck1[i] / detail::factorial(k - 1);
    }
  }
  for (int k = 1; k <= p; ++k) { // update conditions
    auto ck1 = detail::abscissa_power(c, k - 1);
    auto b_ck1 = B * std::span<const double>(ck1);
    for (std::size_t i = 0; i < r; ++i, ++row) {
      m(row, (k - 1) * r + i) += 1.0; // w_k (l = 0 term)
      for (std::size_t j = 0; j < r; ++j) m(row, (k - 1) * r + j) -= V(i, j);
      for (int l = 1; l <= k - 1; ++l) m(row, (k - l - 1) * r + i) += 1.0 / detail::factorial(l);
      rhs[row] = b_ck1[i] / detail::factorial(k - 1) - 1.0 / detail::factorial(k);
    }
  }
  LeastSquaresResult<double> ls;
  try {
    ls = least_squares(m, rhs);
  } catch (const Error& e) {
    detail::fail("solve_w: ", e.what());
  }
  RealMatrix W(r, p + 1);
  for (std::size_t i = 0; i < r; ++i) {
    W(i, 0) = 1.0;
    for (int k = 1; k <= p; ++k) W(i, k) = ls.solution[(k - 1) * r + i];
  }
  if (ls.residual_norm > 1e-6)
    detail::fail("solve_w: order conditions are inconsistent, least-squares residual ",
                 ls.residual_norm);
  return {std::move(W), ls.residual_norm};
}

// Partition bookkeeping: how many partitions there are, how many of them get
// implicit treatment, and how many distinct stage families are computed.
// With n_stiff = N - 1 the trailing family duplicates family n_stiff and is
// never computed.
struct PartitionLayout {
  int n_partitions = 0;
  int n_stiff = 0;

  int stage_row_count() const { return n_stiff; }
  // Block (family, partition) of the assembled tableau: implicit or explicit?
  bool implicit_block(int family, int partition) const {
    return partition <= std::min(family, n_stiff - 1);
  }
  // Which computed family carries partition sigma's stage values.
  int family_of(int partition) const { return std::min(partition, n_stiff - 1); }
};

inline void validate_layout(const PartitionLayout& layout) {
  if (layout.n_partitions < 2)
    detail::fail("layout: need at least 2 partitions, got ", layout.n_partitions);
  if (layout.n_stiff != layout.n_partitions && layout.n_stiff != layout.n_partitions - 1)
    detail::fail("layout: n_stiff = ", layout.n_stiff, " must be N or N-1 for N = ",
                 layout.n_partitions);
  if (layout.n_stiff < 1) detail::fail("layout: need at least one stiff partition");
}

// An implicit/explicit base pair sharing c, U, V, with the DIMSIM structure.
struct AdiMethod {
  std::string name;
  int order = 0;
  double gamma = 0;
  BaseTableau implicit_base;
  BaseTableau explicit_base;

  std::size_t internal_stages() const { return implicit_base.internal_stages(); }
  std::size_t external_stages() const { return implicit_base.external_stages(); }
  const std::vector<double>& c() const { return implicit_base.c; }
  const RealMatrix& U() const { return implicit_base.U; }
  const RealMatrix& V() const { return implicit_base.V; }
};

inline void validate_adi_method(const AdiMethod& m) {
  validate_dimensions(m.implicit_base);
  validate_dimensions(m.explicit_base);
  const auto& im = m.implicit_base;
  const auto& ex = m.explicit_base;
  const std::size_t s = im.internal_stages(), r = im.external_stages();
  if (im.c != ex.c || !(im.U == ex.U) || !(im.V == ex.V))
    detail::fail(m.name, ": implicit/explicit bases must share c, U, V exactly");
  if (im.p != m.order || im.q != m.order || ex.p != m.order || ex.q != m.order || r != s ||
      s != std::size_t(m.order))
    detail::fail(m.name, ": expected p = q = r = s = ", m.order);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      if (j > i && (im.A(i, j) != 0.0 || ex.A(i, j) != 0.0))
        detail::fail(m.name, ": A blocks must be lower triangular");
      if (j == i && im.A(i, i) != m.gamma)
        detail::fail(m.name, ": implicit A diagonal must equal gamma");
      if (j == i && ex.A(i, i) != 0.0)
        detail::fail(m.name, ": explicit A diagonal must vanish");
    }
  if (!(im.U == RealMatrix::identity(s))) detail::fail(m.name, ": U must be the identity");
  for (std::size_t i = 1; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      if (im.V(i, j) != im.V(0, j)) detail::fail(m.name, ": V rows must be identical");
  double vsum = 0;
  for (std::size_t j = 0; j < r; ++j) vsum += im.V(0, j);
  if (std::abs(vsum - 1.0) > 1e-12) detail::fail(m.name, ": V row sum is ", vsum, ", expected 1");
  if (std::abs(im.c.back() - 1.0) != 0.0)
    detail::fail(m.name, ": c_s must equal 1 for the ending procedure");
}

// The N-family block tableau. Matrices are stored at full N x N block size;
// the layout records that trailing duplicate families are never computed.
struct AssembledTableau {
  RealMatrix A, U, B, V;
  std::vector<double> c;
  PartitionLayout layout;
  std::size_t base_internal_stages = 0; // s of the underlying pair
  std::size_t base_external_stages = 0; // r of the underlying pair
};

inline AssembledTableau assemble_adi(const AdiMethod& m, const PartitionLayout& layout) {
  validate_layout(layout);
  if (layout.n_partitions != 2 && layout.n_partitions != 3)
    detail::fail("assemble_adi: unsupported partition count ", layout.n_partitions);
  const std::size_t s = m.internal_stages(), r = m.external_stages();
  const std::size_t n = std::size_t(layout.n_partitions);
  AssembledTableau out;
  out.layout = layout;
  out.base_internal_stages = s;
  out.base_external_stages = r;
  out.A = RealMatrix(n * s, n * s);
  out.B = RealMatrix(n * r, n * s);
  out.U = RealMatrix(n * s, n * r);
  out.V = RealMatrix(n * r, n * r);
  out.c.resize(n * s);
  for (std::size_t fam = 0; fam < n; ++fam) {
    for (std::size_t part = 0; part < n; ++part) {
      const bool implicit = layout.implicit_block(int(fam), int(part));
      const RealMatrix& a = implicit ? m.implicit_base.A : m.explicit_base.A;
      const RealMatrix& b = implicit ? m.implicit_base.B : m.explicit_base.B;
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) out.A(fam * s + i, part * s + j) = a(i, j);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < s; ++j) out.B(fam * r + i, part * s + j) = b(i, j);
    }
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < r; ++j) out.U(fam * s + i, fam * r + j) = m.U()(i, j);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) out.V(fam * r + i, fam * r + j) = m.V()(i, j);
    for (std::size_t i = 0; i < s; ++i) out.c[fam * s + i] = m.c()[i];
  }
  return out;
}

// (A_{P,P}, U_{P,:}, B_{:,P}, V, c_P) for a 0-based stage permutation P.
inline AssembledTableau permute_tableau(const AssembledTableau& t,
                                        std::span<const std::size_t> perm) {
  const std::size_t n = t.A.rows();
  if (perm.size() != n) detail::fail("permute_tableau: permutation has ", perm.size(),
                                     " entries, expected ", n);
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) detail::fail("permute_tableau: invalid permutation");
    seen[p] = true;
  }
  AssembledTableau out = t;
  for (std::size_t i = 0; i < n; ++i) {
    out.c[i] = t.c[perm[i]];
    for (std::size_t j = 0; j < n; ++j) out.A(i, j) = t.A(perm[i], perm[j]);
    for (std::size_t j = 0; j < t.U.cols(); ++j) out.U(i, j) = t.U(perm[i], j);
  }
  for (std::size_t i = 0; i < t.B.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) out.B(i, j) = t.B(i, perm[j]);
  return out;
}

inline std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

namespace detail {

inline void dump_matrix(std::string& out, const std::string& label, const RealMatrix& m) {
  out += label + " (" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "):\n";
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out += "  ";
      out += buf;
    }
    out += "\n";
  }
}

inline void dump_vector(std::string& out, const std::string& label,
                        std::span<const double> v) {
  out += label + ":\n";
  char buf[40];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += "  ";
    out += buf;
  }
  out += "\n";
}

} // namespace detail

inline std::string dump_tableau(const AdiMethod& m) {
  std::string out = "method " + m.name + " (order " + std::to_string(m.order) + ", s = " +
                    std::to_string(m.internal_stages()) + ", r = " +
                    std::to_string(m.external_stages()) + ")\n";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", m.gamma);
  out += "gamma: ";
  out += buf;
  out += "\n";
  detail::dump_vector(out, "c", m.c());
  detail::dump_matrix(out, "A[implicit]", m.implicit_base.A);
  detail::dump_matrix(out, "A[explicit]", m.explicit_base.A);
  detail::dump_matrix(out, "B[implicit]", m.implicit_base.B);
  detail::dump_matrix(out, "B[explicit]", m.explicit_base.B);
  detail::dump_matrix(out, "U", m.U());
  detail::dump_matrix(out, "V", m.V());
  detail::dump_matrix(out, "W[implicit]", m.implicit_base.W);
  detail::dump_matrix(out, "W[explicit]", m.explicit_base.W);
  return out;
}

inline std::string dump_tableau(const AssembledTableau& t) {
  std::string out = "assembled tableau (" + std::to_string(t.layout.n_partitions) +
                    " partitions, " + std::to_string(t.layout.n_stiff) + " stiff)\n";
  detail::dump_vector(out, "c", t.c);
  detail::dump_matrix(out, "A", t.A);
  detail::dump_matrix(out, "U", t.U);
  detail::dump_matrix(out, "B", t.B);
  detail::dump_matrix(out, "V", t.V);
  return out;
}

} // namespace adiglm
