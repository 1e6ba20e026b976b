#pragma once

// Linear stability analysis: per-base stability matrices, the N-way ADI
// stability matrix and its equal-eta specialization, the infinitely-stiff
// limit block, and streaming region scans over complex or real-pair grids.

#include <functional>
#include <ostream>

#include "adiglm/eigen.hpp"
#include "adiglm/methods.hpp"
#include "adiglm/tableau.hpp"

namespace adiglm {

// Region membership: spectral radius at most 1 + this slack. Points inside
// (1 - boundary_band, 1 + membership_slack] are additionally flagged, since a
// defective eigenvalue on the unit circle is not genuinely power bounded.
inline constexpr double membership_slack = 1e-10;
inline constexpr double boundary_band = 1e-6;

struct StabilityEvaluation {
  std::vector<Complex> eta;
  ComplexMatrix matrix;
  double rho = 0;
};

// M(eta) = V + eta B (I - eta A)^{-1} U for one base method.
inline ComplexMatrix base_stability_matrix(const BaseTableau& t, Complex eta) {
  const std::size_t s = t.internal_stages();
  ComplexMatrix resolvent = ComplexMatrix::identity(s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) resolvent(i, j) -= eta * t.A(i, j);
  ComplexMatrix x;
  try {
    x = lu_solve(resolvent, to_complex(t.U));
  } catch (const Error&) {
    detail::fail("base_stability_matrix: singular resolvent at eta = (", eta.real(), ", ",
                 eta.imag(), ")");
  }
  ComplexMatrix m = to_complex(t.B) * x;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      m(i, j) *= eta;
      m(i, j) += t.V(i, j);
    }
  return m;
}

// Stability matrix of the N-way method with per-direction eta values:
// M = V~ + B~ Z (I - A~ Z)^{-1} U~ with Z = blkdiag(eta_sigma I_s) and the
// block pattern of the assembled tableau.
inline StabilityEvaluation adi_stability_matrix(const AdiMethod& m, const PartitionLayout& layout,
                                                std::span<const Complex> eta) {
  validate_layout(layout);
  if (eta.size() != std::size_t(layout.n_partitions))
    detail::fail("adi_stability_matrix: ", eta.size(), " eta values for ", layout.n_partitions,
                 " partitions");
  const std::size_t s = m.internal_stages(), r = m.external_stages();
  const std::size_t n = eta.size();
  ComplexMatrix resolvent = ComplexMatrix::identity(n * s); // I - A~ Z
  ComplexMatrix bz(n * r, n * s);                           // B~ Z
  for (std::size_t fam = 0; fam < n; ++fam)
    for (std::size_t part = 0; part < n; ++part) {
      const bool implicit = layout.implicit_block(int(fam), int(part));
      const RealMatrix& a = implicit ? m.implicit_base.A : m.explicit_base.A;
      const RealMatrix& b = implicit ? m.implicit_base.B : m.explicit_base.B;
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
          resolvent(fam * s + i, part * s + j) -= a(i, j) * eta[part];
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < s; ++j) bz(fam * r + i, part * s + j) = b(i, j) * eta[part];
    }
  ComplexMatrix u_tilde(n * s, n * r);
  for (std::size_t fam = 0; fam < n; ++fam)
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < r; ++j) u_tilde(fam * s + i, fam * r + j) = m.U()(i, j);
  ComplexMatrix x;
  try {
    x = lu_solve(std::move(resolvent), std::move(u_tilde));
  } catch (const Error&) {
    detail::fail("adi_stability_matrix: singular resolvent");
  }
  StabilityEvaluation out;
  out.eta.assign(eta.begin(), eta.end());
  out.matrix = bz * x;
  for (std::size_t fam = 0; fam < n; ++fam)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        out.matrix(fam * r + i, fam * r + j) += m.V()(i, j);
  out.rho = spectral_radius(out.matrix);
  return out;
}

inline StabilityEvaluation adi_stability_matrix(const AdiMethod& m, int n_partitions,
                                                std::span<const Complex> eta) {
  return adi_stability_matrix(m, PartitionLayout{n_partitions, n_partitions}, eta);
}

// Equal stiffness in every direction: M(eta, ..., eta).
inline StabilityEvaluation uniform_stability_matrix(const AdiMethod& m, int n_partitions,
                                                    Complex eta) {
  std::vector<Complex> etas(std::size_t(n_partitions), eta);
  return adi_stability_matrix(m, n_partitions, etas);
}

// Upper-left block of the stability matrix limit as every direction becomes
// infinitely stiff: X = V - (B^I - B^E)(A^I - A^E)^{-1} U. Templated so the
// defective spectrum of X can be examined in extended precision.
template <class R>
Matrix<R> stiff_limit_block(const MethodCoefficients<R>& co) {
  Matrix<R> diff_a = co.AI - co.AE;
  Matrix<R> u = Matrix<R>::identity(co.c.size());
  Matrix<R> y;
  try {
    y = lu_solve(std::move(diff_a), std::move(u));
  } catch (const Error&) {
    detail::fail("stiff_limit_block: A^I - A^E is singular");
  }
  return rank_one_rows(co.v) - (co.BI - co.BE) * y;
}

inline RealMatrix stiff_limit_block(const AdiMethod& m) {
  RealMatrix diff_a = m.implicit_base.A - m.explicit_base.A;
  RealMatrix y;
  try {
    y = lu_solve(std::move(diff_a), RealMatrix::identity(m.internal_stages()));
  } catch (const Error&) {
    detail::fail("stiff_limit_block: A^I - A^E is singular");
  }
  return m.V() - (m.implicit_base.B - m.explicit_base.B) * y;
}

// mu_{ij} = 1/(j-i)! for i <= j: the exact one-step shift of Taylor weights.
template <class R = double>
Matrix<R> taylor_shift_matrix(int p) {
  Matrix<R> m(p, p);
  for (int i = 0; i < p; ++i) {
    R f(1);
    for (int j = i; j < p; ++j) {
      if (j > i) f = f * R(j - i);
      m(i, j) = R(1) / f;
    }
  }
  return m;
}

// Columns 1, c, c^2/2!, ..., c^{p-1}/(p-1)!.
template <class R = double>
Matrix<R> abscissa_taylor_matrix(std::span<const R> c, int p) {
  Matrix<R> m(c.size(), p);
  for (std::size_t i = 0; i < c.size(); ++i) {
    R value(1), fact(1);
    for (int k = 0; k < p; ++k) {
      if (k > 0) {
        value = value * c[i];
        fact = fact * R(k);
      }
      m(i, k) = value / fact;
    }
  }
  return m;
}

// W columns 1..p (the derivative weights, dropping w_0).
template <class R>
Matrix<R> derivative_weight_columns(const Matrix<R>& w, int p) {
  Matrix<R> out(w.rows(), p);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (int k = 0; k < p; ++k) out(i, k) = w(i, k + 1);
  return out;
}

enum class RegionKind { ExplicitBase, ImplicitBase, Cplx, Real };

struct ScanWindow {
  double x_min, x_max; // Re(eta) or eta_x
  double y_min, y_max; // Im(eta) or eta_y
  int nx = 0, ny = 0;
};

struct ScanPoint {
  double x = 0, y = 0;
  double rho = 0;
  bool member = false;
  bool near_boundary = false; // 1 - boundary_band < rho <= 1 + membership_slack
};

// Evaluates the requested region over the window, column by column, streaming
// each point into the sink. Resolvent singularities are recorded as rho = inf
// rather than raised.
template <class Sink>
void scan_region(const AdiMethod& m, RegionKind kind, const ScanWindow& window, int n_partitions,
                 Sink&& sink) {
  if (window.nx < 1 || window.ny < 1) detail::fail("scan_region: empty grid");
  if (n_partitions != 2 && n_partitions != 3)
    detail::fail("scan_region: unsupported partition count ", n_partitions);
  auto coordinate = [](double lo, double hi, int n, int i) {
    return n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
  };
  for (int ix = 0; ix < window.nx; ++ix) {
    const double x = coordinate(window.x_min, window.x_max, window.nx, ix);
    for (int iy = 0; iy < window.ny; ++iy) {
      const double y = coordinate(window.y_min, window.y_max, window.ny, iy);
      ScanPoint point;
      point.x = x;
      point.y = y;
      try {
        switch (kind) {
          case RegionKind::ExplicitBase:
            point.rho = spectral_radius(base_stability_matrix(m.explicit_base, Complex(x, y)));
            break;
          case RegionKind::ImplicitBase:
            point.rho = spectral_radius(base_stability_matrix(m.implicit_base, Complex(x, y)));
            break;
          case RegionKind::Cplx:
            point.rho = uniform_stability_matrix(m, n_partitions, Complex(x, y)).rho;
            break;
          case RegionKind::Real: {
            std::vector<Complex> etas{Complex(x, 0), Complex(y, 0)};
            if (n_partitions == 3) etas.emplace_back(std::max(x, y), 0);
            point.rho = adi_stability_matrix(m, n_partitions, etas).rho;
            break;
          }
        }
      } catch (const Error&) {
        point.rho = std::numeric_limits<double>::infinity();
      }
      point.member = point.rho <= 1.0 + membership_slack;
      point.near_boundary = point.member && point.rho > 1.0 - boundary_band;
      sink(point);
    }
  }
}

inline const char* region_csv_header(RegionKind kind) {
  return kind == RegionKind::Real ? "eta_x,eta_y,rho,member" : "re,im,rho,member";
}

// CSV emission at 12 significant digits, one row per grid point.
inline void write_region_csv(std::ostream& os, const AdiMethod& m, RegionKind kind,
                             const ScanWindow& window, int n_partitions) {
  os << region_csv_header(kind) << "\n";
  char buf[64];
  scan_region(m, kind, window, n_partitions, [&](const ScanPoint& p) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%d", p.x, p.y, p.rho, p.member ? 1 : 0);
    os << buf << "\n";
  });
}

} // namespace adiglm
