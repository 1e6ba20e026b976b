#pragma once

// The 2D/3D heat benchmark problems: second-order central differences on the
// unit square/cube with N_p interior points per direction (spacing
// 1/(N_p+1)), time-dependent Dirichlet data taken from the manufactured exact
// solution, and the forcing placed per partition convention. Every
// time-dependent term factors as e^t times a static field, so affine parts
// are precomputed once and scaled at evaluation time.

#include <array>
#include <cmath>
#include <string_view>

#include "adiglm/system.hpp"
#include "adiglm/tableau.hpp"

namespace adiglm {

struct HeatProblemConfig {
  enum class PartitionMode { PerDirection, PerDirectionPlusExplicitForcing };

  int dims = 2;
  int n_points = 8; // interior points per direction
  std::array<double, 2> t_span{0.0, 1.0};
  PartitionMode mode = PartitionMode::PerDirection;
};

inline double heat2d_exact(double x, double y, double t) {
  return std::exp(t) * ((1 - x) * x * (1 - y) * y + (x + 1.0 / 3) * (x + 1.0 / 3) +
                        (y + 1.0 / 4) * (y + 1.0 / 4));
}

inline double heat2d_forcing(double x, double y, double t) {
  return std::exp(t) * ((1 - x) * x * (1 - y) * y +
                        ((x + 1.0 / 3) * (x + 1.0 / 3) + (y + 1.0 / 4) * (y + 1.0 / 4) - 4) +
                        2 * (1 - x) * x + 2 * (1 - y) * y);
}

inline double heat3d_exact(double x, double y, double z, double t) {
  return std::exp(t) *
         ((1 - x) * x * (1 - y) * y * (1 - z) * z + (x + 1.0 / 3) * (x + 1.0 / 3) +
          (y + 1.0 / 4) * (y + 1.0 / 4) + (z + 1.0 / 2) * (z + 1.0 / 2));
}

inline double heat3d_forcing(double x, double y, double z, double t) {
  return std::exp(t) *
         ((1 - x) * x * (1 - y) * y * (1 - z) * z + 2 * (1 - x) * x * (1 - y) * y +
          2 * (1 - x) * x * (1 - z) * z + 2 * (1 - y) * y * (1 - z) * z - 6 +
          (x + 1.0 / 3) * (x + 1.0 / 3) + (y + 1.0 / 4) * (y + 1.0 / 4) +
          (z + 1.0 / 2) * (z + 1.0 / 2));
}

namespace detail {

inline void validate_heat_config(const HeatProblemConfig& cfg, int dims) {
  if (cfg.dims != dims) detail::fail("heat builder: config has dims = ", cfg.dims, ", expected ", dims);
  if (cfg.n_points < 3) detail::fail("heat builder: need at least 3 interior points per direction");
}

// affine(t, out) += e^t * field
inline AffineFn<double> exponential_affine(std::vector<double> field) {
  return [field = std::move(field)](double t, std::span<double> out) {
    const double scale = std::exp(t);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += scale * field[k];
  };
}

} // namespace detail

// Two partitions (x and y second differences with their boundary lifts; the
// source term rides on the y partition), or three partitions with the source
// split off to be carried explicitly through the whole integration.
inline PartitionedSystem<double> build_heat2d(const HeatProblemConfig& cfg) {
  detail::validate_heat_config(cfg, 2);
  const std::size_t n = std::size_t(cfg.n_points);
  const double dx = 1.0 / double(n + 1);
  const double inv_dx2 = 1.0 / (dx * dx);
  auto coord = [dx](std::size_t i) { return double(i + 1) * dx; };

  PartitionedSystem<double> sys;
  sys.grid = GridLayout{{n, n}};
  auto second_difference = Tridiagonal<double>::constant(n, inv_dx2, -2 * inv_dx2, inv_dx2);

  // static (t = 0) fields; every time dependence is a common e^t factor
  std::vector<double> lift_x(n * n, 0.0), lift_y(n * n, 0.0), source(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = i + n * j;
      const double x = coord(i), y = coord(j);
      if (i == 0) lift_x[k] += heat2d_exact(0.0, y, 0.0) * inv_dx2;
      if (i == n - 1) lift_x[k] += heat2d_exact(1.0, y, 0.0) * inv_dx2;
      if (j == 0) lift_y[k] += heat2d_exact(x, 0.0, 0.0) * inv_dx2;
      if (j == n - 1) lift_y[k] += heat2d_exact(x, 1.0, 0.0) * inv_dx2;
      source[k] = heat2d_forcing(x, y, 0.0);
    }

  typename PartitionedSystem<double>::Partition px, py;
  px.op = DirectionalOperator<double>{0, second_difference};
  px.affine = detail::exponential_affine(std::move(lift_x));
  py.op = DirectionalOperator<double>{1, second_difference};

  if (cfg.mode == HeatProblemConfig::PartitionMode::PerDirection) {
    std::vector<double> y_field = std::move(lift_y);
    for (std::size_t k = 0; k < y_field.size(); ++k) y_field[k] += source[k];
    py.affine = detail::exponential_affine(std::move(y_field));
    sys.partitions = {std::move(px), std::move(py)};
  } else {
    py.affine = detail::exponential_affine(std::move(lift_y));
    typename PartitionedSystem<double>::Partition pf;
    pf.affine = detail::exponential_affine(std::move(source));
    sys.partitions = {std::move(px), std::move(py), std::move(pf)};
  }

  sys.exact = [n, coord](double t, std::span<double> out) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) out[i + n * j] = heat2d_exact(coord(i), coord(j), t);
  };
  return sys;
}

// Three partitions, one per direction; the pure source term is attached to
// the z partition.
inline PartitionedSystem<double> build_heat3d(const HeatProblemConfig& cfg) {
  detail::validate_heat_config(cfg, 3);
  const std::size_t n = std::size_t(cfg.n_points);
  const double dx = 1.0 / double(n + 1);
  const double inv_dx2 = 1.0 / (dx * dx);
  auto coord = [dx](std::size_t i) { return double(i + 1) * dx; };

  PartitionedSystem<double> sys;
  sys.grid = GridLayout{{n, n, n}};
  auto second_difference = Tridiagonal<double>::constant(n, inv_dx2, -2 * inv_dx2, inv_dx2);

  std::vector<double> lift_x(n * n * n, 0.0), lift_y(n * n * n, 0.0), lift_z(n * n * n, 0.0);
  for (std::size_t kz = 0; kz < n; ++kz)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i + n * (j + n * kz);
        const double x = coord(i), y = coord(j), z = coord(kz);
        if (i == 0) lift_x[k] += heat3d_exact(0.0, y, z, 0.0) * inv_dx2;
        if (i == n - 1) lift_x[k] += heat3d_exact(1.0, y, z, 0.0) * inv_dx2;
        if (j == 0) lift_y[k] += heat3d_exact(x, 0.0, z, 0.0) * inv_dx2;
        if (j == n - 1) lift_y[k] += heat3d_exact(x, 1.0, z, 0.0) * inv_dx2;
        if (kz == 0) lift_z[k] += heat3d_exact(x, y, 0.0, 0.0) * inv_dx2;
        if (kz == n - 1) lift_z[k] += heat3d_exact(x, y, 1.0, 0.0) * inv_dx2;
        lift_z[k] += heat3d_forcing(x, y, z, 0.0);
      }

  sys.partitions.resize(3);
  sys.partitions[0].op = DirectionalOperator<double>{0, second_difference};
  sys.partitions[0].affine = detail::exponential_affine(std::move(lift_x));
  sys.partitions[1].op = DirectionalOperator<double>{1, second_difference};
  sys.partitions[1].affine = detail::exponential_affine(std::move(lift_y));
  sys.partitions[2].op = DirectionalOperator<double>{2, second_difference};
  sys.partitions[2].affine = detail::exponential_affine(std::move(lift_z));

  sys.exact = [n, coord](double t, std::span<double> out) {
    for (std::size_t kz = 0; kz < n; ++kz)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
          out[i + n * (j + n * kz)] = heat3d_exact(coord(i), coord(j), coord(kz), t);
  };
  return sys;
}

struct NamedProblem {
  PartitionedSystem<double> system;
  PartitionLayout layout;
};

// CLI problem registry: heat2d, heat3d, heat2d-3part.
inline NamedProblem build_named_problem(std::string_view name, int n_points) {
  HeatProblemConfig cfg;
  cfg.n_points = n_points;
  if (name == "heat2d") {
    cfg.dims = 2;
    return {build_heat2d(cfg), PartitionLayout{2, 2}};
  }
  if (name == "heat2d-3part") {
    cfg.dims = 2;
    cfg.mode = HeatProblemConfig::PartitionMode::PerDirectionPlusExplicitForcing;
    return {build_heat2d(cfg), PartitionLayout{3, 2}};
  }
  if (name == "heat3d") {
    cfg.dims = 3;
    return {build_heat3d(cfg), PartitionLayout{3, 3}};
  }
  detail::fail("unknown problem '", std::string(name),
               "' (choose heat2d, heat3d, or heat2d-3part)");
}

} // namespace adiglm
