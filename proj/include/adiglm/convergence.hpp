#pragma once

// Convergence studies: integrate a named problem over a ladder of step
// counts, tabulate relative l2 errors with pairwise observed orders, and fit
// the temporal order by least squares on the rows that sit above the
// roundoff saturation floor.

#include <istream>
#include <limits>
#include <ostream>

#include "adiglm/integrator.hpp"
#include "adiglm/methods.hpp"
#include "adiglm/problems.hpp"

namespace adiglm {

struct ConvergenceRow {
  long nsteps = 0;
  double error = 0;
  std::optional<double> observed_order; // vs. the previous row; empty on the first
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0;
};

// Rows at or below 100x unit roundoff of the (relative) solution scale are
// saturated and excluded from the fit.
inline constexpr double saturation_floor = 100 * std::numeric_limits<double>::epsilon();

// Least-squares slope of log(error) against log(1/nsteps) over unsaturated
// rows. Throws when fewer than two rows remain.
inline double estimate_order(std::span<const ConvergenceRow> rows) {
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (row.error <= saturation_floor) continue;
    xs.push_back(std::log(1.0 / double(row.nsteps)));
    ys.push_back(std::log(row.error));
  }
  if (xs.size() < 2)
    detail::fail("estimate_order: ", xs.size(), " rows above the saturation floor (need 2)");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

inline ConvergenceStudy run_convergence(std::string_view problem, int order, int n_points,
                                        std::span<const long> steps) {
  if (steps.size() < 3)
    detail::fail("run_convergence: need at least 3 step counts, got ", steps.size());
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i] <= steps[i - 1]) detail::fail("run_convergence: step counts must increase");
  AdiMethod method = method_for_order(order);
  NamedProblem named = build_named_problem(problem, n_points);
  ConvergenceStudy study;
  for (long nsteps : steps) {
    auto result = integrate(method, named.layout, named.system, 0.0, 1.0, nsteps);
    if (!result.rel_l2_error)
      detail::fail("run_convergence: problem '", std::string(problem), "' has no exact solution");
    ConvergenceRow row;
    row.nsteps = nsteps;
    row.error = *result.rel_l2_error;
    if (!study.rows.empty()) {
      const auto& prev = study.rows.back();
      row.observed_order =
          std::log(prev.error / row.error) / std::log(double(row.nsteps) / double(prev.nsteps));
    }
    study.rows.push_back(row);
  }
  study.fitted_order = estimate_order(study.rows);
  return study;
}

inline void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
  os << "nsteps,error,observed_order\n";
  char buf[96];
  for (const auto& row : rows) {
    if (row.observed_order) {
      std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g", row.nsteps, row.error,
                    *row.observed_order);
    } else {
      std::snprintf(buf, sizeof buf, "%ld,%.17g,", row.nsteps, row.error);
    }
    os << buf << "\n";
  }
}

inline std::vector<ConvergenceRow> read_convergence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "nsteps,error,observed_order")
    detail::fail("convergence CSV: bad header '", line, "'");
  std::vector<ConvergenceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ConvergenceRow row;
    const char* p = line.c_str();
    char* end = nullptr;
    row.nsteps = std::strtol(p, &end, 10);
    if (end == p || *end != ',') detail::fail("convergence CSV: bad row '", line, "'");
    p = end + 1;
    row.error = std::strtod(p, &end);
    if (end == p || *end != ',') detail::fail("convergence CSV: bad row '", line, "'");
    p = end + 1;
    if (*p != '\0') row.observed_order = std::strtod(p, &end);
    rows.push_back(row);
  }
  return rows;
}

} // namespace adiglm
