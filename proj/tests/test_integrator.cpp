#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adiglm/integrator.hpp"
#include "adiglm/methods.hpp"
#include "adiglm/stability.hpp"

using namespace adiglm;

namespace {

// Flattens the (possibly elided) external stages of the scalar test problem
// into the full N*r vector the stability matrix acts on, duplicating the
// aliased trailing families.
std::vector<Complex> to_full_vector(const ExternalStages<Complex>& xi,
                                    const PartitionLayout& layout, std::size_t r) {
  std::vector<Complex> full(std::size_t(layout.n_partitions) * r);
  for (int fam = 0; fam < layout.n_partitions; ++fam) {
    int source = layout.family_of(fam);
    for (std::size_t i = 0; i < r; ++i) full[std::size_t(fam) * r + i] = xi.xi[source][i][0];
  }
  return full;
}

ExternalStages<Complex> random_external_stages(std::mt19937& rng, int families, std::size_t r) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ExternalStages<Complex> xi;
  xi.xi.assign(std::size_t(families), std::vector<std::vector<Complex>>(r));
  for (auto& fam : xi.xi)
    for (auto& stage : fam) stage = {Complex(dist(rng), dist(rng))};
  return xi;
}

// Tiny two-direction diffusion system on an n x n interior grid with
// homogeneous Dirichlet walls; partition 2 optionally carries a forcing term.
PartitionedSystem<double> mini_heat(std::size_t n, bool forced) {
  PartitionedSystem<double> sys;
  sys.grid = GridLayout{{n, n}};
  const double dx2 = 1.0 / ((n + 1.0) * (n + 1.0));
  auto op = Tridiagonal<double>::constant(n, 1.0 / dx2, -2.0 / dx2, 1.0 / dx2);
  sys.partitions.resize(2);
  sys.partitions[0].op = DirectionalOperator<double>{0, op};
  sys.partitions[1].op = DirectionalOperator<double>{1, op};
  if (forced)
    sys.partitions[1].affine = [](double t, std::span<double> out) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += std::exp(-t) * double(k % 7);
    };
  sys.initial = [](double, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = 1.0 + double(k % 3);
  };
  return sys;
}

} // namespace

TEST_CASE("one step on the scalar test problem reproduces the stability matrix") {
  std::mt19937 rng(20240901);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double h = 0.5;
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    const std::size_t r = m.external_stages();
    for (PartitionLayout layout :
         {PartitionLayout{2, 2}, PartitionLayout{3, 3}, PartitionLayout{3, 2}}) {
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<Complex> eta(std::size_t(layout.n_partitions));
        std::vector<Complex> lambdas(eta.size());
        for (std::size_t i = 0; i < eta.size(); ++i) {
          eta[i] = Complex(-2.5 * std::abs(dist(rng)), 2.0 * dist(rng));
          lambdas[i] = eta[i] / h;
        }
        auto sys = scalar_test_system<Complex>(lambdas, Complex(1.0, 0.0));
        Stepper<Complex> stepper(m, layout, sys, h);
        auto xi = random_external_stages(rng, layout.stage_row_count(), r);
        auto report = stepper.step(0.0, xi);

        auto full = to_full_vector(xi, layout, r);
        auto eval = adi_stability_matrix(m, layout, eta);
        auto expected = eval.matrix * std::span<const Complex>(full);
        for (int fam = 0; fam < layout.stage_row_count(); ++fam)
          for (std::size_t i = 0; i < r; ++i) {
            Complex got = report.next.xi[std::size_t(fam)][i][0];
            REQUIRE(magnitude(got - expected[std::size_t(fam) * r + i]) <= 1e-12);
          }
      }
    }
  }
}

TEST_CASE("documented three-way example: eta = (-1, -2, -0.5) for adi-dimsim2") {
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  const double h = 1.0;
  std::vector<Complex> eta{Complex(-1, 0), Complex(-2, 0), Complex(-0.5, 0)};
  auto sys = scalar_test_system<Complex>(eta, Complex(1.0, 0.0));
  PartitionLayout layout{3, 3};
  Stepper<Complex> stepper(m, layout, sys, h);
  std::mt19937 rng(7);
  auto xi = random_external_stages(rng, 3, 2);
  auto report = stepper.step(0.0, xi);
  auto full = to_full_vector(xi, layout, 2);
  auto expected = adi_stability_matrix(m, layout, eta).matrix * std::span<const Complex>(full);
  for (int fam = 0; fam < 3; ++fam)
    for (std::size_t i = 0; i < 2; ++i)
      REQUIRE(magnitude(report.next.xi[fam][i][0] - expected[fam * 2 + i]) <= 1e-12);
}

TEST_CASE("a zero-size step reduces to Y = xi and the V update") {
  AdiMethod m = get_method(MethodId::AdiDimsim3);
  auto sys = scalar_test_system<Complex>({Complex(-1, 0), Complex(-2, 1)}, Complex(1, 0));
  PartitionLayout layout{2, 2};
  Stepper<Complex> stepper(m, layout, sys, 0.0);
  std::mt19937 rng(11);
  auto xi = random_external_stages(rng, 2, 3);
  auto report = stepper.step(0.0, xi);
  for (int fam = 0; fam < 2; ++fam) {
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(magnitude(report.stages[fam][i][0] - xi.xi[fam][i][0]) == 0.0);
      Complex expected{};
      for (std::size_t j = 0; j < 3; ++j) expected += m.V()(i, j) * xi.xi[fam][j][0];
      REQUIRE(magnitude(report.next.xi[fam][i][0] - expected) <= 1e-16);
    }
  }
}

TEST_CASE("hand-written two-stage recursion matches the stepper") {
  // N = 2, s = 2 scalar test, written out stage by stage.
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  const double h = 0.4;
  const Complex l1(-1.5, 0.25), l2(-0.75, -0.5);
  auto sys = scalar_test_system<Complex>({l1, l2}, Complex(1, 0));
  PartitionLayout layout{2, 2};
  std::mt19937 rng(23);
  auto xi = random_external_stages(rng, 2, 2);
  auto report = Stepper<Complex>(m, layout, sys, h).step(0.0, xi);

  const auto& ai = m.implicit_base.A;
  const auto& ae = m.explicit_base.A;
  const auto& bi = m.implicit_base.B;
  const auto& be = m.explicit_base.B;
  const double g = m.gamma;
  auto x = [&](int fam, int i) { return xi.xi[fam][i][0]; };

  Complex y11 = x(0, 0) / (1.0 - h * g * l1);
  Complex y12 = (x(1, 0) + h * g * l1 * y11) / (1.0 - h * g * l2);
  Complex f11 = l1 * y11, f12 = l2 * y12;
  Complex y21 = (x(0, 1) + h * (ai(1, 0) * f11 + ae(1, 0) * f12)) / (1.0 - h * g * l1);
  Complex f21 = l1 * y21;
  Complex y22 = (x(1, 1) + h * (ai(1, 0) * f11 + ai(1, 0) * f12 + g * f21)) / (1.0 - h * g * l2);
  Complex f22 = l2 * y22;

  REQUIRE(magnitude(report.stages[0][0][0] - y11) <= 1e-14);
  REQUIRE(magnitude(report.stages[1][0][0] - y12) <= 1e-14);
  REQUIRE(magnitude(report.stages[0][1][0] - y21) <= 1e-14);
  REQUIRE(magnitude(report.stages[1][1][0] - y22) <= 1e-14);

  // finish = Y_s of the last family
  REQUIRE(magnitude(finish(m, report)[0] - report.stages[1][1][0]) == 0.0);

  for (std::size_t i = 0; i < 2; ++i) {
    Complex upd1 = m.V()(i, 0) * x(0, 0) + m.V()(i, 1) * x(0, 1) +
                   h * (bi(i, 0) * f11 + bi(i, 1) * f21 + be(i, 0) * f12 + be(i, 1) * f22);
    Complex upd2 = m.V()(i, 0) * x(1, 0) + m.V()(i, 1) * x(1, 1) +
                   h * (bi(i, 0) * f11 + bi(i, 1) * f21 + bi(i, 0) * f12 + bi(i, 1) * f22);
    REQUIRE(magnitude(report.next.xi[0][i][0] - upd1) <= 1e-14);
    REQUIRE(magnitude(report.next.xi[1][i][0] - upd2) <= 1e-14);
  }
}

TEST_CASE("solve and rhs evaluation counts per step") {
  auto sys = mini_heat(4, true);
  PartitionLayout layout{2, 2};
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    Stepper<double> stepper(m, layout, sys, 0.01);
    ExternalStages<double> xi;
    xi.xi.assign(2, std::vector<std::vector<double>>(m.external_stages(),
                                                     std::vector<double>(sys.dimension(), 1.0)));
    auto report = stepper.step(0.0, xi);
    REQUIRE(report.linear_solves == long(layout.stage_row_count()) * m.order);
    REQUIRE(report.rhs_evaluations == long(layout.n_partitions) * m.order);
  }
}

TEST_CASE("refactorization happens only when the step size changes") {
  auto sys = mini_heat(4, false);
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  Stepper<double> stepper(m, PartitionLayout{2, 2}, sys, 0.01);
  REQUIRE(stepper.factorizations() == 2);
  stepper.set_step(0.01);
  REQUIRE(stepper.factorizations() == 2);
  stepper.set_step(0.005);
  REQUIRE(stepper.factorizations() == 4);
}

TEST_CASE("rhs evaluation counter doubles with the step count") {
  auto sys = mini_heat(4, true);
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  auto r1 = integrate(m, PartitionLayout{2, 2}, sys, 0.0, 0.5, 40);
  auto r2 = integrate(m, PartitionLayout{2, 2}, sys, 0.0, 0.5, 80);
  REQUIRE(r2.counters.rhs_evaluations == 2 * r1.counters.rhs_evaluations);
  REQUIRE(r2.counters.linear_solves == 2 * r1.counters.linear_solves);
  REQUIRE(r1.counters.factorizations == 2);
  REQUIRE_FALSE(r1.rel_l2_error.has_value());
}

TEST_CASE("starting procedure matches the analytic derivative expansion at rate p+1") {
  // On the scalar linear test, (f^sigma)^(k-1) along the solution is
  // lambda_sigma Lambda^{k-1} y(t0), so the target external stages are
  // available in closed form.
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    for (PartitionLayout layout :
         {PartitionLayout{2, 2}, PartitionLayout{3, 3}, PartitionLayout{3, 2}}) {
      std::vector<double> lambdas{-0.7, -0.4, -0.9};
      lambdas.resize(std::size_t(layout.n_partitions));
      const double y0 = 1.3;
      auto sys = scalar_test_system<double>(lambdas, y0);
      double total = 0;
      for (double l : lambdas) total += l;

      auto truth = [&](int fam, std::size_t i, double h) {
        double acc = m.implicit_base.W(i, 0) * y0;
        for (int sigma = 0; sigma < layout.n_partitions; ++sigma) {
          const RealMatrix& w =
              layout.implicit_block(fam, sigma) ? m.implicit_base.W : m.explicit_base.W;
          double hk = 1.0;
          for (int k = 1; k <= order; ++k) {
            hk *= h;
            acc += w(i, k) * hk * lambdas[std::size_t(sigma)] * std::pow(total, k - 1) * y0;
          }
        }
        return acc;
      };
      auto start_error = [&](double h) {
        auto fd = start_external_stages(m, layout, sys, 0.0, h);
        double worst = 0;
        for (int fam = 0; fam < layout.stage_row_count(); ++fam)
          for (std::size_t i = 0; i < m.external_stages(); ++i)
            worst = std::max(worst, std::abs(fd.xi[fam][i][0] - truth(fam, i, h)));
        return worst;
      };

      double e0 = start_error(0.2), e1 = start_error(0.1), e2 = start_error(0.05);
      double rate1 = std::log2(e0 / e1);
      double rate2 = std::log2(e1 / e2);
      REQUIRE_THAT(rate2, Catch::Matchers::WithinAbs(order + 1.0, 0.3));
      REQUIRE_THAT(rate1, Catch::Matchers::WithinAbs(order + 1.0, 0.6));
    }
  }
}

TEST_CASE("external stages collapse to the solution value as h -> 0") {
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  auto sys = scalar_test_system<double>({-1.0, -2.0}, 2.5);
  auto xi = start_external_stages(m, PartitionLayout{2, 2}, sys, 0.0, 1e-8);
  for (std::size_t fam = 0; fam < 2; ++fam)
    for (std::size_t i = 0; i < 2; ++i)
      REQUIRE_THAT(xi.xi[fam][i][0], Catch::Matchers::WithinAbs(2.5, 1e-6));
}

TEST_CASE("rk4 fallback reference nodes are accurate to 1e-12") {
  auto sys = scalar_test_system<double>({-0.8, -0.3}, 1.0);
  sys.exact = nullptr;
  sys.initial = [](double, std::span<double> out) { out[0] = 1.0; };
  const double h = 0.05;
  auto nodes = detail::rk4_reference_nodes(sys, 0.0, h, 4, nullptr);
  for (int k = 0; k < 4; ++k) {
    double truth = std::exp(-1.1 * k * h);
    REQUIRE_THAT(nodes[k][0], Catch::Matchers::WithinAbs(truth, 1e-12 * truth));
  }
}

TEST_CASE("missing reference trajectory is an error") {
  auto sys = scalar_test_system<double>({-1.0, -2.0}, 1.0);
  sys.exact = nullptr;
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  REQUIRE_THROWS_AS(start_external_stages(m, PartitionLayout{2, 2}, sys, 0.0, 0.1), Error);
}

TEST_CASE("explicit reference nodes are accepted and validated") {
  auto sys = scalar_test_system<double>({-1.0, -2.0}, 1.0);
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  std::vector<std::vector<double>> nodes{{1.0}, {std::exp(-3.0 * 0.1)}};
  REQUIRE_NOTHROW(start_external_stages(m, PartitionLayout{2, 2}, sys, 0.0, 0.1, &nodes));
  std::vector<std::vector<double>> bad{{1.0}};
  REQUIRE_THROWS_AS(start_external_stages(m, PartitionLayout{2, 2}, sys, 0.0, 0.1, &bad), Error);
}

TEST_CASE("internal stages approximate the solution at stage order") {
  // Prothero-Robinson-like problem: y' = (l1 + l2) y + g(t) with manufactured
  // exact solution phi; the forcing rides on partition 2.
  auto phi = [](double t) { return std::sin(2 * t) + 2.0; };
  auto dphi = [](double t) { return 2 * std::cos(2 * t); };
  const double l1 = -4.0, l2 = -2.0;
  PartitionedSystem<double> sys;
  sys.grid = GridLayout{{1}};
  sys.partitions.resize(2);
  sys.partitions[0].op = DirectionalOperator<double>{0, Tridiagonal<double>({}, {l1}, {})};
  sys.partitions[1].op = DirectionalOperator<double>{0, Tridiagonal<double>({}, {l2}, {})};
  sys.partitions[1].affine = [&](double t, std::span<double> out) {
    out[0] += dphi(t) - (l1 + l2) * phi(t);
  };
  sys.exact = [&](double t, std::span<double> out) { out[0] = phi(t); };

  for (int order : {2, 3}) {
    AdiMethod m = method_for_order(order);
    PartitionLayout layout{2, 2};
    auto stage_error = [&](double h) {
      Stepper<double> stepper(m, layout, sys, h);
      const double t0 = 0.3;
      auto xi = start_external_stages(m, layout, sys, t0, h);
      auto report = stepper.step(t0, xi);
      double worst = 0;
      for (int fam = 0; fam < 2; ++fam)
        for (std::size_t i = 0; i < std::size_t(order); ++i)
          worst = std::max(worst, std::abs(report.stages[fam][i][0] - phi(t0 + m.c()[i] * h)));
      return worst;
    };
    double e1 = stage_error(0.05), e2 = stage_error(0.025);
    double rate = std::log2(e1 / e2);
    REQUIRE_THAT(rate, Catch::Matchers::WithinAbs(order + 1.0, 0.5));
  }
}

TEST_CASE("integrate runs the full pipeline on the scalar test") {
  auto sys = scalar_test_system<double>({-1.5, -0.5}, 1.0);
  AdiMethod m = get_method(MethodId::AdiDimsim3);
  auto result = integrate(m, PartitionLayout{2, 2}, sys, 0.0, 1.0, 50);
  REQUIRE(result.rel_l2_error.has_value());
  REQUIRE(*result.rel_l2_error < 1e-4); // order 3 at h = 0.02 with an O(1) constant
  REQUIRE_THAT(result.state[0], Catch::Matchers::WithinAbs(std::exp(-2.0), 1e-4));
  REQUIRE_THROWS_AS(integrate(m, PartitionLayout{2, 2}, sys, 0.0, 1.0, 2), Error);
}

TEST_CASE("integrate converges at the method order on the scalar test") {
  auto sys = scalar_test_system<double>({-1.0, -0.6}, 1.0);
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    auto error_at = [&](long n) {
      return *integrate(m, PartitionLayout{2, 2}, sys, 0.0, 1.0, n).rel_l2_error;
    };
    double e0 = error_at(160), e1 = error_at(320);
    double rate = std::log2(e0 / e1);
    REQUIRE_THAT(rate, Catch::Matchers::WithinAbs(double(order), 0.35));
  }
}
