#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "adiglm/methods.hpp"
#include "adiglm/stability.hpp"

using namespace adiglm;

TEST_CASE("adi-dimsim2 coefficients match the closed forms") {
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  const double s2 = std::sqrt(2.0);
  REQUIRE(m.gamma == (2.0 - s2) / 2.0);
  REQUIRE(m.c() == std::vector<double>{0.0, 1.0});
  REQUIRE(m.V()(0, 0) == (3.0 - s2) / 2.0);
  REQUIRE(m.V()(0, 1) == (s2 - 1.0) / 2.0);
  REQUIRE(m.explicit_base.A(1, 0) == 1.5);
}

TEST_CASE("adi-dimsim3 coefficients") {
  AdiMethod m = get_method(MethodId::AdiDimsim3);
  REQUIRE(m.gamma == 129981159316.0 / 298213221025.0);
  REQUIRE_THAT(m.gamma, Catch::Matchers::WithinAbs(0.4358665215, 1e-10));
  REQUIRE(m.c() == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("adi-dimsim4 coefficients") {
  AdiMethod m = get_method(MethodId::AdiDimsim4);
  REQUIRE(m.gamma == 0.4);
  REQUIRE(m.c() == std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
  REQUIRE(m.V()(0, 0) == 3.0 / 40.0);
}

TEST_CASE("every catalog entry passes the order-condition certification") {
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    const double tol = order == 4 ? 1e-10 : 1e-12;
    for (const BaseTableau* base : {&m.implicit_base, &m.explicit_base}) {
      REQUIRE(check_order_conditions(*base).max_residual() <= tol);
      auto [pre1, pre2] = preconsistency_residual(*base);
      REQUIRE(pre1 <= 1e-12);
      REQUIRE(pre2 <= 1e-12);
    }
  }
}

TEST_CASE("solve_w reconstructs the printed W for every catalog entry") {
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    const double tol = order == 4 ? 1e-10 : 1e-12;
    for (const BaseTableau* base : {&m.implicit_base, &m.explicit_base}) {
      auto r = solve_w(base->A, base->U, base->B, base->V, base->c, base->p);
      REQUIRE(max_abs(r.W - base->W) <= tol);
    }
  }
}

TEST_CASE("remark tableau entries are exactly as printed") {
  auto t = get_remark_tableau();
  REQUIRE(t.A(1, 2) == 0.5);       // row 2, column 3 in 1-based indexing
  REQUIRE(t.B(0, 1) == -5.0 / 32); // row 1, column 2
  REQUIRE(t.A(0, 0) == 5.0 / 8);
  REQUIRE(t.B(0, 0) == 0.5);
  REQUIRE(t.V(0, 0) == -5.0 / 16);
  REQUIRE(t.V(0, 1) == 21.0 / 16);
  for (std::size_t i = 0; i < 4; ++i) {
    double row_sum = 0;
    for (std::size_t j = 0; j < 4; ++j) row_sum += t.V(i, j);
    REQUIRE(row_sum == 1.0);
  }
}

TEST_CASE("method_for_order covers exactly the CLI orders") {
  REQUIRE(method_for_order(2).name == "adi-dimsim2");
  REQUIRE(method_for_order(3).name == "adi-dimsim3");
  REQUIRE(method_for_order(4).name == "adi-dimsim4");
  REQUIRE_THROWS_AS(method_for_order(5), Error);
  REQUIRE_THROWS_AS(get_method(MethodId::RemarkDimsim2), Error);
}

TEST_CASE("implicit bases of orders 2 and 3 are stable on the stiff real axis") {
  for (int order : {2, 3}) {
    AdiMethod m = method_for_order(order);
    for (int i = 0; i < 200; ++i) {
      double exponent = -2.0 + 10.0 * double(i) / 199.0;
      Complex eta(-std::pow(10.0, exponent), 0.0);
      double rho = spectral_radius(base_stability_matrix(m.implicit_base, eta));
      REQUIRE(rho <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("order-4 implicit base is stable along the 83-degree rays") {
  AdiMethod m = method_for_order(4);
  const double angle = 83.0 * std::acos(-1.0) / 180.0;
  for (double sign : {1.0, -1.0}) {
    for (int i = 0; i < 200; ++i) {
      double exponent = -2.0 + 10.0 * double(i) / 199.0;
      double r = std::pow(10.0, exponent);
      Complex eta = r * Complex(-std::cos(angle), sign * std::sin(angle));
      double rho = spectral_radius(base_stability_matrix(m.implicit_base, eta));
      REQUIRE(rho <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("stiff decay of the order-2 implicit base") {
  AdiMethod m = get_method(MethodId::AdiDimsim2);
  double rho = spectral_radius(base_stability_matrix(m.implicit_base, Complex(-1e6, 0)));
  REQUIRE(rho <= 1e-3);
}

TEST_CASE("explicit bases are stable on an interval containing eta = -0.1") {
  for (int order : {2, 3, 4}) {
    AdiMethod m = method_for_order(order);
    for (double eta : {-0.05, -0.1, -0.2}) {
      double rho = spectral_radius(base_stability_matrix(m.explicit_base, Complex(eta, 0)));
      REQUIRE(rho <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("extended-precision coefficients agree with the double catalog") {
  for (int order : {2, 3, 4}) {
    auto fine = method_coefficients<long double>(order);
    auto coarse = method_coefficients<double>(order);
    REQUIRE(std::abs(double(fine.gamma) - coarse.gamma) <= 1e-16);
    for (std::size_t i = 0; i < coarse.c.size(); ++i)
      for (std::size_t j = 0; j < coarse.c.size(); ++j)
        REQUIRE(std::abs(double(fine.BI(i, j)) - coarse.BI(i, j)) <=
                2e-16 * (1.0 + std::abs(coarse.BI(i, j))));
  }
}
