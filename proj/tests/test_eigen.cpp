#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "adiglm/core.hpp"
#include "adiglm/eigen.hpp"

using namespace adiglm;

namespace {

// Multiset comparison: greedily match each expected eigenvalue to the nearest
// computed one.
double multiset_distance(std::vector<Complex> got, const std::vector<Complex>& expected) {
  double worst = 0;
  for (const Complex& e : expected) {
    auto it = std::min_element(got.begin(), got.end(), [&](const Complex& a, const Complex& b) {
      return magnitude(a - e) < magnitude(b - e);
    });
    worst = std::max(worst, double(magnitude(*it - e)));
    got.erase(it);
  }
  return worst;
}

} // namespace

TEST_CASE("diagonal matrix") {
  ComplexMatrix m(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = Complex(0, 2);
  auto eigs = eigenvalues(m);
  REQUIRE(multiset_distance(eigs, {Complex(1, 0), Complex(0, 2)}) < 1e-14);
  REQUIRE_THAT(spectral_radius(m), Catch::Matchers::WithinAbs(2.0, 1e-14));
}

TEST_CASE("rank-one row-stochastic matrix has spectrum {1, 0, ...}") {
  // V = 1 v^T with v^T 1 = 1
  std::vector<double> v{0.3, 0.9, -0.2};
  RealMatrix m(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = v[j];
  auto eigs = eigenvalues(to_complex(m));
  REQUIRE(multiset_distance(eigs, {Complex(1, 0), Complex(0, 0), Complex(0, 0)}) < 1e-12);
  REQUIRE_THAT(spectral_radius(m), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("companion matrix of z^2 - z - 1") {
  ComplexMatrix m(2, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  auto eigs = eigenvalues(m);
  REQUIRE(multiset_distance(eigs, {Complex(phi, 0), Complex(1.0 - phi, 0)}) < 1e-14);
  REQUIRE_THAT(spectral_radius(m), Catch::Matchers::WithinAbs(phi, 1e-14));
}

TEST_CASE("similarity invariance on random matrices") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t n = 2 + rng() % 11;
    ComplexMatrix m(n, n), s(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        m(i, j) = Complex(dist(rng), dist(rng));
        s(i, j) = Complex(dist(rng), dist(rng));
      }
    for (std::size_t i = 0; i < n; ++i) s(i, i) += 3.0; // conditioning cap
    ComplexMatrix sim = lu_solve(s, m * s);
    auto e1 = eigenvalues(m);
    auto e2 = eigenvalues(sim);
    REQUIRE(multiset_distance(e2, e1) < 1e-8);
  }
}

TEST_CASE("defective Jordan block stays within the sqrt-eps spread") {
  // [[1,1],[0,1]] perturbed by eps at (1,0): true eigenvalues 1 +- sqrt(eps).
  ComplexMatrix m(2, 2);
  m(0, 0) = m(1, 1) = m(0, 1) = 1.0;
  m(1, 0) = 1e-12;
  auto eigs = eigenvalues(m);
  REQUIRE(multiset_distance(eigs, {Complex(1 + 1e-6, 0), Complex(1 - 1e-6, 0)}) < 1e-9);
}

TEST_CASE("dimension cap and shape errors") {
  REQUIRE_THROWS_AS(eigenvalues(ComplexMatrix(65, 65)), Error);
  REQUIRE_THROWS_AS(eigenvalues(ComplexMatrix(2, 3)), Error);
  REQUIRE(eigenvalues(ComplexMatrix(0, 0)).empty());
}
