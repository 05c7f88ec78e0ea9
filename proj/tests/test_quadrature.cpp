#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "hexfem/quadrature.hpp"

using namespace hexfem;

namespace {

double moment(const QuadratureRule& rule, int k) {
  double s = 0;
  for (int i = 0; i < rule.q; ++i)
    s += rule.weights[std::size_t(i)] * std::pow(rule.points[std::size_t(i)], k);
  return s;
}

double exact_moment(int k) { return k % 2 == 0 ? 2.0 / (k + 1) : 0.0; }

// Independent oracle: a rule claiming degree-d exactness must match the
// analytic monomial integrals for all k <= d.
double max_moment_error(const QuadratureRule& rule, int max_degree) {
  double worst = 0;
  for (int k = 0; k <= max_degree; ++k)
    worst = std::max(worst, std::abs(moment(rule, k) - exact_moment(k)));
  return worst;
}

}  // namespace

TEST_CASE("single-point Gauss rule is the midpoint rule") {
  const auto rule = make_quadrature(QuadratureKind::GaussLegendre, 1);
  CHECK(rule.points[0] == 0.0);
  CHECK(rule.weights[0] == 2.0);
}

TEST_CASE("two-point Gauss rule matches the moment equations") {
  const auto rule = make_quadrature(QuadratureKind::GaussLegendre, 2);
  // the unique symmetric 2-point rule exact through k=3 has x = 1/sqrt(3)
  CHECK(max_moment_error(rule, 3) <= 1e-15);
  CHECK(rule.points[0] == doctest::Approx(-0.5773502691896258).epsilon(1e-15));
  CHECK(rule.points[1] == doctest::Approx(0.5773502691896258).epsilon(1e-15));
  CHECK(rule.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rule.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("three-point Lobatto rule") {
  const auto rule = make_quadrature(QuadratureKind::GaussLobattoLegendre, 3);
  CHECK(max_moment_error(rule, 3) <= 1e-15);
  CHECK(rule.points[0] == -1.0);
  CHECK(rule.points[1] == 0.0);
  CHECK(rule.points[2] == 1.0);
  CHECK(rule.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(rule.weights[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(rule.weights[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("four-point Lobatto rule") {
  const auto rule = make_quadrature(QuadratureKind::GaussLobattoLegendre, 4);
  CHECK(max_moment_error(rule, 5) <= 1e-15);
  CHECK(rule.points[0] == -1.0);
  CHECK(rule.points[1] == doctest::Approx(-0.4472135954999579).epsilon(1e-15));
  CHECK(rule.points[2] == doctest::Approx(0.4472135954999579).epsilon(1e-15));
  CHECK(rule.points[3] == 1.0);
  CHECK(rule.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(rule.weights[1] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("rule invariants for q = 1..10") {
  for (int q = 1; q <= 10; ++q) {
    for (const auto kind :
         {QuadratureKind::GaussLegendre, QuadratureKind::GaussLobattoLegendre}) {
      if (kind == QuadratureKind::GaussLobattoLegendre && q < 2) continue;
      CAPTURE(q);
      const auto rule = make_quadrature(kind, q);
      double wsum = 0;
      for (int i = 0; i < q; ++i) {
        const double w = rule.weights[std::size_t(i)];
        CHECK(w > 0.0);
        wsum += w;
        CHECK(std::abs(rule.points[std::size_t(i)] +
                       rule.points[std::size_t(q - 1 - i)]) <= 1e-14);
        if (i > 0) CHECK(rule.points[std::size_t(i)] > rule.points[std::size_t(i - 1)]);
      }
      CHECK(std::abs(wsum - 2.0) <= 1e-14);
      if (kind == QuadratureKind::GaussLobattoLegendre) {
        CHECK(rule.points.front() == -1.0);
        CHECK(rule.points.back() == 1.0);
        CHECK(max_moment_error(rule, 2 * q - 3) <= 1e-13);
      } else {
        CHECK(max_moment_error(rule, 2 * q - 1) <= 1e-13);
      }
    }
  }
}

TEST_CASE("invalid point counts are rejected") {
  CHECK_THROWS_AS(make_quadrature(QuadratureKind::GaussLegendre, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_quadrature(QuadratureKind::GaussLobattoLegendre, 1),
                  std::invalid_argument);
}
