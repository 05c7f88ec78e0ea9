#include "hexfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hexfem {

namespace {

// Legendre polynomial P_n and its derivative at x.
struct LegendreEval {
  double value;
  double derivative;
};

LegendreEval legendre_eval(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0;   // P_0
  double p = x;       // P_1
  for (int k = 1; k < n; ++k) {
    const double pk1 = ((2 * k + 1) * x * p - k * pm1) / (k + 1);
    pm1 = p;
    p = pk1;
  }
  // P'_n = n (x P_n - P_{n-1}) / (x^2 - 1), valid away from +-1
  const double denom = x * x - 1.0;
  double dp;
  if (std::abs(denom) > 1e-10) {
    dp = n * (x * p - pm1) / denom;
  } else {
    dp = 0.5 * n * (n + 1) * (x >= 0 ? 1.0 : (n % 2 ? 1.0 : -1.0));
  }
  return {p, dp};
}

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

double newton_gauss_root(int q, double x0) {
  double x = x0;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const auto [p, dp] = legendre_eval(q, x);
    const double dx = p / dp;
    x -= dx;
    if (std::abs(dx) <= kNewtonTol) break;
  }
  return x;
}

// Interior Lobatto points are the roots of P'_{n}; Newton with
// P''_n = (2 x P'_n - n(n+1) P_n) / (1 - x^2).
double newton_lobatto_root(int n, double x0) {
  double x = x0;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const auto [p, dp] = legendre_eval(n, x);
    const double d2p = (2.0 * x * dp - double(n) * (n + 1) * p) / (1.0 - x * x);
    const double dx = dp / d2p;
    x -= dx;
    if (std::abs(dx) <= kNewtonTol) break;
  }
  return x;
}

}  // namespace

QuadratureRule make_quadrature(QuadratureKind kind, int q) {
  QuadratureRule rule;
  rule.kind = kind;
  rule.q = q;
  rule.points.assign(std::size_t(std::max(q, 0)), 0.0);
  rule.weights.assign(std::size_t(std::max(q, 0)), 0.0);

  if (kind == QuadratureKind::GaussLegendre) {
    if (q < 1)
      throw std::invalid_argument("make_quadrature: Gauss-Legendre needs q >= 1, got " +
                                  std::to_string(q));
    // Lower half, then mirror so symmetry is exact.
    for (int i = 0; i < q / 2; ++i) {
      const double x0 = -std::cos(M_PI * (i + 0.75) / (q + 0.5));
      const double x = newton_gauss_root(q, x0);
      const auto [p, dp] = legendre_eval(q, x);
      (void)p;
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      rule.points[std::size_t(i)] = x;
      rule.weights[std::size_t(i)] = w;
      rule.points[std::size_t(q - 1 - i)] = -x;
      rule.weights[std::size_t(q - 1 - i)] = w;
    }
    if (q % 2 == 1) {
      const auto [p, dp] = legendre_eval(q, 0.0);
      (void)p;
      rule.points[std::size_t(q / 2)] = 0.0;
      rule.weights[std::size_t(q / 2)] = 2.0 / (dp * dp);
    }
    return rule;
  }

  if (q < 2)
    throw std::invalid_argument(
        "make_quadrature: Gauss-Lobatto-Legendre needs q >= 2, got " + std::to_string(q));
  const int n = q - 1;
  const double end_weight = 2.0 / (double(n) * (n + 1));
  rule.points[0] = -1.0;
  rule.points[std::size_t(q - 1)] = 1.0;
  rule.weights[0] = end_weight;
  rule.weights[std::size_t(q - 1)] = end_weight;
  for (int i = 1; i < q / 2; ++i) {
    const double x0 = -std::cos(M_PI * i / n);
    const double x = newton_lobatto_root(n, x0);
    const auto [p, dp] = legendre_eval(n, x);
    (void)dp;
    const double w = 2.0 / (double(n) * (n + 1) * p * p);
    rule.points[std::size_t(i)] = x;
    rule.weights[std::size_t(i)] = w;
    rule.points[std::size_t(q - 1 - i)] = -x;
    rule.weights[std::size_t(q - 1 - i)] = w;
  }
  if (q % 2 == 1) {
    const auto [p, dp] = legendre_eval(n, 0.0);
    (void)dp;
    rule.points[std::size_t(q / 2)] = 0.0;
    rule.weights[std::size_t(q / 2)] = 2.0 / (double(n) * (n + 1) * p * p);
  }
  return rule;
}

}  // namespace hexfem
