#pragma once

#include <vector>

namespace hexfem {

enum class QuadratureKind { GaussLegendre, GaussLobattoLegendre };

/// 1D quadrature rule on [-1, 1]. Points are strictly increasing and
/// symmetric about 0; weights are positive and sum to 2.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::GaussLegendre;
  int q = 0;
  std::vector<double> points;
  std::vector<double> weights;
};

/// Builds a rule by Newton iteration on the Legendre polynomial (interior
/// Lobatto points use its derivative), tolerance 1e-15, at most 100 steps,
/// Chebyshev initial guesses. Gauss-Legendre needs q >= 1, Lobatto q >= 2.
/// The lower half is computed and mirrored, so symmetry is exact.
QuadratureRule make_quadrature(QuadratureKind kind, int q);

}  // namespace hexfem
