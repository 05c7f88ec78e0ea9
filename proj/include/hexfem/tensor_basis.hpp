#pragma once

#include <span>
#include <vector>

#include "hexfem/quadrature.hpp"

namespace hexfem {

/// 1D factors of the tensor-product basis evaluator: values and derivatives
/// of the degree-p Lagrange basis on Gauss-Lobatto-Legendre nodes, tabulated
/// at the rule's quadrature points.
///
/// interp1d and grad1d are q x (p+1), row-major, quadrature index as row.
/// interp1d_t / grad1d_t are the cached (p+1) x q transposes used by the
/// transpose-direction kernels.
struct TensorBasis {
  int p = 0;
  int q = 0;
  std::vector<double> nodes;  // p+1 GLL nodal points
  QuadratureRule quad;
  std::vector<double> interp1d;
  std::vector<double> grad1d;
  std::vector<double> interp1d_t;
  std::vector<double> grad1d_t;
  bool collocated = false;  // quadrature points coincide with the nodes

  int num_nodes_1d() const { return p + 1; }
  int num_nodes() const { return (p + 1) * (p + 1) * (p + 1); }
  int num_qpts() const { return q * q * q; }
};

TensorBasis make_basis(int p, const QuadratureRule& quad);

enum class EvalMode { Interp, Grad };
enum class EvalDirection { Forward, Transpose };

/// Applies the 3D tensor-product operator to one element with m components,
/// as three 1D contractions per direction (never forming the dense matrix).
///
/// Element arrays are x-fastest: flat = i0 + n0*(i1 + n1*i2). Shapes per
/// component: Forward Interp (p+1)^3 -> q^3; Forward Grad (p+1)^3 -> 3*q^3
/// with the reference-gradient component outermost (all d/dr0, then d/dr1,
/// then d/dr2); Transpose reverses the shapes. Components are stored
/// consecutively. Mismatched spans are rejected.
void apply_tensor_3d(const TensorBasis& basis, EvalMode mode, EvalDirection dir,
                     int m, std::span<const double> u, std::span<double> v);

}  // namespace hexfem
