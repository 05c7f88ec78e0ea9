#pragma once

#include <cstdint>
#include <span>

#include "hexfem/mesh.hpp"
#include "hexfem/parallel.hpp"
#include "hexfem/tensor_basis.hpp"

namespace hexfem {

enum class QDataKind { Mass, Diffusion };

/// Precomputed geometric factors at quadrature points (partial assembly).
///
/// Mass: one scalar per point, w_q * det(J_q), at values[e*nq + qi].
/// Diffusion: the upper triangle (00,01,02,11,12,22) of the symmetric matrix
/// w_q * det(J_q) * J_q^{-1} J_q^{-T}, at values[(e*6 + s)*nq + qi].
/// J is the coordinate Jacobian dx/dr of the isoparametric map.
struct QData {
  QDataKind kind = QDataKind::Mass;
  std::int64_t num_elements = 0;
  int nq = 0;  // q^3 points per element
  std::vector<double> values;
};

/// Computes the factors by evaluating the coordinate gradient with the
/// basis's Grad kernel; det and inverse use the closed-form 3x3 formulas.
/// Throws if det J <= 0, naming the element and quadrature point.
QData compute_qdata(const HexMesh& mesh, const TensorBasis& basis,
                    QDataKind kind, ThreadPool* pool = nullptr);

/// v_q = qdata (.) u_q for elements [e0, e0+ne), one component
/// (ne*nq values).
void apply_qf_mass(const QData& qdata, std::int64_t e0, std::int64_t ne,
                   std::span<const double> u_q, std::span<double> v_q);

/// grad_v = S * grad_u pointwise, S the stored symmetric 3x3 block.
/// Gradient layout matches apply_basis_batch: component d of element e0+e at
/// offset (d*ne + e)*nq (3*ne*nq values per span).
void apply_qf_diffusion(const QData& qdata, std::int64_t e0, std::int64_t ne,
                        std::span<const double> grad_u_q,
                        std::span<double> grad_v_q);

}  // namespace hexfem
