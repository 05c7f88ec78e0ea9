#include "hexfem/tensor_basis.hpp"

#include <stdexcept>
#include <string>

#include "hexfem/contraction.hpp"

namespace hexfem {

namespace {

// Lagrange basis function j on the given nodes, evaluated at x.
double lagrange_value(std::span<const double> nodes, int j, double x) {
  double result = 1.0;
  for (int m = 0; m < int(nodes.size()); ++m) {
    if (m == j) continue;
    result *= (x - nodes[std::size_t(m)]) /
              (nodes[std::size_t(j)] - nodes[std::size_t(m)]);
  }
  return result;
}

double lagrange_derivative(std::span<const double> nodes, int j, double x) {
  double sum = 0.0;
  for (int i = 0; i < int(nodes.size()); ++i) {
    if (i == j) continue;
    double product = 1.0;
    for (int m = 0; m < int(nodes.size()); ++m) {
      if (m == i || m == j) continue;
      product *= (x - nodes[std::size_t(m)]) /
                 (nodes[std::size_t(j)] - nodes[std::size_t(m)]);
    }
    sum += product / (nodes[std::size_t(j)] - nodes[std::size_t(i)]);
  }
  return sum;
}

}  // namespace

TensorBasis make_basis(int p, const QuadratureRule& quad) {
  if (p < 1) throw std::invalid_argument("make_basis: p must be >= 1, got " + std::to_string(p));
  if (quad.q < 1 || int(quad.points.size()) != quad.q)
    throw std::invalid_argument("make_basis: invalid quadrature rule");

  TensorBasis basis;
  basis.p = p;
  basis.q = quad.q;
  basis.quad = quad;
  basis.nodes = make_quadrature(QuadratureKind::GaussLobattoLegendre, p + 1).points;
  basis.collocated = quad.kind == QuadratureKind::GaussLobattoLegendre && quad.q == p + 1;

  const int n1 = p + 1;
  basis.interp1d.assign(std::size_t(quad.q) * n1, 0.0);
  basis.grad1d.assign(std::size_t(quad.q) * n1, 0.0);
  for (int iq = 0; iq < quad.q; ++iq) {
    const double x = quad.points[std::size_t(iq)];
    for (int j = 0; j < n1; ++j) {
      basis.interp1d[std::size_t(iq) * n1 + j] = lagrange_value(basis.nodes, j, x);
      basis.grad1d[std::size_t(iq) * n1 + j] = lagrange_derivative(basis.nodes, j, x);
    }
  }
  basis.interp1d_t.assign(std::size_t(quad.q) * n1, 0.0);
  basis.grad1d_t.assign(std::size_t(quad.q) * n1, 0.0);
  for (int iq = 0; iq < quad.q; ++iq) {
    for (int j = 0; j < n1; ++j) {
      basis.interp1d_t[std::size_t(j) * quad.q + iq] = basis.interp1d[std::size_t(iq) * n1 + j];
      basis.grad1d_t[std::size_t(j) * quad.q + iq] = basis.grad1d[std::size_t(iq) * n1 + j];
    }
  }
  return basis;
}

void apply_tensor_3d(const TensorBasis& basis, EvalMode mode, EvalDirection dir,
                     int m, std::span<const double> u, std::span<double> v) {
  if (m < 1) throw std::invalid_argument("apply_tensor_3d: m must be >= 1");
  const std::size_t nd = std::size_t(basis.num_nodes());
  const std::size_t nq = std::size_t(basis.num_qpts());
  std::size_t in_size, out_size;
  if (mode == EvalMode::Interp) {
    in_size = dir == EvalDirection::Forward ? nd : nq;
    out_size = dir == EvalDirection::Forward ? nq : nd;
  } else {
    in_size = dir == EvalDirection::Forward ? nd : 3 * nq;
    out_size = dir == EvalDirection::Forward ? 3 * nq : nd;
  }
  if (u.size() != std::size_t(m) * in_size || v.size() != std::size_t(m) * out_size)
    throw std::invalid_argument("apply_tensor_3d: shape mismatch");

  KernelPlan plan;
  plan.p = basis.p;
  plan.q = basis.q;
  plan.m = m;
  ContractionScratch scratch;
  for (int c = 0; c < m; ++c) {
    apply_basis_batch(plan, basis, mode, dir, 1,
                      u.subspan(std::size_t(c) * in_size, in_size),
                      v.subspan(std::size_t(c) * out_size, out_size), scratch);
  }
}

}  // namespace hexfem
