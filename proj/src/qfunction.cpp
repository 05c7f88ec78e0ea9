#include "hexfem/qfunction.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hexfem/contraction.hpp"
#include "hexfem/restriction.hpp"

namespace hexfem {

QData compute_qdata(const HexMesh& mesh, const TensorBasis& basis, QDataKind kind,
                    ThreadPool* pool) {
  if (basis.p != mesh.p)
    throw std::invalid_argument("compute_qdata: basis degree must match the mesh");

  const std::int64_t E = mesh.num_elements();
  const int nq = basis.num_qpts();
  const int S = basis.num_nodes();
  QData qd;
  qd.kind = kind;
  qd.num_elements = E;
  qd.nq = nq;
  qd.values.assign(std::size_t(E) * (kind == QDataKind::Mass ? 1 : 6) * nq, 0.0);

  // Tensor-product quadrature weights, x fastest.
  std::vector<double> wq(std::size_t(nq), 0.0);
  {
    const auto& w = basis.quad.weights;
    int i = 0;
    for (int c = 0; c < basis.q; ++c)
      for (int b = 0; b < basis.q; ++b)
        for (int a = 0; a < basis.q; ++a, ++i)
          wq[std::size_t(i)] = w[std::size_t(a)] * w[std::size_t(b)] * w[std::size_t(c)];
  }

  const ElemRestriction restr = make_restriction(mesh, 3);
  std::vector<double> e_coords(std::size_t(3) * E * S);
  apply_g(restr, mesh.coords, e_coords, pool);

  KernelPlan plan;
  plan.p = basis.p;
  plan.q = basis.q;
  plan.m = 3;

  const int n_workers = pool ? pool->size() : 1;
  struct Worker {
    ContractionScratch chain;
    std::vector<double> grad;  // 3 x block x nq per coordinate component
  };
  std::vector<Worker> workers(static_cast<std::size_t>(n_workers));
  const std::int64_t block = plan.block;
  const std::int64_t nbatch = (E + block - 1) / block;
  std::string failure;
  std::mutex failure_mu;

  auto work = [&](std::int64_t lo, std::int64_t hi, int w) {
    auto& ws = workers[std::size_t(w)];
    ws.grad.resize(std::size_t(9) * block * nq);
    for (std::int64_t batch = lo; batch < hi; ++batch) {
      const std::int64_t e0 = batch * block;
      const std::int64_t ne = std::min<std::int64_t>(block, E - e0);
      // J[a][d] at every point: gradient of coordinate component a.
      for (int a = 0; a < 3; ++a) {
        apply_basis_batch(plan, basis, EvalMode::Grad, EvalDirection::Forward, ne,
                          std::span<const double>(e_coords)
                              .subspan(std::size_t((a * E + e0) * S), std::size_t(ne) * S),
                          std::span<double>(ws.grad)
                              .subspan(std::size_t(a) * 3 * std::size_t(ne) * nq,
                                       3 * std::size_t(ne) * nq),
                          ws.chain);
      }
      for (std::int64_t e = 0; e < ne; ++e) {
        for (int qi = 0; qi < nq; ++qi) {
          double J[3][3];
          for (int a = 0; a < 3; ++a)
            for (int d = 0; d < 3; ++d)
              J[a][d] = ws.grad[std::size_t(((a * 3 + d) * ne + e) * nq + qi)];
          const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                             J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                             J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
          if (!(det > 0.0)) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (failure.empty())
              failure = "compute_qdata: non-positive Jacobian determinant (" +
                        std::to_string(det) + ") in element " + std::to_string(e0 + e) +
                        " at quadrature point " + std::to_string(qi);
            return;
          }
          const double wdet = wq[std::size_t(qi)] * det;
          if (kind == QDataKind::Mass) {
            qd.values[std::size_t((e0 + e) * nq + qi)] = wdet;
            continue;
          }
          // adj(J) / det = J^{-1}
          double inv[3][3];
          inv[0][0] = (J[1][1] * J[2][2] - J[1][2] * J[2][1]) / det;
          inv[0][1] = (J[0][2] * J[2][1] - J[0][1] * J[2][2]) / det;
          inv[0][2] = (J[0][1] * J[1][2] - J[0][2] * J[1][1]) / det;
          inv[1][0] = (J[1][2] * J[2][0] - J[1][0] * J[2][2]) / det;
          inv[1][1] = (J[0][0] * J[2][2] - J[0][2] * J[2][0]) / det;
          inv[1][2] = (J[0][2] * J[1][0] - J[0][0] * J[1][2]) / det;
          inv[2][0] = (J[1][0] * J[2][1] - J[1][1] * J[2][0]) / det;
          inv[2][1] = (J[0][1] * J[2][0] - J[0][0] * J[2][1]) / det;
          inv[2][2] = (J[0][0] * J[1][1] - J[0][1] * J[1][0]) / det;
          // w det(J) * J^{-1} J^{-T}, upper triangle
          int s = 0;
          for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b, ++s) {
              const double v = inv[a][0] * inv[b][0] + inv[a][1] * inv[b][1] +
                               inv[a][2] * inv[b][2];
              qd.values[std::size_t(((e0 + e) * 6 + s) * nq + qi)] = wdet * v;
            }
          }
        }
      }
    }
  };
  if (pool) pool->parallel_for(nbatch, work); else work(0, nbatch, 0);
  if (!failure.empty()) throw std::runtime_error(failure);
  return qd;
}

void apply_qf_mass(const QData& qdata, std::int64_t e0, std::int64_t ne,
                   std::span<const double> u_q, std::span<double> v_q) {
  if (qdata.kind != QDataKind::Mass)
    throw std::invalid_argument("apply_qf_mass: wrong qdata kind");
  const std::int64_t nq = qdata.nq;
  if (std::int64_t(u_q.size()) < ne * nq || std::int64_t(v_q.size()) < ne * nq)
    throw std::invalid_argument("apply_qf_mass: shape mismatch");
  const double* w = qdata.values.data() + e0 * nq;
  for (std::int64_t i = 0; i < ne * nq; ++i) v_q[std::size_t(i)] = w[i] * u_q[std::size_t(i)];
}

void apply_qf_diffusion(const QData& qdata, std::int64_t e0, std::int64_t ne,
                        std::span<const double> grad_u_q, std::span<double> grad_v_q) {
  if (qdata.kind != QDataKind::Diffusion)
    throw std::invalid_argument("apply_qf_diffusion: wrong qdata kind");
  const std::int64_t nq = qdata.nq;
  if (std::int64_t(grad_u_q.size()) < 3 * ne * nq ||
      std::int64_t(grad_v_q.size()) < 3 * ne * nq)
    throw std::invalid_argument("apply_qf_diffusion: shape mismatch");
  for (std::int64_t e = 0; e < ne; ++e) {
    const double* s00 = qdata.values.data() + ((e0 + e) * 6 + 0) * nq;
    const double* s01 = qdata.values.data() + ((e0 + e) * 6 + 1) * nq;
    const double* s02 = qdata.values.data() + ((e0 + e) * 6 + 2) * nq;
    const double* s11 = qdata.values.data() + ((e0 + e) * 6 + 3) * nq;
    const double* s12 = qdata.values.data() + ((e0 + e) * 6 + 4) * nq;
    const double* s22 = qdata.values.data() + ((e0 + e) * 6 + 5) * nq;
    const double* u0 = grad_u_q.data() + (0 * ne + e) * nq;
    const double* u1 = grad_u_q.data() + (1 * ne + e) * nq;
    const double* u2 = grad_u_q.data() + (2 * ne + e) * nq;
    double* v0 = grad_v_q.data() + (0 * ne + e) * nq;
    double* v1 = grad_v_q.data() + (1 * ne + e) * nq;
    double* v2 = grad_v_q.data() + (2 * ne + e) * nq;
    for (std::int64_t qi = 0; qi < nq; ++qi) {
      v0[qi] = s00[qi] * u0[qi] + s01[qi] * u1[qi] + s02[qi] * u2[qi];
      v1[qi] = s01[qi] * u0[qi] + s11[qi] * u1[qi] + s12[qi] * u2[qi];
      v2[qi] = s02[qi] * u0[qi] + s12[qi] * u1[qi] + s22[qi] * u2[qi];
    }
  }
}

}  // namespace hexfem
