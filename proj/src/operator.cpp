#include "hexfem/operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hexfem {

namespace {

void validate_qdata(const QData& qd, QDataKind kind, std::int64_t E, int nq,
                    const char* label) {
  if (qd.kind != kind || qd.num_elements != E || qd.nq != nq)
    throw std::invalid_argument(std::string("make_operator: ") + label +
                                " qdata does not match restriction/basis");
}

}  // namespace

MatFreeOperator make_operator(ElemRestriction restriction, TensorBasis basis,
                              double alpha, double beta,
                              std::optional<QData> mass_qdata,
                              std::optional<QData> diff_qdata,
                              std::vector<std::int64_t> constrained,
                              KernelPlan plan) {
  if (alpha < 0 || beta < 0 || (alpha == 0 && beta == 0))
    throw std::invalid_argument(
        "make_operator: alpha, beta must be >= 0 and not both zero");
  if (restriction.elem_size != basis.num_nodes())
    throw std::invalid_argument("make_operator: restriction/basis size mismatch");
  const std::int64_t E = restriction.num_elements;
  const int nq = basis.num_qpts();
  if (beta > 0) {
    if (!mass_qdata) throw std::invalid_argument("make_operator: mass qdata required");
    validate_qdata(*mass_qdata, QDataKind::Mass, E, nq, "mass");
  }
  if (alpha > 0) {
    if (!diff_qdata) throw std::invalid_argument("make_operator: diffusion qdata required");
    validate_qdata(*diff_qdata, QDataKind::Diffusion, E, nq, "diffusion");
  }
  std::sort(constrained.begin(), constrained.end());
  constrained.erase(std::unique(constrained.begin(), constrained.end()),
                    constrained.end());
  if (!constrained.empty() &&
      (constrained.front() < 0 || constrained.back() >= restriction.n_L))
    throw std::invalid_argument("make_operator: constrained index out of range");

  MatFreeOperator op;
  op.restriction = std::move(restriction);
  op.basis = std::move(basis);
  op.mass_qdata = std::move(mass_qdata);
  op.diff_qdata = std::move(diff_qdata);
  op.m = op.restriction.m;
  op.alpha = alpha;
  op.beta = beta;
  op.constrained = std::move(constrained);
  plan.p = op.basis.p;
  plan.q = op.basis.q;
  plan.m = op.m;
  op.plan = plan;
  return op;
}

void operator_apply(const MatFreeOperator& op, std::span<const double> x,
                    std::span<double> y, ThreadPool* pool, OperatorScratch* scratch) {
  const std::int64_t n = op.size();
  if (std::int64_t(x.size()) != n || std::int64_t(y.size()) != n)
    throw std::invalid_argument("operator_apply: shape mismatch");

  const ElemRestriction& r = op.restriction;
  const std::int64_t E = r.num_elements;
  const std::int64_t S = r.elem_size;
  const std::int64_t nq = op.basis.num_qpts();
  const std::int64_t n_L = r.n_L;
  const int m = op.m;
  const std::int64_t block = std::max(1, op.plan.block);
  const int n_workers = pool ? pool->size() : 1;

  OperatorScratch local;
  OperatorScratch& ws = scratch ? *scratch : local;
  ws.masked.resize(std::size_t(n));
  ws.e_in.resize(std::size_t(m) * E * S);
  ws.e_out.resize(std::size_t(m) * E * S);
  ws.l_tmp.resize(std::size_t(n));
  ws.workers.resize(std::size_t(n_workers));

  std::copy(x.begin(), x.end(), ws.masked.begin());
  for (int c = 0; c < m; ++c)
    for (const std::int64_t i : op.constrained) ws.masked[std::size_t(c * n_L + i)] = 0.0;
  std::fill(y.begin(), y.end(), 0.0);

  auto run_stage = [&](EvalMode mode, const QData& qd, double coef) {
    apply_g(r, ws.masked, ws.e_in, pool);
    const std::int64_t nbatch = (E + block - 1) / block;
    auto batch_work = [&](std::int64_t lo, std::int64_t hi, int w) {
      auto& wk = ws.workers[std::size_t(w)];
      const std::size_t qbuf = std::size_t(mode == EvalMode::Grad ? 3 : 1) *
                               std::size_t(block) * std::size_t(nq);
      if (wk.q_in.size() < qbuf) wk.q_in.resize(qbuf);
      if (wk.q_out.size() < qbuf) wk.q_out.resize(qbuf);
      for (std::int64_t batch = lo; batch < hi; ++batch) {
        const std::int64_t e0 = batch * block;
        const std::int64_t ne = std::min(block, E - e0);
        for (int c = 0; c < m; ++c) {
          const auto in = std::span<const double>(ws.e_in)
                              .subspan(std::size_t((c * E + e0) * S), std::size_t(ne * S));
          const auto out = std::span<double>(ws.e_out)
                               .subspan(std::size_t((c * E + e0) * S), std::size_t(ne * S));
          if (mode == EvalMode::Grad) {
            apply_basis_batch(op.plan, op.basis, EvalMode::Grad, EvalDirection::Forward,
                              ne, in, wk.q_in, wk.chain);
            apply_qf_diffusion(qd, e0, ne,
                               std::span<const double>(wk.q_in).first(std::size_t(3 * ne * nq)),
                               std::span<double>(wk.q_out).first(std::size_t(3 * ne * nq)));
            apply_basis_batch(op.plan, op.basis, EvalMode::Grad, EvalDirection::Transpose,
                              ne, wk.q_out, out, wk.chain);
          } else {
            apply_basis_batch(op.plan, op.basis, EvalMode::Interp, EvalDirection::Forward,
                              ne, in, wk.q_in, wk.chain);
            apply_qf_mass(qd, e0, ne,
                          std::span<const double>(wk.q_in).first(std::size_t(ne * nq)),
                          std::span<double>(wk.q_out).first(std::size_t(ne * nq)));
            apply_basis_batch(op.plan, op.basis, EvalMode::Interp, EvalDirection::Transpose,
                              ne, wk.q_out, out, wk.chain);
          }
        }
      }
    };
    if (pool) pool->parallel_for(nbatch, batch_work); else batch_work(0, nbatch, 0);
    apply_g_transpose(r, ws.e_out, ws.l_tmp, pool);
    auto axpy = [&](std::int64_t lo, std::int64_t hi, int) {
      for (std::int64_t i = lo; i < hi; ++i)
        y[std::size_t(i)] += coef * ws.l_tmp[std::size_t(i)];
    };
    if (pool) pool->parallel_for(n, axpy); else axpy(0, n, 0);
  };

  if (op.alpha != 0.0) run_stage(EvalMode::Grad, *op.diff_qdata, op.alpha);
  if (op.beta != 0.0) run_stage(EvalMode::Interp, *op.mass_qdata, op.beta);

  for (int c = 0; c < m; ++c)
    for (const std::int64_t i : op.constrained)
      y[std::size_t(c * n_L + i)] = x[std::size_t(c * n_L + i)];
}

namespace {

// One transpose chain (dims 2, 1, 0) with per-dimension (p+1) x q matrices.
void transpose_chain(const KernelPlan& plan, const double* m0t, const double* m1t,
                     const double* m2t, int nn, int nq, std::int64_t ne,
                     std::span<const double> in, std::span<double> out,
                     ContractionScratch& scratch) {
  const std::size_t msize = std::size_t(nn) * std::size_t(nq);
  std::array<int, 3> shape{nq, nq, nq};
  contract_batch(plan, {m2t, msize}, nn, nq, 2, shape, ne, in, scratch.a, false);
  shape[2] = nn;
  contract_batch(plan, {m1t, msize}, nn, nq, 1, shape, ne, scratch.a, scratch.b, false);
  shape[1] = nn;
  contract_batch(plan, {m0t, msize}, nn, nq, 0, shape, ne, scratch.b, out, false);
}

std::vector<double> hadamard(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

std::vector<double> operator_diagonal(const MatFreeOperator& op, ThreadPool* pool) {
  const ElemRestriction& r = op.restriction;
  const std::int64_t E = r.num_elements;
  const std::int64_t S = r.elem_size;
  const std::int64_t nq = op.basis.num_qpts();
  const std::int64_t n_L = r.n_L;
  const int nn = op.basis.p + 1;

  // diag_e[j] = sum_q B[q,j]^2 m_q  (mass part)
  //           + sum_q sum_{a<=b} (2-delta_ab) G_a[q,j] G_b[q,j] S_ab_q,
  // and every pairwise product of tensor-product columns factorizes, so each
  // term is one transpose interpolation with elementwise-squared 1D matrices.
  const auto bb = hadamard(op.basis.interp1d_t, op.basis.interp1d_t);
  const auto dd = hadamard(op.basis.grad1d_t, op.basis.grad1d_t);
  const auto bd = hadamard(op.basis.interp1d_t, op.basis.grad1d_t);

  KernelPlan plan = op.plan;
  plan.flops = nullptr;

  std::vector<double> e_diag(std::size_t(E) * S, 0.0);
  const std::int64_t block = std::max(1, plan.block);
  const std::int64_t nbatch = (E + block - 1) / block;
  const int n_workers = pool ? pool->size() : 1;
  struct Worker {
    ContractionScratch chain;
    std::vector<double> slice, tmp;
  };
  std::vector<Worker> workers(static_cast<std::size_t>(n_workers));

  auto work = [&](std::int64_t lo, std::int64_t hi, int w) {
    auto& wk = workers[std::size_t(w)];
    wk.slice.resize(std::size_t(block) * nq);
    wk.tmp.resize(std::size_t(block) * S);
    const std::size_t chain_need =
        std::size_t(block) * std::size_t(std::max(nn, op.basis.q)) *
        std::max(nn, op.basis.q) * std::max(nn, op.basis.q);
    if (wk.chain.a.size() < chain_need) wk.chain.a.resize(chain_need);
    if (wk.chain.b.size() < chain_need) wk.chain.b.resize(chain_need);
    for (std::int64_t batch = lo; batch < hi; ++batch) {
      const std::int64_t e0 = batch * block;
      const std::int64_t ne = std::min(block, E - e0);
      double* diag = e_diag.data() + e0 * S;
      if (op.beta != 0.0) {
        const auto& qd = *op.mass_qdata;
        transpose_chain(plan, bb.data(), bb.data(), bb.data(), nn, op.basis.q, ne,
                        std::span<const double>(qd.values)
                            .subspan(std::size_t(e0 * nq), std::size_t(ne * nq)),
                        wk.tmp, wk.chain);
        for (std::int64_t i = 0; i < ne * S; ++i) diag[i] += op.beta * wk.tmp[std::size_t(i)];
      }
      if (op.alpha != 0.0) {
        const auto& qd = *op.diff_qdata;
        int s = 0;
        for (int a = 0; a < 3; ++a) {
          for (int b = a; b < 3; ++b, ++s) {
            for (std::int64_t e = 0; e < ne; ++e) {
              const double* src = qd.values.data() + ((e0 + e) * 6 + s) * nq;
              std::copy(src, src + nq, wk.slice.begin() + std::size_t(e * nq));
            }
            std::array<const double*, 3> f{bb.data(), bb.data(), bb.data()};
            for (int k = 0; k < 3; ++k) {
              if (k == a && k == b) f[std::size_t(k)] = dd.data();
              else if (k == a || k == b) f[std::size_t(k)] = bd.data();
            }
            transpose_chain(plan, f[0], f[1], f[2], nn, op.basis.q, ne,
                            std::span<const double>(wk.slice).first(std::size_t(ne * nq)),
                            wk.tmp, wk.chain);
            const double weight = op.alpha * (a == b ? 1.0 : 2.0);
            for (std::int64_t i = 0; i < ne * S; ++i)
              diag[i] += weight * wk.tmp[std::size_t(i)];
          }
        }
      }
    }
  };
  if (pool) pool->parallel_for(nbatch, work); else work(0, nbatch, 0);

  std::vector<double> l_diag(std::size_t(n_L), 0.0);
  gather_scalar(r, e_diag, l_diag, pool);

  std::vector<double> d(std::size_t(op.size()));
  for (int c = 0; c < op.m; ++c)
    std::copy(l_diag.begin(), l_diag.end(), d.begin() + std::size_t(c) * n_L);
  for (int c = 0; c < op.m; ++c)
    for (const std::int64_t i : op.constrained) d[std::size_t(c * n_L + i)] = 1.0;
  return d;
}

std::vector<double> reference_assemble(const MatFreeOperator& op) {
  const ElemRestriction& r = op.restriction;
  const std::int64_t n_L = r.n_L;
  const std::int64_t n = op.size();
  if (n > 20000)
    throw std::invalid_argument("reference_assemble: problem too large (m*n_L = " +
                                std::to_string(n) + " > 20000)");
  const std::int64_t E = r.num_elements;
  const int S = r.elem_size;
  const int nn = op.basis.p + 1;
  const int q1 = op.basis.q;
  const std::int64_t nq = op.basis.num_qpts();

  // Dense 3D basis tables at all points x all nodes, by direct products.
  std::vector<double> B3(std::size_t(nq) * S);
  std::array<std::vector<double>, 3> G3;
  for (auto& g : G3) g.resize(std::size_t(nq) * S);
  const auto& B = op.basis.interp1d;
  const auto& D = op.basis.grad1d;
  for (int qc = 0, qi = 0; qc < q1; ++qc)
    for (int qb = 0; qb < q1; ++qb)
      for (int qa = 0; qa < q1; ++qa, ++qi)
        for (int jc = 0, j = 0; jc < nn; ++jc)
          for (int jb = 0; jb < nn; ++jb)
            for (int ja = 0; ja < nn; ++ja, ++j) {
              const double ba = B[std::size_t(qa) * nn + ja];
              const double bb = B[std::size_t(qb) * nn + jb];
              const double bc = B[std::size_t(qc) * nn + jc];
              const double da = D[std::size_t(qa) * nn + ja];
              const double db = D[std::size_t(qb) * nn + jb];
              const double dc = D[std::size_t(qc) * nn + jc];
              B3[std::size_t(qi) * S + std::size_t(j)] = ba * bb * bc;
              G3[0][std::size_t(qi) * S + std::size_t(j)] = da * bb * bc;
              G3[1][std::size_t(qi) * S + std::size_t(j)] = ba * db * bc;
              G3[2][std::size_t(qi) * S + std::size_t(j)] = ba * bb * dc;
            }

  std::vector<double> A(std::size_t(n) * std::size_t(n), 0.0);
  std::vector<double> Me(std::size_t(S) * S);
  for (std::int64_t e = 0; e < E; ++e) {
    std::fill(Me.begin(), Me.end(), 0.0);
    for (std::int64_t qi = 0; qi < nq; ++qi) {
      if (op.beta != 0.0) {
        const double w = op.beta * op.mass_qdata->values[std::size_t(e * nq + qi)];
        const double* brow = B3.data() + qi * S;
        for (int i = 0; i < S; ++i) {
          const double bi = w * brow[i];
          double* mrow = Me.data() + std::size_t(i) * S;
          for (int j = 0; j < S; ++j) mrow[std::size_t(j)] += bi * brow[j];
        }
      }
      if (op.alpha != 0.0) {
        const double* qv = op.diff_qdata->values.data() + e * 6 * nq + qi;
        const double s00 = qv[0 * nq], s01 = qv[1 * nq], s02 = qv[2 * nq];
        const double s11 = qv[3 * nq], s12 = qv[4 * nq], s22 = qv[5 * nq];
        const double* g0 = G3[0].data() + qi * S;
        const double* g1 = G3[1].data() + qi * S;
        const double* g2 = G3[2].data() + qi * S;
        for (int i = 0; i < S; ++i) {
          const double k0 = op.alpha * (g0[i] * s00 + g1[i] * s01 + g2[i] * s02);
          const double k1 = op.alpha * (g0[i] * s01 + g1[i] * s11 + g2[i] * s12);
          const double k2 = op.alpha * (g0[i] * s02 + g1[i] * s12 + g2[i] * s22);
          double* mrow = Me.data() + std::size_t(i) * S;
          for (int j = 0; j < S; ++j)
            mrow[std::size_t(j)] += k0 * g0[j] + k1 * g1[j] + k2 * g2[j];
        }
      }
    }
    const std::int64_t* idx = r.indices.data() + e * S;
    for (int c = 0; c < op.m; ++c) {
      const std::int64_t off = std::int64_t(c) * n_L;
      for (int i = 0; i < S; ++i) {
        const std::int64_t gi = off + idx[i];
        for (int j = 0; j < S; ++j) {
          A[std::size_t(gi * n + off + idx[j])] += Me[std::size_t(i) * S + std::size_t(j)];
        }
      }
    }
  }

  for (int c = 0; c < op.m; ++c) {
    for (const std::int64_t ci : op.constrained) {
      const std::int64_t row = std::int64_t(c) * n_L + ci;
      for (std::int64_t k = 0; k < n; ++k) {
        A[std::size_t(row * n + k)] = 0.0;
        A[std::size_t(k * n + row)] = 0.0;
      }
      A[std::size_t(row * n + row)] = 1.0;
    }
  }
  return A;
}

}  // namespace hexfem
