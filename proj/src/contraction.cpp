#include "hexfem/contraction.hpp"

#include <algorithm>
#include <stdexcept>

namespace hexfem {

namespace {

inline std::int64_t cube(std::int64_t n) { return n * n * n; }

// One 1D contraction along `dim` for a batch, contracted index innermost.
// Returns the multiply-add count.
template <bool Count>
std::uint64_t contract_sf(const double* matrix, int n_out, int n_in, int dim,
                          std::array<int, 3> s, std::int64_t ne, const double* in,
                          double* out, bool accumulate) {
  const std::int64_t in_elem = std::int64_t(s[0]) * s[1] * s[2];
  std::array<int, 3> so = s;
  so[std::size_t(dim)] = n_out;
  const std::int64_t out_elem = std::int64_t(so[0]) * so[1] * so[2];
  std::uint64_t mas = 0;
  for (std::int64_t e = 0; e < ne; ++e) {
    const double* ein = in + e * in_elem;
    double* eout = out + e * out_elem;
    if (dim == 0) {
      for (int c = 0; c < s[2]; ++c) {
        for (int b = 0; b < s[1]; ++b) {
          const double* col = ein + std::int64_t(n_in) * (b + std::int64_t(s[1]) * c);
          double* orow = eout + std::int64_t(n_out) * (b + std::int64_t(s[1]) * c);
          for (int a1 = 0; a1 < n_out; ++a1) {
            const double* row = matrix + std::int64_t(a1) * n_in;
            double acc = 0.0;
            for (int a = 0; a < n_in; ++a) {
              acc += row[a] * col[a];
              if constexpr (Count) ++mas;
            }
            if (accumulate) orow[a1] += acc; else orow[a1] = acc;
          }
        }
      }
    } else if (dim == 1) {
      for (int c = 0; c < s[2]; ++c) {
        for (int b1 = 0; b1 < n_out; ++b1) {
          const double* row = matrix + std::int64_t(b1) * n_in;
          for (int a = 0; a < s[0]; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n_in; ++b) {
              acc += row[b] * ein[a + std::int64_t(s[0]) * (b + std::int64_t(s[1]) * c)];
              if constexpr (Count) ++mas;
            }
            double& o = eout[a + std::int64_t(s[0]) * (b1 + std::int64_t(n_out) * c)];
            if (accumulate) o += acc; else o = acc;
          }
        }
      }
    } else {
      const std::int64_t plane = std::int64_t(s[0]) * s[1];
      for (int c1 = 0; c1 < n_out; ++c1) {
        const double* row = matrix + std::int64_t(c1) * n_in;
        for (int b = 0; b < s[1]; ++b) {
          for (int a = 0; a < s[0]; ++a) {
            double acc = 0.0;
            for (int c = 0; c < n_in; ++c) {
              acc += row[c] * ein[a + std::int64_t(s[0]) * b + plane * c];
              if constexpr (Count) ++mas;
            }
            double& o = eout[a + std::int64_t(s[0]) * b + plane * c1];
            if (accumulate) o += acc; else o = acc;
          }
        }
      }
    }
  }
  return mas;
}

// Same contraction walking the flat 3D output index, input offsets formed by
// explicit index arithmetic.
template <bool Count>
std::uint64_t contract_naive(const double* matrix, int n_out, int n_in, int dim,
                             std::array<int, 3> s, std::int64_t ne, const double* in,
                             double* out, bool accumulate) {
  const std::int64_t in_elem = std::int64_t(s[0]) * s[1] * s[2];
  std::array<int, 3> so = s;
  so[std::size_t(dim)] = n_out;
  const std::int64_t out_elem = std::int64_t(so[0]) * so[1] * so[2];
  std::uint64_t mas = 0;
  for (std::int64_t e = 0; e < ne; ++e) {
    const double* ein = in + e * in_elem;
    double* eout = out + e * out_elem;
    for (std::int64_t o = 0; o < out_elem; ++o) {
      std::array<std::int64_t, 3> idx;
      idx[0] = o % so[0];
      idx[1] = (o / so[0]) % so[1];
      idx[2] = o / (std::int64_t(so[0]) * so[1]);
      const std::int64_t mrow = idx[std::size_t(dim)] * n_in;
      double acc = 0.0;
      for (int k = 0; k < n_in; ++k) {
        std::array<std::int64_t, 3> iidx = idx;
        iidx[std::size_t(dim)] = k;
        acc += matrix[mrow + k] *
               ein[iidx[0] + std::int64_t(s[0]) * (iidx[1] + std::int64_t(s[1]) * iidx[2])];
        if constexpr (Count) ++mas;
      }
      if (accumulate) eout[o] += acc; else eout[o] = acc;
    }
  }
  return mas;
}

// Full 3D tensor application of one element, O(q^3 (p+1)^3): the reference
// path. f0/f1/f2 are the 1D factors per direction, each nq_1d x nn_1d.
template <bool Count>
std::uint64_t dense3d_forward(const double* f0, const double* f1, const double* f2,
                              int nn, int nq, const double* u, double* v,
                              bool accumulate) {
  std::uint64_t mas = 0;
  for (int qc = 0; qc < nq; ++qc) {
    for (int qb = 0; qb < nq; ++qb) {
      for (int qa = 0; qa < nq; ++qa) {
        double acc = 0.0;
        for (int ic = 0; ic < nn; ++ic) {
          const double wc = f2[std::int64_t(qc) * nn + ic];
          for (int ib = 0; ib < nn; ++ib) {
            const double wcb = wc * f1[std::int64_t(qb) * nn + ib];
            const double* urow = u + std::int64_t(nn) * (ib + std::int64_t(nn) * ic);
            const double* frow = f0 + std::int64_t(qa) * nn;
            for (int ia = 0; ia < nn; ++ia) {
              acc += wcb * frow[ia] * urow[ia];
              if constexpr (Count) ++mas;
            }
          }
        }
        double& o = v[qa + std::int64_t(nq) * (qb + std::int64_t(nq) * qc)];
        if (accumulate) o += acc; else o = acc;
      }
    }
  }
  return mas;
}

template <bool Count>
std::uint64_t dense3d_transpose(const double* f0, const double* f1, const double* f2,
                                int nn, int nq, const double* u, double* v,
                                bool accumulate) {
  std::uint64_t mas = 0;
  for (int ic = 0; ic < nn; ++ic) {
    for (int ib = 0; ib < nn; ++ib) {
      for (int ia = 0; ia < nn; ++ia) {
        double acc = 0.0;
        for (int qc = 0; qc < nq; ++qc) {
          const double wc = f2[std::int64_t(qc) * nn + ic];
          for (int qb = 0; qb < nq; ++qb) {
            const double wcb = wc * f1[std::int64_t(qb) * nn + ib];
            const double* urow = u + std::int64_t(nq) * (qb + std::int64_t(nq) * qc);
            for (int qa = 0; qa < nq; ++qa) {
              acc += wcb * f0[std::int64_t(qa) * nn + ia] * urow[qa];
              if constexpr (Count) ++mas;
            }
          }
        }
        double& o = v[ia + std::int64_t(nn) * (ib + std::int64_t(nn) * ic)];
        if (accumulate) o += acc; else o = acc;
      }
    }
  }
  return mas;
}

void add_flops(const KernelPlan& plan, std::uint64_t mas) {
  if (plan.flops && mas) plan.flops->ops.fetch_add(2 * mas, std::memory_order_relaxed);
}

}  // namespace

void contract_batch(const KernelPlan& plan, std::span<const double> matrix,
                    int n_out, int n_in, int dim, std::array<int, 3> in_shape,
                    std::int64_t ne, std::span<const double> in,
                    std::span<double> out, bool accumulate) {
  if (dim < 0 || dim > 2) throw std::invalid_argument("contract_batch: dim must be 0, 1 or 2");
  if (n_out < 1 || n_in < 1 || in_shape[std::size_t(dim)] != n_in)
    throw std::invalid_argument("contract_batch: inconsistent shapes");
  if (std::int64_t(matrix.size()) != std::int64_t(n_out) * n_in)
    throw std::invalid_argument("contract_batch: matrix size mismatch");
  const std::int64_t in_elem = std::int64_t(in_shape[0]) * in_shape[1] * in_shape[2];
  const std::int64_t out_elem = in_elem / n_in * n_out;
  if (std::int64_t(in.size()) < ne * in_elem || std::int64_t(out.size()) < ne * out_elem)
    throw std::invalid_argument("contract_batch: buffer too small");

  std::uint64_t mas;
  if (plan.path == KernelPath::SumFactorized) {
    mas = plan.flops
              ? contract_sf<true>(matrix.data(), n_out, n_in, dim, in_shape, ne,
                                  in.data(), out.data(), accumulate)
              : contract_sf<false>(matrix.data(), n_out, n_in, dim, in_shape, ne,
                                   in.data(), out.data(), accumulate);
  } else {
    mas = plan.flops
              ? contract_naive<true>(matrix.data(), n_out, n_in, dim, in_shape, ne,
                                     in.data(), out.data(), accumulate)
              : contract_naive<false>(matrix.data(), n_out, n_in, dim, in_shape, ne,
                                      in.data(), out.data(), accumulate);
  }
  add_flops(plan, mas);
}

namespace {

// Three-stage chain for one direction set, forward dims 0,1,2 or transposed
// dims 2,1,0, over a batch. Matrices per tensor dimension.
void chain3(const KernelPlan& plan, const double* m0, const double* m1, const double* m2,
            int nn, int nq, EvalDirection dir, std::int64_t ne,
            std::span<const double> in, std::span<double> out,
            ContractionScratch& scratch, bool accumulate_last) {
  const std::array<const double*, 3> mats{m0, m1, m2};
  if (dir == EvalDirection::Forward) {
    std::array<int, 3> shape{nn, nn, nn};
    contract_batch(plan, {mats[0], std::size_t(nq) * nn}, nq, nn, 0, shape, ne, in,
                   scratch.a, false);
    shape[0] = nq;
    contract_batch(plan, {mats[1], std::size_t(nq) * nn}, nq, nn, 1, shape, ne,
                   scratch.a, scratch.b, false);
    shape[1] = nq;
    contract_batch(plan, {mats[2], std::size_t(nq) * nn}, nq, nn, 2, shape, ne,
                   scratch.b, out, accumulate_last);
  } else {
    std::array<int, 3> shape{nq, nq, nq};
    contract_batch(plan, {mats[2], std::size_t(nq) * nn}, nn, nq, 2, shape, ne, in,
                   scratch.a, false);
    shape[2] = nn;
    contract_batch(plan, {mats[1], std::size_t(nq) * nn}, nn, nq, 1, shape, ne,
                   scratch.a, scratch.b, false);
    shape[1] = nn;
    contract_batch(plan, {mats[0], std::size_t(nq) * nn}, nn, nq, 0, shape, ne,
                   scratch.b, out, accumulate_last);
  }
}

void ensure_scratch(ContractionScratch& scratch, int nn, int nq, std::int64_t ne) {
  const std::size_t need = std::size_t(ne) * std::size_t(cube(std::max(nn, nq)));
  if (scratch.a.size() < need) scratch.a.resize(need);
  if (scratch.b.size() < need) scratch.b.resize(need);
}

}  // namespace

void apply_basis_batch(const KernelPlan& plan, const TensorBasis& basis,
                       EvalMode mode, EvalDirection dir, std::int64_t ne,
                       std::span<const double> in, std::span<double> out,
                       ContractionScratch& scratch) {
  const int nn = basis.p + 1;
  const int nq = basis.q;
  const std::int64_t nd3 = cube(nn);
  const std::int64_t nq3 = cube(nq);
  const std::int64_t in_elem = (mode == EvalMode::Grad && dir == EvalDirection::Transpose)
                                   ? 3 * nq3
                                   : (dir == EvalDirection::Forward ? nd3 : nq3);
  const std::int64_t out_elem = (mode == EvalMode::Grad && dir == EvalDirection::Forward)
                                    ? 3 * nq3
                                    : (dir == EvalDirection::Forward ? nq3 : nd3);
  if (std::int64_t(in.size()) < ne * in_elem || std::int64_t(out.size()) < ne * out_elem)
    throw std::invalid_argument("apply_basis_batch: buffer too small");

  if (plan.path == KernelPath::SumFactorized) {
    ensure_scratch(scratch, nn, nq, ne);
    const double* B = basis.interp1d.data();
    const double* D = basis.grad1d.data();
    const double* Bt = basis.interp1d_t.data();
    const double* Dt = basis.grad1d_t.data();
    if (mode == EvalMode::Interp) {
      if (dir == EvalDirection::Forward) {
        chain3(plan, B, B, B, nn, nq, dir, ne, in, out, scratch, false);
      } else {
        chain3(plan, Bt, Bt, Bt, nn, nq, dir, ne, in, out, scratch, false);
      }
      return;
    }
    for (int d = 0; d < 3; ++d) {
      std::array<const double*, 3> f{B, B, B};
      std::array<const double*, 3> ft{Bt, Bt, Bt};
      f[std::size_t(d)] = D;
      ft[std::size_t(d)] = Dt;
      if (dir == EvalDirection::Forward) {
        chain3(plan, f[0], f[1], f[2], nn, nq, dir, ne,
               in, out.subspan(std::size_t(d) * std::size_t(ne) * std::size_t(nq3)),
               scratch, false);
      } else {
        chain3(plan, ft[0], ft[1], ft[2], nn, nq, dir, ne,
               in.subspan(std::size_t(d) * std::size_t(ne) * std::size_t(nq3)), out,
               scratch, d > 0);
      }
    }
    return;
  }

  // Naive reference path: the dense 3D operator per element.
  const double* B = basis.interp1d.data();
  const double* D = basis.grad1d.data();
  std::uint64_t mas = 0;
  const bool count = plan.flops != nullptr;
  for (std::int64_t e = 0; e < ne; ++e) {
    if (mode == EvalMode::Interp) {
      const double* u = in.data() + e * in_elem;
      double* v = out.data() + e * out_elem;
      if (dir == EvalDirection::Forward) {
        mas += count ? dense3d_forward<true>(B, B, B, nn, nq, u, v, false)
                     : dense3d_forward<false>(B, B, B, nn, nq, u, v, false);
      } else {
        mas += count ? dense3d_transpose<true>(B, B, B, nn, nq, u, v, false)
                     : dense3d_transpose<false>(B, B, B, nn, nq, u, v, false);
      }
      continue;
    }
    for (int d = 0; d < 3; ++d) {
      std::array<const double*, 3> f{B, B, B};
      f[std::size_t(d)] = D;
      if (dir == EvalDirection::Forward) {
        const double* u = in.data() + e * nd3;
        double* v = out.data() + (std::int64_t(d) * ne + e) * nq3;
        mas += count ? dense3d_forward<true>(f[0], f[1], f[2], nn, nq, u, v, false)
                     : dense3d_forward<false>(f[0], f[1], f[2], nn, nq, u, v, false);
      } else {
        const double* u = in.data() + (std::int64_t(d) * ne + e) * nq3;
        double* v = out.data() + e * nd3;
        mas += count ? dense3d_transpose<true>(f[0], f[1], f[2], nn, nq, u, v, d > 0)
                     : dense3d_transpose<false>(f[0], f[1], f[2], nn, nq, u, v, d > 0);
      }
    }
  }
  add_flops(plan, mas);
}

std::uint64_t flops_estimate(const KernelPlan& plan, EvalMode mode) {
  const std::uint64_t p1 = std::uint64_t(plan.p) + 1;
  const std::uint64_t q = std::uint64_t(plan.q);
  const std::uint64_t interp =
      2 * std::uint64_t(plan.m) * (q * p1 * p1 * p1 + q * q * p1 * p1 + q * q * q * p1);
  return mode == EvalMode::Interp ? interp : 3 * interp;
}

}  // namespace hexfem
