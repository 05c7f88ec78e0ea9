#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hexfem/contraction.hpp"
#include "hexfem/qfunction.hpp"
#include "hexfem/restriction.hpp"

namespace hexfem {

/// Matrix-free operator alpha*A + beta*B applied as G^T B^T D B G at
/// L-vector level. Essential constraints are imposed symmetrically: the
/// operator zeroes constrained entries in and out and acts as the identity
/// on them. alpha, beta >= 0 and not both zero; the diffusion stage needs
/// diff_qdata, the mass stage mass_qdata.
struct MatFreeOperator {
  ElemRestriction restriction;
  TensorBasis basis;
  std::optional<QData> mass_qdata;
  std::optional<QData> diff_qdata;
  int m = 1;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::int64_t> constrained;  // sorted scalar L-indices
  KernelPlan plan;

  std::int64_t size() const { return std::int64_t(m) * restriction.n_L; }
};

MatFreeOperator make_operator(ElemRestriction restriction, TensorBasis basis,
                              double alpha, double beta,
                              std::optional<QData> mass_qdata,
                              std::optional<QData> diff_qdata,
                              std::vector<std::int64_t> constrained,
                              KernelPlan plan = {});

/// Reusable buffers for operator_apply; allocation happens on first use
/// only, the element loop itself is allocation-free.
struct OperatorScratch {
  std::vector<double> masked;
  std::vector<double> e_in, e_out;
  std::vector<double> l_tmp;
  struct Worker {
    ContractionScratch chain;
    std::vector<double> q_in, q_out;
  };
  std::vector<Worker> workers;
};

/// y = (alpha*A + beta*B) x with constraint handling as above. Safe for
/// concurrent calls with distinct scratch/output. Bitwise deterministic for
/// any pool size.
void operator_apply(const MatFreeOperator& op, std::span<const double> x,
                    std::span<double> y, ThreadPool* pool = nullptr,
                    OperatorScratch* scratch = nullptr);

/// Exact operator diagonal, computed matrix-free per element from the
/// squared / pairwise-multiplied 1D factors, then gathered. Constrained
/// entries are 1.
std::vector<double> operator_diagonal(const MatFreeOperator& op,
                                      ThreadPool* pool = nullptr);

/// Dense reference assembly (row-major, size (m*n_L)^2) by a direct
/// quadrature loop over element matrices, with no sum factorization; the
/// brute-force oracle for operator_apply. Rejected if m*n_L > 20000.
std::vector<double> reference_assemble(const MatFreeOperator& op);

}  // namespace hexfem
