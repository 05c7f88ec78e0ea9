#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "hexfem/tensor_basis.hpp"

namespace hexfem {

enum class KernelPath { Naive, SumFactorized };

/// Accumulates floating point operations performed by the contraction
/// kernels (2 per multiply-add in the innermost loops). Pointwise D-stage
/// arithmetic is not counted; the counter covers the basis application.
struct FlopCounter {
  std::atomic<std::uint64_t> ops{0};
  void reset() { ops.store(0); }
  std::uint64_t count() const { return ops.load(); }
};

/// Execution plan for the element kernels. Both paths produce the same
/// values (the naive path is the reference); `block` only controls loop
/// blocking and never changes results.
struct KernelPlan {
  int p = 1;
  int q = 2;
  int m = 1;
  KernelPath path = KernelPath::SumFactorized;
  int block = 8;               // elements per batch
  FlopCounter* flops = nullptr;
};

/// Caller-owned scratch for the batched kernels; sized on first use, no
/// allocation afterwards.
struct ContractionScratch {
  std::vector<double> a;
  std::vector<double> b;
};

/// Applies the 1D matrix (n_out x n_in, row-major) along tensor dimension
/// `dim` of every element in the batch. Element blocks of shape `in_shape`
/// (x-fastest) are consecutive in `in`; `in_shape[dim]` must equal n_in.
///
/// The sum-factorized path iterates outer dims then the output index with
/// the contracted index innermost; the naive path walks the flat 3D output
/// index and recomputes input offsets explicitly. Both accumulate the
/// contracted sum in increasing index order, so results are deterministic.
void contract_batch(const KernelPlan& plan, std::span<const double> matrix,
                    int n_out, int n_in, int dim, std::array<int, 3> in_shape,
                    std::int64_t ne, std::span<const double> in,
                    std::span<double> out, bool accumulate = false);

/// Batched basis application for `ne` single-component element blocks.
/// SumFactorized: three 1D contractions per direction (dims 0,1,2 forward;
/// 2,1,0 transposed). Naive: the full 3D operator applied by explicit index
/// arithmetic, O((p+1)^3 q^3) per element.
///
/// Grad data is laid out gradient-component outermost across the batch:
/// component d of element e lives at offset (d*ne + e)*q^3. For ne == 1 this
/// is the apply_tensor_3d element layout.
void apply_basis_batch(const KernelPlan& plan, const TensorBasis& basis,
                       EvalMode mode, EvalDirection dir, std::int64_t ne,
                       std::span<const double> in, std::span<double> out,
                       ContractionScratch& scratch);

/// Analytic multiply-add count (2 ops each) per element of the
/// sum-factorized kernel:
///   Interp: 2*m*(q*(p+1)^3 + q^2*(p+1)^2 + q^3*(p+1))
///   Grad:   3x the Interp count (one chain per gradient component).
/// The count is direction-independent and matches the instrumented counter
/// of the sum-factorized path exactly.
std::uint64_t flops_estimate(const KernelPlan& plan, EvalMode mode);

}  // namespace hexfem
