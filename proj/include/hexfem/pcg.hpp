#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hexfem/parallel.hpp"

namespace hexfem {

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // ||r||_2, entry 0 is ||b||
  bool converged = false;
  double apply_time_seconds = 0.0;  // wall time inside the operator apply
  double total_time_seconds = 0.0;
};

struct PcgOptions {
  double tol_rel = 1e-8;
  int max_iter = 2000;
  /// When set, runs exactly this many iterations regardless of the residual
  /// (benchmark semantics); convergence is still reported if reached.
  std::optional<int> fixed_iterations;
};

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradient, x0 = 0. jacobi_diag empty means no
/// preconditioning, otherwise z = r / d elementwise. One operator apply, one
/// preconditioner apply, two inner products and three vector updates per
/// iteration; inner products use the deterministic blocked reduction, so
/// iteration counts and residuals are bitwise reproducible across pool
/// sizes. Throws on an indefinite direction (p^T A p <= 0, non-SPD
/// operator) and on NaN.
SolveReport pcg(const ApplyFn& apply_op, std::int64_t n,
                std::span<const double> b, std::span<const double> jacobi_diag,
                const PcgOptions& options, std::span<double> x,
                ThreadPool* pool = nullptr);

}  // namespace hexfem
