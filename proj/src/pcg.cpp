#include "hexfem/pcg.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hexfem {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void parallel_apply(ThreadPool* pool, std::int64_t n,
                    const std::function<void(std::int64_t, std::int64_t, int)>& body) {
  if (pool) pool->parallel_for(n, body); else body(0, n, 0);
}

}  // namespace

SolveReport pcg(const ApplyFn& apply_op, std::int64_t n, std::span<const double> b,
                std::span<const double> jacobi_diag, const PcgOptions& options,
                std::span<double> x, ThreadPool* pool) {
  if (std::int64_t(b.size()) != n || std::int64_t(x.size()) != n)
    throw std::invalid_argument("pcg: vector length mismatch");
  const bool jacobi = !jacobi_diag.empty();
  if (jacobi && std::int64_t(jacobi_diag.size()) != n)
    throw std::invalid_argument("pcg: preconditioner length mismatch");

  const auto t_start = Clock::now();
  SolveReport report;
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(std::size_t(n), 0.0);
  std::vector<double> p(std::size_t(n), 0.0);
  std::vector<double> Ap(std::size_t(n), 0.0);
  std::vector<double> partials;
  std::fill(x.begin(), x.end(), 0.0);

  auto precond = [&] {
    if (jacobi) {
      parallel_apply(pool, n, [&](std::int64_t lo, std::int64_t hi, int) {
        for (std::int64_t i = lo; i < hi; ++i)
          z[std::size_t(i)] = r[std::size_t(i)] / jacobi_diag[std::size_t(i)];
      });
    } else {
      std::copy(r.begin(), r.end(), z.begin());
    }
  };

  const double norm_b = std::sqrt(dot_deterministic(r, r, pool, partials));
  if (!std::isfinite(norm_b)) throw std::runtime_error("pcg: right-hand side is not finite");
  report.residual_history.push_back(norm_b);
  if (norm_b == 0.0) {
    report.converged = true;
    report.total_time_seconds = elapsed_seconds(t_start);
    return report;
  }

  precond();
  std::copy(z.begin(), z.end(), p.begin());
  double rho = dot_deterministic(r, z, pool, partials);

  const int limit = options.fixed_iterations ? *options.fixed_iterations : options.max_iter;
  const double target = options.tol_rel * norm_b;

  for (int it = 1; it <= limit; ++it) {
    const auto t_apply = Clock::now();
    apply_op(p, Ap);
    report.apply_time_seconds += elapsed_seconds(t_apply);

    const double pap = dot_deterministic(p, Ap, pool, partials);
    if (!std::isfinite(pap)) throw std::runtime_error("pcg: NaN in operator apply");
    if (pap <= 0.0) {
      if (rho == 0.0) {  // exact solution already reached
        report.converged = true;
        break;
      }
      throw std::runtime_error("pcg: indefinite direction (p^T A p <= 0), operator is not SPD");
    }
    const double alpha = rho / pap;
    parallel_apply(pool, n, [&](std::int64_t lo, std::int64_t hi, int) {
      for (std::int64_t i = lo; i < hi; ++i) {
        x[std::size_t(i)] += alpha * p[std::size_t(i)];
        r[std::size_t(i)] -= alpha * Ap[std::size_t(i)];
      }
    });
    const double res = std::sqrt(dot_deterministic(r, r, pool, partials));
    if (!std::isfinite(res)) throw std::runtime_error("pcg: residual is not finite");
    report.residual_history.push_back(res);
    if (res <= target) {
      report.converged = true;
      // benchmark mode keeps iterating regardless of the residual
      if (!options.fixed_iterations) break;
    }
    if (it == limit) break;
    if (res == 0.0) break;  // cannot form a new direction, solution is exact

    precond();
    const double rho_new = dot_deterministic(r, z, pool, partials);
    const double beta = rho_new / rho;
    parallel_apply(pool, n, [&](std::int64_t lo, std::int64_t hi, int) {
      for (std::int64_t i = lo; i < hi; ++i)
        p[std::size_t(i)] = z[std::size_t(i)] + beta * p[std::size_t(i)];
    });
    rho = rho_new;
  }

  report.iterations = int(report.residual_history.size()) - 1;
  report.converged = report.converged || report.residual_history.back() <= target;
  report.total_time_seconds = elapsed_seconds(t_start);
  return report;
}

}  // namespace hexfem
