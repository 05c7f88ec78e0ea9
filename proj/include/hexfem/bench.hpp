#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hexfem/operator.hpp"
#include "hexfem/pcg.hpp"

namespace hexfem {

/// Benchmark problems: odd ids are scalar (m=1), even are vector (m=3).
/// BP1/BP2 solve the mass system (alpha=0, beta=1) with Gauss-Legendre
/// quadrature q=p+2 and no constraints; BP3/BP4 the Poisson system
/// (alpha=1, beta=0) with the same rule and homogeneous Dirichlet
/// constraints; BP5/BP6 the Poisson system collocated on the (p+1) GLL
/// points.
enum class BpId { BP1 = 1, BP2, BP3, BP4, BP5, BP6 };

const char* bp_name(BpId bp);
std::optional<BpId> parse_bp(const std::string& name);
int bp_components(BpId bp);
int bp_quadrature_points(BpId bp, int p);
QuadratureKind bp_quadrature_kind(BpId bp);
double bp_alpha(BpId bp);
double bp_beta(BpId bp);
bool bp_has_constraints(BpId bp);

/// Total dofs n = m * unconstrained scalar nodes, in closed form.
std::int64_t bp_dof_count(BpId bp, int p, std::array<int, 3> dims);

struct BpConfig {
  BpId bp = BpId::BP1;
  int p = 1;
  std::array<int, 3> dims{1, 1, 1};
  Deformation deformation = Deformation::None;
  int threads = 1;
  /// Benchmark mode runs exactly this many CG iterations; nullopt solves to
  /// tol_rel.
  std::optional<int> fixed_iterations = 20;
  double tol_rel = 1e-8;
  int max_iter = 2000;
};

struct BpProblem {
  BpConfig config;
  HexMesh mesh;
  TensorBasis basis;
  MatFreeOperator op;
  std::vector<double> rhs;          // B f, constrained entries zeroed
  std::vector<double> exact_nodal;  // nodal interpolant of the exact field
  int m = 1;
  std::int64_t n_dofs = 0;
};

/// u*(x,y,z) = sin(pi x) sin(pi y) sin(pi z); satisfies -lap u = 3 pi^2 u
/// with u = 0 on the boundary of the unit cube.
double manufactured_solution(double x, double y, double z);
double manufactured_rhs(double x, double y, double z);  // 3 pi^2 u*

BpProblem bp_setup(const BpConfig& config, ThreadPool* pool = nullptr);

struct BpSolveResult {
  std::vector<double> x;
  SolveReport report;
};
BpSolveResult solve_bp(const BpProblem& problem, ThreadPool* pool = nullptr,
                       bool jacobi = true);

/// sqrt( sum_e sum_q w det(J) * sum_c (u_h,c(x_q) - exact(x_q))^2 ),
/// always evaluated with the Gauss-Legendre q=p+2 rule.
double l2_error(const HexMesh& mesh, int m, std::span<const double> u_h,
                const std::function<double(double, double, double)>& exact);

struct BenchRecord {
  std::string bp;
  int p = 0;
  int q = 0;
  std::int64_t E = 0;
  std::int64_t n = 0;       // m * unconstrained scalar dofs
  int P = 1;                // worker count (the rank analog)
  int iterations = 0;
  double seconds = 0;       // CG loop wall time, min of 3 repetitions
  double dofs_rate = 0;     // double(n) * iterations / seconds
  double n_per_rank = 0;    // double(n) / P
};

/// Runs one benchmark: setup, diagonal and RHS are excluded from timing;
/// the CG loop is repeated 3 times and the minimum time recorded (a single
/// run in solve mode).
BenchRecord run_bench(const BpConfig& config);

struct ScalingRow {
  BenchRecord record;
  double T_1 = 0;  // seconds at P=1, same problem size
  double T_P = 0;
  double eta = 0;  // T_1 / (P * T_P)
};

struct ScalingSummary {
  double r_max = 0;  // max observed dofs_rate per worker
  /// Smallest n/P with eta >= 0.8, interpolated linearly in log(n/P);
  /// unset when no two sweep points bracket the crossing.
  std::optional<double> n08_per_rank;
  double work_constant = 0;  // C fitted from t = C*n/(eta*P*r_max)
};

struct SweepResult {
  std::vector<ScalingRow> rows;  // sorted by n/P ascending
  ScalingSummary summary;
};

/// Test hook: when set, replaces measurement with model(n, P) seconds and
/// skips problem construction entirely.
using TimingModel = std::function<double(std::int64_t n, int P)>;

SweepResult run_scaling_sweep(BpId bp, int p,
                              std::span<const std::array<int, 3>> dims_list,
                              std::span<const int> threads_list, int iterations,
                              Deformation deformation = Deformation::None,
                              const TimingModel& timing_override = {});

/// t = C * n / (eta * P * r_max), the strong-scale time-to-solution model.
double time_to_solution(double work_constant, double n, double eta, double P,
                        double r_max);

/// Shortest round-trip decimal form (used for CSV fields).
std::string format_double(double v);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

std::string bench_record_json(const BenchRecord& rec);
std::string sweep_csv_header();
std::string sweep_csv(const SweepResult& result);

}  // namespace hexfem
