#include "hexfem/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace hexfem {

const char* bp_name(BpId bp) {
  switch (bp) {
    case BpId::BP1: return "bp1";
    case BpId::BP2: return "bp2";
    case BpId::BP3: return "bp3";
    case BpId::BP4: return "bp4";
    case BpId::BP5: return "bp5";
    case BpId::BP6: return "bp6";
  }
  return "?";
}

std::optional<BpId> parse_bp(const std::string& name) {
  for (int i = 1; i <= 6; ++i) {
    if (name == bp_name(BpId(i))) return BpId(i);
  }
  return std::nullopt;
}

int bp_components(BpId bp) { return int(bp) % 2 == 1 ? 1 : 3; }

int bp_quadrature_points(BpId bp, int p) {
  return int(bp) <= 4 ? p + 2 : p + 1;
}

QuadratureKind bp_quadrature_kind(BpId bp) {
  return int(bp) <= 4 ? QuadratureKind::GaussLegendre
                      : QuadratureKind::GaussLobattoLegendre;
}

double bp_alpha(BpId bp) { return int(bp) <= 2 ? 0.0 : 1.0; }
double bp_beta(BpId bp) { return int(bp) <= 2 ? 1.0 : 0.0; }
bool bp_has_constraints(BpId bp) { return int(bp) >= 3; }

std::int64_t bp_dof_count(BpId bp, int p, std::array<int, 3> dims) {
  std::int64_t count = 1;
  for (int d = 0; d < 3; ++d) {
    const std::int64_t axis = std::int64_t(dims[std::size_t(d)]) * p + 1;
    count *= bp_has_constraints(bp) ? axis - 2 : axis;
  }
  return count * bp_components(bp);
}

double manufactured_solution(double x, double y, double z) {
  return std::sin(M_PI * x) * std::sin(M_PI * y) * std::sin(M_PI * z);
}

double manufactured_rhs(double x, double y, double z) {
  return 3.0 * M_PI * M_PI * manufactured_solution(x, y, z);
}

BpProblem bp_setup(const BpConfig& config, ThreadPool* pool) {
  if (config.p < 1) throw std::invalid_argument("bp_setup: p must be >= 1");
  for (int d : config.dims)
    if (d < 1) throw std::invalid_argument("bp_setup: element counts must be >= 1");

  BpProblem prob;
  prob.config = config;
  prob.m = bp_components(config.bp);
  const int q = bp_quadrature_points(config.bp, config.p);

  prob.mesh = build_mesh(config.dims[0], config.dims[1], config.dims[2], config.p,
                         config.deformation);
  prob.basis = make_basis(config.p, make_quadrature(bp_quadrature_kind(config.bp), q));
  ElemRestriction restr = make_restriction(prob.mesh, prob.m);

  const double alpha = bp_alpha(config.bp);
  const double beta = bp_beta(config.bp);
  QData mass_qd = compute_qdata(prob.mesh, prob.basis, QDataKind::Mass, pool);
  std::optional<QData> diff_qd;
  if (alpha > 0)
    diff_qd = compute_qdata(prob.mesh, prob.basis, QDataKind::Diffusion, pool);

  std::vector<std::int64_t> constrained;
  if (bp_has_constraints(config.bp)) constrained = prob.mesh.boundary_nodes;

  // b = B f with f interpolated at the mesh nodes; the mass apply uses the
  // same basis and quadrature as the system operator.
  const std::int64_t n_L = prob.mesh.n_L;
  std::vector<double> f_nodal(std::size_t(prob.m) * n_L);
  prob.exact_nodal.assign(std::size_t(prob.m) * n_L, 0.0);
  const bool poisson = alpha > 0;
  for (std::int64_t i = 0; i < n_L; ++i) {
    const double x = prob.mesh.coords[std::size_t(i)];
    const double y = prob.mesh.coords[std::size_t(n_L + i)];
    const double z = prob.mesh.coords[std::size_t(2 * n_L + i)];
    const double u = manufactured_solution(x, y, z);
    const double f = poisson ? manufactured_rhs(x, y, z) : u;
    for (int c = 0; c < prob.m; ++c) {
      f_nodal[std::size_t(c * n_L + i)] = f;
      prob.exact_nodal[std::size_t(c * n_L + i)] = u;
    }
  }
  MatFreeOperator mass_op =
      make_operator(restr, prob.basis, 0.0, 1.0, mass_qd, std::nullopt, {});
  prob.rhs.assign(std::size_t(prob.m) * n_L, 0.0);
  operator_apply(mass_op, f_nodal, prob.rhs, pool);
  for (int c = 0; c < prob.m; ++c)
    for (const std::int64_t i : constrained) prob.rhs[std::size_t(c * n_L + i)] = 0.0;

  prob.op = make_operator(std::move(restr), prob.basis, alpha, beta,
                          beta > 0 ? std::optional<QData>(std::move(mass_qd)) : std::nullopt,
                          std::move(diff_qd), std::move(constrained));
  prob.n_dofs = std::int64_t(prob.m) *
                (n_L - std::int64_t(prob.op.constrained.size()));
  return prob;
}

BpSolveResult solve_bp(const BpProblem& problem, ThreadPool* pool, bool jacobi) {
  BpSolveResult result;
  result.x.assign(problem.rhs.size(), 0.0);
  std::vector<double> diag;
  if (jacobi) diag = operator_diagonal(problem.op, pool);
  OperatorScratch scratch;
  const ApplyFn apply = [&](std::span<const double> in, std::span<double> out) {
    operator_apply(problem.op, in, out, pool, &scratch);
  };
  PcgOptions opts;
  opts.tol_rel = problem.config.tol_rel;
  opts.max_iter = problem.config.max_iter;
  opts.fixed_iterations = problem.config.fixed_iterations;
  result.report = pcg(apply, std::int64_t(problem.rhs.size()), problem.rhs, diag, opts,
                      result.x, pool);
  return result;
}

double l2_error(const HexMesh& mesh, int m, std::span<const double> u_h,
                const std::function<double(double, double, double)>& exact) {
  const int p = mesh.p;
  const TensorBasis eb =
      make_basis(p, make_quadrature(QuadratureKind::GaussLegendre, p + 2));
  const QData qd = compute_qdata(mesh, eb, QDataKind::Mass);
  const ElemRestriction restr = make_restriction(mesh, 1);
  const std::int64_t E = restr.num_elements;
  const std::int64_t S = restr.elem_size;
  const std::int64_t nq = eb.num_qpts();
  const std::int64_t n_L = mesh.n_L;
  if (std::int64_t(u_h.size()) != std::int64_t(m) * n_L)
    throw std::invalid_argument("l2_error: solution length mismatch");

  KernelPlan plan;
  plan.p = p;
  plan.q = eb.q;
  ContractionScratch chain;
  std::vector<double> nodal(std::size_t(S), 0.0);
  std::vector<double> uq(std::size_t(nq), 0.0);
  std::array<std::vector<double>, 3> xq;
  for (auto& v : xq) v.resize(std::size_t(nq));
  std::vector<double> diff2(std::size_t(nq), 0.0);

  double err2 = 0.0;
  for (std::int64_t e = 0; e < E; ++e) {
    const std::int64_t* idx = restr.indices.data() + e * S;
    for (int a = 0; a < 3; ++a) {
      for (std::int64_t s = 0; s < S; ++s)
        nodal[std::size_t(s)] = mesh.coords[std::size_t(a * n_L + idx[s])];
      apply_basis_batch(plan, eb, EvalMode::Interp, EvalDirection::Forward, 1, nodal,
                        xq[std::size_t(a)], chain);
    }
    std::fill(diff2.begin(), diff2.end(), 0.0);
    for (int c = 0; c < m; ++c) {
      for (std::int64_t s = 0; s < S; ++s)
        nodal[std::size_t(s)] = u_h[std::size_t(c * n_L + idx[s])];
      apply_basis_batch(plan, eb, EvalMode::Interp, EvalDirection::Forward, 1, nodal, uq,
                        chain);
      for (std::int64_t qi = 0; qi < nq; ++qi) {
        const double d = uq[std::size_t(qi)] -
                         exact(xq[0][std::size_t(qi)], xq[1][std::size_t(qi)],
                               xq[2][std::size_t(qi)]);
        diff2[std::size_t(qi)] += d * d;
      }
    }
    for (std::int64_t qi = 0; qi < nq; ++qi)
      err2 += qd.values[std::size_t(e * nq + qi)] * diff2[std::size_t(qi)];
  }
  return std::sqrt(err2);
}

BenchRecord run_bench(const BpConfig& config) {
  if (config.threads < 1) throw std::invalid_argument("run_bench: threads must be >= 1");
  ThreadPool pool(config.threads);
  BpProblem prob = bp_setup(config, &pool);
  std::vector<double> diag = operator_diagonal(prob.op, &pool);

  OperatorScratch scratch;
  const ApplyFn apply = [&](std::span<const double> in, std::span<double> out) {
    operator_apply(prob.op, in, out, &pool, &scratch);
  };
  PcgOptions opts;
  opts.tol_rel = config.tol_rel;
  opts.max_iter = config.max_iter;
  opts.fixed_iterations = config.fixed_iterations;

  const std::int64_t n_vec = std::int64_t(prob.rhs.size());
  std::vector<double> x(prob.rhs.size());
  const int reps = config.fixed_iterations ? 3 : 1;
  double seconds = std::numeric_limits<double>::infinity();
  int iterations = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const SolveReport report = pcg(apply, n_vec, prob.rhs, diag, opts, x, &pool);
    seconds = std::min(seconds, report.total_time_seconds);
    iterations = report.iterations;
  }

  BenchRecord rec;
  rec.bp = bp_name(config.bp);
  rec.p = config.p;
  rec.q = prob.basis.q;
  rec.E = prob.mesh.num_elements();
  rec.n = prob.n_dofs;
  rec.P = config.threads;
  rec.iterations = iterations;
  rec.seconds = seconds;
  rec.dofs_rate = double(rec.n) * rec.iterations / rec.seconds;
  rec.n_per_rank = double(rec.n) / rec.P;
  return rec;
}

SweepResult run_scaling_sweep(BpId bp, int p,
                              std::span<const std::array<int, 3>> dims_list,
                              std::span<const int> threads_list, int iterations,
                              Deformation deformation,
                              const TimingModel& timing_override) {
  if (std::find(threads_list.begin(), threads_list.end(), 1) == threads_list.end())
    throw std::invalid_argument("run_scaling_sweep: threads list must include 1");

  SweepResult result;
  for (const auto& dims : dims_list) {
    std::vector<BenchRecord> group;
    for (const int P : threads_list) {
      BenchRecord rec;
      if (timing_override) {
        rec.bp = bp_name(bp);
        rec.p = p;
        rec.q = bp_quadrature_points(bp, p);
        rec.E = std::int64_t(dims[0]) * dims[1] * dims[2];
        rec.n = bp_dof_count(bp, p, dims);
        rec.P = P;
        rec.iterations = iterations;
        rec.seconds = timing_override(rec.n, P);
        rec.dofs_rate = double(rec.n) * rec.iterations / rec.seconds;
        rec.n_per_rank = double(rec.n) / rec.P;
      } else {
        BpConfig config;
        config.bp = bp;
        config.p = p;
        config.dims = dims;
        config.deformation = deformation;
        config.threads = P;
        config.fixed_iterations = iterations;
        rec = run_bench(config);
      }
      group.push_back(rec);
    }
    double t1 = 0;
    for (const auto& rec : group)
      if (rec.P == 1) t1 = rec.seconds;
    for (auto& rec : group) {
      ScalingRow row;
      row.T_1 = t1;
      row.T_P = rec.seconds;
      row.eta = t1 / (rec.P * rec.seconds);
      row.record = std::move(rec);
      result.rows.push_back(std::move(row));
    }
  }

  std::sort(result.rows.begin(), result.rows.end(),
            [](const ScalingRow& a, const ScalingRow& b) {
              if (a.record.n_per_rank != b.record.n_per_rank)
                return a.record.n_per_rank < b.record.n_per_rank;
              if (a.record.n != b.record.n) return a.record.n < b.record.n;
              return a.record.P < b.record.P;
            });

  auto& summary = result.summary;
  summary.r_max = 0;
  for (const auto& row : result.rows)
    summary.r_max = std::max(summary.r_max, row.record.dofs_rate / row.record.P);

  // Crossing scan over the P > 1 rows (P = 1 rows have eta = 1 by
  // definition and carry no scaling information).
  std::vector<const ScalingRow*> scaling; // sorted by n/P already
  for (const auto& row : result.rows)
    if (row.record.P > 1) scaling.push_back(&row);
  for (std::size_t i = 1; i < scaling.size(); ++i) {
    const double eta0 = scaling[i - 1]->eta;
    const double eta1 = scaling[i]->eta;
    if (eta0 < 0.8 && eta1 >= 0.8) {
      const double x0 = std::log(scaling[i - 1]->record.n_per_rank);
      const double x1 = std::log(scaling[i]->record.n_per_rank);
      const double t = (0.8 - eta0) / (eta1 - eta0);
      summary.n08_per_rank = std::exp(x0 + t * (x1 - x0));
      break;
    }
  }

  double num = 0, den = 0;
  if (summary.r_max > 0) {
    for (const auto& row : result.rows) {
      const double xi =
          double(row.record.n) / (row.eta * row.record.P * summary.r_max);
      num += row.T_P * xi;
      den += xi * xi;
    }
  }
  summary.work_constant = den > 0 ? num / den : 0.0;
  return result;
}

double time_to_solution(double work_constant, double n, double eta, double P,
                        double r_max) {
  return work_constant * n / (eta * P * r_max);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string bench_record_json(const BenchRecord& rec) {
  nlohmann::ordered_json j;
  j["bp"] = rec.bp;
  j["p"] = rec.p;
  j["q"] = rec.q;
  j["E"] = rec.E;
  j["n"] = rec.n;
  j["P"] = rec.P;
  j["iterations"] = rec.iterations;
  j["seconds"] = rec.seconds;
  j["dofs_rate"] = rec.dofs_rate;
  j["n_per_rank"] = rec.n_per_rank;
  return j.dump();
}

std::string sweep_csv_header() {
  return "bp,p,q,E,n,P,iters,seconds,dofs_rate,n_per_rank,eta";
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = sweep_csv_header() + "\n";
  for (const auto& row : result.rows) {
    const BenchRecord& r = row.record;
    out += csv_field(r.bp) + ",";
    out += std::to_string(r.p) + ",";
    out += std::to_string(r.q) + ",";
    out += std::to_string(r.E) + ",";
    out += std::to_string(r.n) + ",";
    out += std::to_string(r.P) + ",";
    out += std::to_string(r.iterations) + ",";
    out += format_double(r.seconds) + ",";
    out += format_double(r.dofs_rate) + ",";
    out += format_double(r.n_per_rank) + ",";
    out += format_double(row.eta) + "\n";
  }
  return out;
}

}  // namespace hexfem
