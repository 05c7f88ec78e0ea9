#include "hexfem/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hexfem/bench.hpp"

namespace hexfem {

namespace {

bool parse_dims(const std::string& text, std::array<int, 3>& dims) {
  int nx, ny, nz;
  char c1, c2;
  std::istringstream in(text);
  if (!(in >> nx >> c1 >> ny >> c2 >> nz)) return false;
  if ((c1 != 'x' && c1 != 'X') || (c2 != 'x' && c2 != 'X')) return false;
  if (!in.eof()) return false;
  if (nx < 1 || ny < 1 || nz < 1) return false;
  dims = {nx, ny, nz};
  return true;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

bool parse_deform(const std::string& text, Deformation& def) {
  if (text == "none") { def = Deformation::None; return true; }
  if (text == "sine") { def = Deformation::Sine; return true; }
  return false;
}

bool parse_int(const std::string& text, int& value) {
  try {
    std::size_t pos = 0;
    value = std::stoi(text, &pos);
    return pos == text.size();
  } catch (...) {
    return false;
  }
}

int write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << content;
  return 0;
}

std::string run_record_csv(const BenchRecord& r) {
  std::string out = "bp,p,q,E,n,P,iterations,seconds,dofs_rate,n_per_rank\n";
  out += csv_field(r.bp) + "," + std::to_string(r.p) + "," + std::to_string(r.q) + "," +
         std::to_string(r.E) + "," + std::to_string(r.n) + "," + std::to_string(r.P) +
         "," + std::to_string(r.iterations) + "," + format_double(r.seconds) + "," +
         format_double(r.dofs_rate) + "," + format_double(r.n_per_rank) + "\n";
  return out;
}

std::string sweep_json(const SweepResult& result) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json j;
    j["bp"] = row.record.bp;
    j["p"] = row.record.p;
    j["q"] = row.record.q;
    j["E"] = row.record.E;
    j["n"] = row.record.n;
    j["P"] = row.record.P;
    j["iters"] = row.record.iterations;
    j["seconds"] = row.record.seconds;
    j["dofs_rate"] = row.record.dofs_rate;
    j["n_per_rank"] = row.record.n_per_rank;
    j["eta"] = row.eta;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

double quadrature_moment(const QuadratureRule& rule, int k) {
  double sum = 0;
  for (int i = 0; i < rule.q; ++i)
    sum += rule.weights[std::size_t(i)] * std::pow(rule.points[std::size_t(i)], k);
  return sum;
}

double quadrature_max_error(const QuadratureRule& rule, int max_degree) {
  double worst = 0;
  for (int k = 0; k <= max_degree; ++k) {
    const double exact = k % 2 == 0 ? 2.0 / (k + 1) : 0.0;
    worst = std::max(worst, std::abs(quadrature_moment(rule, k) - exact));
  }
  return worst;
}

int do_quadcheck(int max_q) {
  bool ok = true;
  std::printf("%-22s %3s %9s %12s\n", "rule", "q", "max-k", "max-error");
  for (int q = 1; q <= max_q; ++q) {
    const auto gl = make_quadrature(QuadratureKind::GaussLegendre, q);
    const double egl = quadrature_max_error(gl, 2 * q - 1);
    ok = ok && egl <= 1e-13;
    std::printf("%-22s %3d %9d %12.3e\n", "gauss-legendre", q, 2 * q - 1, egl);
    if (q >= 2) {
      const auto gll = make_quadrature(QuadratureKind::GaussLobattoLegendre, q);
      const double egll = quadrature_max_error(gll, 2 * q - 3);
      ok = ok && egll <= 1e-13;
      std::printf("%-22s %3d %9d %12.3e\n", "gauss-lobatto-legendre", q, 2 * q - 3, egll);
    }
  }
  std::printf("quadcheck: %s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : 1;
}

struct VerifyContext {
  bool all_ok = true;
  void check(const std::string& name, bool ok, double value = NAN) {
    all_ok = all_ok && ok;
    if (std::isnan(value)) {
      std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", name.c_str());
    } else {
      std::printf("  [%s] %s (%.3e)\n", ok ? "ok" : "FAIL", name.c_str(), value);
    }
  }
};

int do_verify(const BpConfig& config) {
  std::printf("verify %s p=%d elems=%dx%dx%d deform=%s\n", bp_name(config.bp), config.p,
              config.dims[0], config.dims[1], config.dims[2],
              config.deformation == Deformation::Sine ? "sine" : "none");
  VerifyContext v;
  ThreadPool pool(config.threads);

  // quadrature rule
  const auto& quad_kind = bp_quadrature_kind(config.bp);
  const int q = bp_quadrature_points(config.bp, config.p);
  const auto rule = make_quadrature(quad_kind, q);
  double wsum = 0;
  for (const double w : rule.weights) wsum += w;
  v.check("quadrature weights sum to 2", std::abs(wsum - 2.0) <= 1e-14,
          std::abs(wsum - 2.0));
  const int exact_k = quad_kind == QuadratureKind::GaussLegendre ? 2 * q - 1 : 2 * q - 3;
  const double qerr = quadrature_max_error(rule, exact_k);
  v.check("quadrature exactness", qerr <= 1e-13, qerr);

  BpConfig cfg = config;
  cfg.fixed_iterations.reset();
  BpProblem prob;
  try {
    prob = bp_setup(cfg, &pool);
  } catch (const std::exception& e) {
    v.check(std::string("problem setup (") + e.what() + ")", false);
    return 1;
  }
  v.check("geometric factors positive", true);

  // basis
  const auto& basis = prob.basis;
  const int nn = basis.p + 1;
  double pou = 0, gsum = 0, gnodes = 0;
  for (int iq = 0; iq < basis.q; ++iq) {
    double s = 0, g = 0, gx = 0;
    for (int j = 0; j < nn; ++j) {
      s += basis.interp1d[std::size_t(iq) * nn + j];
      g += basis.grad1d[std::size_t(iq) * nn + j];
      gx += basis.grad1d[std::size_t(iq) * nn + j] * basis.nodes[std::size_t(j)];
    }
    pou = std::max(pou, std::abs(s - 1.0));
    gsum = std::max(gsum, std::abs(g));
    gnodes = std::max(gnodes, std::abs(gx - 1.0));
  }
  v.check("basis partition of unity", pou <= 1e-13, pou);
  v.check("basis derivative rows sum to 0", gsum <= 1e-12, gsum);
  v.check("basis differentiates x exactly", gnodes <= 1e-12, gnodes);
  if (int(config.bp) >= 5) {
    bool identity = true;
    for (int iq = 0; iq < basis.q && identity; ++iq)
      for (int j = 0; j < nn; ++j)
        if (basis.interp1d[std::size_t(iq) * nn + j] != (iq == j ? 1.0 : 0.0)) {
          identity = false;
          break;
        }
    v.check("collocated interpolation is the identity", identity);
  }

  const std::int64_t n = prob.op.size();
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  // operator symmetry
  {
    std::vector<double> xv(std::size_t(n), 0.0), yv(std::size_t(n), 0.0), Ax(std::size_t(n), 0.0),
        Ay(std::size_t(n), 0.0);
    for (auto& t : xv) t = dist(rng);
    for (auto& t : yv) t = dist(rng);
    operator_apply(prob.op, xv, Ax, &pool);
    operator_apply(prob.op, yv, Ay, &pool);
    double axy = 0, xay = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      axy += Ax[std::size_t(i)] * yv[std::size_t(i)];
      xay += xv[std::size_t(i)] * Ay[std::size_t(i)];
    }
    const double rel = std::abs(axy - xay) / std::max(std::abs(axy), 1e-300);
    v.check("operator symmetry", rel <= 1e-12, rel);
  }

  // structural identity for the pointwise stage
  {
    MatFreeOperator unconstrained =
        make_operator(prob.op.restriction, prob.op.basis, prob.op.alpha, prob.op.beta,
                      prob.op.mass_qdata, prob.op.diff_qdata, {});
    std::vector<double> ones(std::size_t(n), 1.0);
    std::vector<double> out(std::size_t(n), 0.0);
    operator_apply(unconstrained, ones, out, &pool);
    if (prob.op.beta > 0) {
      double total = 0;
      for (std::int64_t i = 0; i < prob.mesh.n_L; ++i) total += out[std::size_t(i)];
      v.check("mass of unit field is the domain volume", std::abs(total - 1.0) <= 1e-10,
              std::abs(total - 1.0));
    } else {
      const auto diag = operator_diagonal(unconstrained, &pool);
      double dmax = 0, ymax = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        dmax = std::max(dmax, std::abs(diag[std::size_t(i)]));
        ymax = std::max(ymax, std::abs(out[std::size_t(i)]));
      }
      v.check("stiffness annihilates constants", ymax <= 1e-11 * dmax, ymax / dmax);
    }
  }

  // dense oracle
  if (n <= 20000) {
    const auto dense = reference_assemble(prob.op);
    std::vector<double> xv(std::size_t(n), 0.0), y_mf(std::size_t(n), 0.0), y_dense(std::size_t(n), 0.0);
    double rel_worst = 0;
    for (int trial = 0; trial < 3; ++trial) {
      for (auto& t : xv) t = dist(rng);
      operator_apply(prob.op, xv, y_mf, &pool);
      double scale = 0, diff = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        double s = 0;
        const double* row = dense.data() + std::size_t(i) * std::size_t(n);
        for (std::int64_t j = 0; j < n; ++j) s += row[std::size_t(j)] * xv[std::size_t(j)];
        y_dense[std::size_t(i)] = s;
        scale = std::max(scale, std::abs(s));
        diff = std::max(diff, std::abs(s - y_mf[std::size_t(i)]));
      }
      rel_worst = std::max(rel_worst, diff / std::max(scale, 1e-300));
    }
    v.check("matrix-free apply matches dense assembly", rel_worst <= 1e-12, rel_worst);

    const auto diag = operator_diagonal(prob.op, &pool);
    double dscale = 0, ddiff = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double a = dense[std::size_t(i) * std::size_t(n) + std::size_t(i)];
      dscale = std::max(dscale, std::abs(a));
      ddiff = std::max(ddiff, std::abs(a - diag[std::size_t(i)]));
    }
    v.check("diagonal matches dense assembly", ddiff <= 1e-12 * dscale, ddiff / dscale);
  } else {
    std::printf("  [--] dense oracle skipped (m*n_L = %lld > 20000)\n",
                (long long)n);
  }

  // solve
  {
    if (prob.op.beta > 0) {
      // The achievable error per unit residual is limited by the spread of
      // the Jacobi-scaled mass spectrum; solve deeper when it is wide.
      const auto diag = operator_diagonal(prob.op, &pool);
      double dmin = diag[0], dmax = diag[0];
      for (const double d : diag) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
      }
      const double kappa = dmax / dmin;
      prob.config.tol_rel = std::max(cfg.tol_rel / kappa, 1e-13);
    }
    BpSolveResult solve = solve_bp(prob, &pool);
    v.check("cg converged", solve.report.converged);
    if (prob.op.beta > 0) {
      double emax = 0;
      for (std::int64_t i = 0; i < n; ++i)
        emax = std::max(emax,
                        std::abs(solve.x[std::size_t(i)] - prob.exact_nodal[std::size_t(i)]));
      v.check("mass solve returns the interpolated field", emax <= 10 * cfg.tol_rel, emax);
    } else {
      const double err = l2_error(prob.mesh, prob.m, solve.x, manufactured_solution);
      v.check("discretization error is finite", std::isfinite(err), err);
    }
  }

  std::printf("verify: %s\n", v.all_ok ? "pass" : "FAIL");
  return v.all_ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"matrix-free high-order operator benchmarks (BP1-BP6)"};
  app.require_subcommand(1);

  std::string bp_str = "bp1";
  int degree = 1;
  std::string elems_str;
  std::string threads_str = "1";
  std::string deform_str = "none";
  int iters = 20;
  double tol = 1e-8;
  int max_iter = 2000;
  std::string mode_str = "bench";
  std::string out_path;
  std::string format;
  int max_q = 10;

  auto add_problem_flags = [&](CLI::App* cmd, bool elems_required) {
    cmd->add_option("--bp", bp_str, "problem id: bp1..bp6")->required();
    cmd->add_option("--degree", degree, "polynomial degree p >= 1")->required();
    auto* e = cmd->add_option("--elems", elems_str, "elements per axis, NXxNYxNZ");
    if (elems_required) e->required();
    cmd->add_option("--deform", deform_str, "mesh deformation: none|sine");
    cmd->add_option("--tol", tol, "relative CG tolerance");
    cmd->add_option("--max-iter", max_iter, "CG iteration cap in solve mode");
  };

  auto* run_cmd = app.add_subcommand("run", "run one benchmark and emit its record");
  add_problem_flags(run_cmd, true);
  run_cmd->add_option("--threads", threads_str, "worker threads P");
  run_cmd->add_option("--iters", iters, "fixed CG iteration count in bench mode");
  run_cmd->add_option("--mode", mode_str, "bench (fixed iterations) or solve");
  run_cmd->add_option("--out", out_path, "output file (default stdout)");
  run_cmd->add_option("--format", format, "json|csv (default json)");

  auto* sweep_cmd = app.add_subcommand("sweep", "scaling sweep over sizes and threads");
  add_problem_flags(sweep_cmd, true);
  sweep_cmd->add_option("--threads", threads_str, "comma list of worker counts, must include 1");
  sweep_cmd->add_option("--iters", iters, "fixed CG iteration count");
  sweep_cmd->add_option("--out", out_path, "output file (default stdout)");
  sweep_cmd->add_option("--format", format, "csv|json (default csv)");

  auto* verify_cmd = app.add_subcommand("verify", "run the oracle and identity checks");
  add_problem_flags(verify_cmd, true);
  verify_cmd->add_option("--threads", threads_str, "worker threads P");

  auto* quad_cmd = app.add_subcommand("quadcheck", "quadrature exactness report");
  quad_cmd->add_option("--max-q", max_q, "largest point count to check");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (quad_cmd->parsed()) return do_quadcheck(max_q);

    BpConfig config;
    const auto bp = parse_bp(bp_str);
    if (!bp) {
      std::cerr << "error: unknown problem '" << bp_str << "' (expected bp1..bp6)\n";
      return 2;
    }
    config.bp = *bp;
    config.p = degree;
    if (degree < 1) {
      std::cerr << "error: --degree must be >= 1\n";
      return 2;
    }
    if (!parse_deform(deform_str, config.deformation)) {
      std::cerr << "error: unknown deformation '" << deform_str << "'\n";
      return 2;
    }
    config.tol_rel = tol;
    config.max_iter = max_iter;

    if (verify_cmd->parsed() || run_cmd->parsed()) {
      if (!parse_dims(elems_str, config.dims)) {
        std::cerr << "error: bad --elems '" << elems_str << "' (expected NXxNYxNZ)\n";
        return 2;
      }
      int threads = 1;
      if (!parse_int(threads_str, threads) || threads < 1) {
        std::cerr << "error: bad --threads '" << threads_str << "'\n";
        return 2;
      }
      config.threads = threads;
    }

    if (verify_cmd->parsed()) return do_verify(config);

    if (run_cmd->parsed()) {
      if (mode_str == "bench") {
        config.fixed_iterations = iters;
      } else if (mode_str == "solve") {
        config.fixed_iterations.reset();
      } else {
        std::cerr << "error: unknown mode '" << mode_str << "'\n";
        return 2;
      }
      if (format.empty()) format = "json";
      if (format != "json" && format != "csv") {
        std::cerr << "error: unknown format '" << format << "'\n";
        return 2;
      }
      const BenchRecord rec = run_bench(config);
      const std::string text =
          format == "json" ? bench_record_json(rec) + "\n" : run_record_csv(rec);
      return write_output(out_path, text);
    }

    // sweep
    std::vector<std::array<int, 3>> dims_list;
    for (const auto& part : split(elems_str, ',')) {
      std::array<int, 3> dims;
      if (!parse_dims(part, dims)) {
        std::cerr << "error: bad --elems entry '" << part << "'\n";
        return 2;
      }
      dims_list.push_back(dims);
    }
    std::vector<int> threads_list;
    for (const auto& part : split(threads_str, ',')) {
      int value = 0;
      if (!parse_int(part, value) || value < 1) {
        std::cerr << "error: bad --threads entry '" << part << "'\n";
        return 2;
      }
      threads_list.push_back(value);
    }
    if (std::find(threads_list.begin(), threads_list.end(), 1) == threads_list.end()) {
      std::cerr << "error: --threads must include 1 (the efficiency baseline)\n";
      return 2;
    }
    if (format.empty()) format = "csv";
    if (format != "json" && format != "csv") {
      std::cerr << "error: unknown format '" << format << "'\n";
      return 2;
    }
    const SweepResult result = run_scaling_sweep(
        config.bp, config.p, dims_list, threads_list, iters, config.deformation);
    const std::string text = format == "csv" ? sweep_csv(result) : sweep_json(result);
    const int rc = write_output(out_path, text);
    std::cerr << "r_max (per worker): " << format_double(result.summary.r_max) << "\n";
    if (result.summary.n08_per_rank) {
      std::cerr << "n_0.8 (points per worker): "
                << format_double(*result.summary.n08_per_rank) << "\n";
    } else {
      std::cerr << "n_0.8: unavailable (no bracketing points)\n";
    }
    std::cerr << "work constant C: " << format_double(result.summary.work_constant)
              << "\n";
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("bpbench");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(int(argv.size()), argv.data());
}

}  // namespace hexfem
