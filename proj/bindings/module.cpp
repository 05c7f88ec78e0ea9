#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "hexfem/bench.hpp"

namespace py = pybind11;
using namespace hexfem;

namespace {

QuadratureKind parse_kind(const std::string& kind) {
  if (kind == "gauss" || kind == "gauss-legendre") return QuadratureKind::GaussLegendre;
  if (kind == "gll" || kind == "gauss-lobatto" || kind == "gauss-lobatto-legendre")
    return QuadratureKind::GaussLobattoLegendre;
  throw std::invalid_argument("unknown quadrature kind: " + kind);
}

Deformation parse_deformation(const std::string& name) {
  if (name == "none") return Deformation::None;
  if (name == "sine") return Deformation::Sine;
  throw std::invalid_argument("unknown deformation: " + name);
}

BpId parse_bp_or_throw(const std::string& name) {
  const auto bp = parse_bp(name);
  if (!bp) throw std::invalid_argument("unknown problem: " + name + " (expected bp1..bp6)");
  return *bp;
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(py::ssize_t(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> to_matrix(const std::vector<double>& v, py::ssize_t rows,
                              py::ssize_t cols) {
  py::array_t<double> out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_array(const py::array_t<double>& a, std::size_t expected,
                               const char* what) {
  const auto buf = a.request();
  std::vector<double> v(std::size_t(buf.size));
  if (v.size() != expected)
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(expected) + " values, got " +
                                std::to_string(v.size()));
  const auto r = a.unchecked<1>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) v[std::size_t(i)] = r(i);
  return v;
}

struct Problem {
  BpProblem prob;
  std::unique_ptr<ThreadPool> pool;

  std::size_t size() const { return std::size_t(prob.op.size()); }
};

py::dict report_dict(const SolveReport& report) {
  py::dict d;
  d["iterations"] = report.iterations;
  d["converged"] = report.converged;
  d["residual_history"] = to_array(report.residual_history);
  d["apply_time_seconds"] = report.apply_time_seconds;
  d["total_time_seconds"] = report.total_time_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Matrix-free high-order finite element operators and the BP1-BP6 "
            "benchmark problems";

  m.def(
      "quadrature",
      [](const std::string& kind, int q) {
        const auto rule = make_quadrature(parse_kind(kind), q);
        return py::make_tuple(to_array(rule.points), to_array(rule.weights));
      },
      py::arg("kind"), py::arg("q"),
      "1D quadrature rule on [-1, 1]; returns (points, weights)");

  py::class_<TensorBasis>(m, "Basis")
      .def_property_readonly("p", [](const TensorBasis& b) { return b.p; })
      .def_property_readonly("q", [](const TensorBasis& b) { return b.q; })
      .def_property_readonly("collocated",
                             [](const TensorBasis& b) { return b.collocated; })
      .def_property_readonly("nodes", [](const TensorBasis& b) { return to_array(b.nodes); })
      .def_property_readonly("points",
                             [](const TensorBasis& b) { return to_array(b.quad.points); })
      .def_property_readonly("weights",
                             [](const TensorBasis& b) { return to_array(b.quad.weights); })
      .def_property_readonly(
          "interp1d",
          [](const TensorBasis& b) { return to_matrix(b.interp1d, b.q, b.p + 1); })
      .def_property_readonly(
          "grad1d",
          [](const TensorBasis& b) { return to_matrix(b.grad1d, b.q, b.p + 1); });

  m.def(
      "basis",
      [](int p, const std::string& kind, int q) {
        return make_basis(p, make_quadrature(parse_kind(kind), q));
      },
      py::arg("p"), py::arg("kind"), py::arg("q"),
      "Degree-p Lagrange basis on GLL nodes tabulated at a quadrature rule");

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("bp", [](const Problem& p) { return p.prob.config.bp; })
      .def_property_readonly("n", [](const Problem& p) { return p.prob.n_dofs; })
      .def_property_readonly("num_elements",
                             [](const Problem& p) { return p.prob.mesh.num_elements(); })
      .def_property_readonly("num_nodes", [](const Problem& p) { return p.prob.mesh.n_L; })
      .def_property_readonly("components", [](const Problem& p) { return p.prob.m; })
      .def_property_readonly("basis", [](const Problem& p) { return p.prob.basis; })
      .def_property_readonly("rhs", [](const Problem& p) { return to_array(p.prob.rhs); })
      .def_property_readonly(
          "exact", [](const Problem& p) { return to_array(p.prob.exact_nodal); })
      .def(
          "apply",
          [](Problem& p, const py::array_t<double>& x) {
            const auto xv = from_array(x, p.size(), "apply");
            std::vector<double> y(p.size(), 0.0);
            operator_apply(p.prob.op, xv, y, p.pool.get());
            return to_array(y);
          },
          py::arg("x"), "y = (alpha A + beta B) x at L-vector level")
      .def("diagonal",
           [](Problem& p) { return to_array(operator_diagonal(p.prob.op, p.pool.get())); })
      .def("assemble",
           [](const Problem& p) {
             const auto dense = reference_assemble(p.prob.op);
             return to_matrix(dense, py::ssize_t(p.prob.op.size()),
                              py::ssize_t(p.prob.op.size()));
           })
      .def(
          "solve",
          [](Problem& p, double tol, int max_iter, bool jacobi,
             std::optional<int> fixed_iterations) {
            p.prob.config.tol_rel = tol;
            p.prob.config.max_iter = max_iter;
            p.prob.config.fixed_iterations = fixed_iterations;
            const auto result = solve_bp(p.prob, p.pool.get(), jacobi);
            return py::make_tuple(to_array(result.x), report_dict(result.report));
          },
          py::arg("tol") = 1e-8, py::arg("max_iter") = 2000, py::arg("jacobi") = true,
          py::arg("fixed_iterations") = std::nullopt,
          "Jacobi-preconditioned CG solve; returns (x, report)")
      .def(
          "l2_error",
          [](const Problem& p, const py::array_t<double>& u) {
            const auto uv = from_array(u, p.size(), "l2_error");
            return l2_error(p.prob.mesh, p.prob.m, uv, manufactured_solution);
          },
          py::arg("u"), "L2 distance to the manufactured solution");

  m.def(
      "setup",
      [](const std::string& bp, int degree, std::array<int, 3> dims,
         const std::string& deform, int threads) {
        auto p = std::make_unique<Problem>();
        p->pool = std::make_unique<ThreadPool>(threads);
        BpConfig config;
        config.bp = parse_bp_or_throw(bp);
        config.p = degree;
        config.dims = dims;
        config.deformation = parse_deformation(deform);
        config.threads = threads;
        p->prob = bp_setup(config, p->pool.get());
        return p;
      },
      py::arg("bp"), py::arg("degree"), py::arg("dims"), py::arg("deform") = "none",
      py::arg("threads") = 1, "Build mesh, basis, geometric factors and RHS for one BP");

  m.def(
      "run_bench",
      [](const std::string& bp, int degree, std::array<int, 3> dims, int threads,
         int iters, const std::string& deform) {
        BpConfig config;
        config.bp = parse_bp_or_throw(bp);
        config.p = degree;
        config.dims = dims;
        config.deformation = parse_deformation(deform);
        config.threads = threads;
        config.fixed_iterations = iters;
        const auto rec = run_bench(config);
        py::dict d;
        d["bp"] = rec.bp;
        d["p"] = rec.p;
        d["q"] = rec.q;
        d["E"] = rec.E;
        d["n"] = rec.n;
        d["P"] = rec.P;
        d["iterations"] = rec.iterations;
        d["seconds"] = rec.seconds;
        d["dofs_rate"] = rec.dofs_rate;
        d["n_per_rank"] = rec.n_per_rank;
        return d;
      },
      py::arg("bp"), py::arg("degree"), py::arg("dims"), py::arg("threads") = 1,
      py::arg("iters") = 20, py::arg("deform") = "none",
      "Time the CG loop and return the benchmark record");

  m.attr("__version__") = "0.1.0";
}
