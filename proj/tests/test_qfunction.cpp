#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hexfem/qfunction.hpp"
#include "hexfem/restriction.hpp"
#include "oracle_helpers.hpp"

using namespace hexfem;
using namespace hexfem::testing;

TEST_CASE("affine unit cube: mass factors are the tensor weights over 8") {
  const auto mesh = build_mesh(1, 1, 1, 1, Deformation::None);
  const auto basis = make_basis(1, make_quadrature(QuadratureKind::GaussLegendre, 3));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Mass);
  const auto& w = basis.quad.weights;
  int qi = 0;
  for (int c = 0; c < 3; ++c)
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a, ++qi) {
        const double expect = w[std::size_t(a)] * w[std::size_t(b)] * w[std::size_t(c)] / 8.0;
        CHECK(qd.values[std::size_t(qi)] == doctest::Approx(expect).epsilon(1e-14));
      }
}

TEST_CASE("affine unit cube: diffusion factors are w/2 on the diagonal") {
  const auto mesh = build_mesh(1, 1, 1, 1, Deformation::None);
  const auto basis = make_basis(1, make_quadrature(QuadratureKind::GaussLegendre, 2));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Diffusion);
  const int nq = qd.nq;
  const auto& w = basis.quad.weights;
  int qi = 0;
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a, ++qi) {
        const double wq = w[std::size_t(a)] * w[std::size_t(b)] * w[std::size_t(c)];
        // upper triangle order 00,01,02,11,12,22
        CHECK(qd.values[std::size_t(0 * nq + qi)] == doctest::Approx(wq / 2).epsilon(1e-14));
        CHECK(qd.values[std::size_t(3 * nq + qi)] == doctest::Approx(wq / 2).epsilon(1e-14));
        CHECK(qd.values[std::size_t(5 * nq + qi)] == doctest::Approx(wq / 2).epsilon(1e-14));
        CHECK(std::abs(qd.values[std::size_t(1 * nq + qi)]) <= 1e-16);
        CHECK(std::abs(qd.values[std::size_t(2 * nq + qi)]) <= 1e-16);
        CHECK(std::abs(qd.values[std::size_t(4 * nq + qi)]) <= 1e-16);
      }
}

TEST_CASE("axis-scaled element: diffusion block is w*(h/2)*I") {
  const auto mesh = build_mesh(2, 2, 2, 1, Deformation::None);
  const auto basis = make_basis(1, make_quadrature(QuadratureKind::GaussLegendre, 2));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Diffusion);
  const int nq = qd.nq;
  const auto& w = basis.quad.weights;
  int qi = 0;
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a, ++qi) {
        const double wq = w[std::size_t(a)] * w[std::size_t(b)] * w[std::size_t(c)];
        CHECK(qd.values[std::size_t(qi)] == doctest::Approx(wq * 0.25).epsilon(1e-14));
      }
}

TEST_CASE("mass factors are positive and sum to the volume") {
  for (const auto deform : {Deformation::None, Deformation::Sine}) {
    for (int p : {1, 2, 3, 4}) {
      CAPTURE(p);
      const auto mesh = build_mesh(2, 2, 2, p, deform);
      const auto basis =
          make_basis(p, make_quadrature(QuadratureKind::GaussLegendre, p + 2));
      const auto qd = compute_qdata(mesh, basis, QDataKind::Mass);
      double vol = 0;
      for (const double v : qd.values) {
        CHECK(v > 0.0);
        vol += v;
      }
      CHECK(std::abs(vol - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("collocated rule also reproduces the volume") {
  const auto mesh = build_mesh(2, 2, 2, 3, Deformation::Sine);
  const auto basis =
      make_basis(3, make_quadrature(QuadratureKind::GaussLobattoLegendre, 4));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Mass);
  const double vol = std::accumulate(qd.values.begin(), qd.values.end(), 0.0);
  CHECK(std::abs(vol - 1.0) <= 1e-10);
}

TEST_CASE("diffusion blocks are symmetric positive definite") {
  const auto mesh = build_mesh(2, 2, 2, 3, Deformation::Sine);
  const auto basis = make_basis(3, make_quadrature(QuadratureKind::GaussLegendre, 5));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Diffusion);
  const int nq = qd.nq;
  for (std::int64_t e = 0; e < qd.num_elements; ++e) {
    for (int qi = 0; qi < nq; qi += 7) {
      const auto at = [&](int s) { return qd.values[std::size_t((e * 6 + s) * nq + qi)]; };
      // Cholesky of [[s00,s01,s02],[s01,s11,s12],[s02,s12,s22]]
      const double l00 = std::sqrt(at(0));
      REQUIRE(at(0) > 0.0);
      const double l10 = at(1) / l00;
      const double l20 = at(2) / l00;
      const double d11 = at(3) - l10 * l10;
      REQUIRE(d11 > 0.0);
      const double l11 = std::sqrt(d11);
      const double l21 = (at(4) - l20 * l10) / l11;
      const double d22 = at(5) - l20 * l20 - l21 * l21;
      REQUIRE(d22 > 0.0);
    }
  }
}

TEST_CASE("pointwise mass action") {
  const auto mesh = build_mesh(2, 1, 1, 2, Deformation::Sine);
  const auto basis = make_basis(2, make_quadrature(QuadratureKind::GaussLegendre, 4));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Mass);
  const std::size_t n = std::size_t(qd.num_elements) * std::size_t(qd.nq);
  std::vector<double> u(n), v(n, 1.0);

  // zero in, zero out
  std::fill(u.begin(), u.end(), 0.0);
  apply_qf_mass(qd, 0, qd.num_elements, u, v);
  for (const double x : v) CHECK(x == 0.0);

  // ones return the factors themselves
  std::fill(u.begin(), u.end(), 1.0);
  apply_qf_mass(qd, 0, qd.num_elements, u, v);
  for (std::size_t i = 0; i < n; ++i) CHECK(v[i] == qd.values[i]);

  // diagonal operator is exactly self-adjoint
  std::vector<double> a(n), b(n), Ma(n), Mb(n);
  fill_random(a, 41);
  fill_random(b, 42);
  apply_qf_mass(qd, 0, qd.num_elements, a, Ma);
  apply_qf_mass(qd, 0, qd.num_elements, b, Mb);
  CHECK(dot(Ma, b) == dot(Mb, a));

  CHECK_THROWS_AS(apply_qf_diffusion(qd, 0, 1, u, v), std::invalid_argument);
}

TEST_CASE("pointwise diffusion action matches dense 3x3 products") {
  const auto mesh = build_mesh(2, 2, 1, 2, Deformation::Sine);
  const auto basis = make_basis(2, make_quadrature(QuadratureKind::GaussLegendre, 4));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Diffusion);
  const std::int64_t E = qd.num_elements;
  const std::int64_t nq = qd.nq;
  std::vector<double> gu(std::size_t(3 * E * nq)), gv(gu.size(), 0.0);
  fill_random(gu, 43);

  // zero in, zero out
  std::vector<double> zero(gu.size(), 0.0), out(gu.size(), 1.0);
  apply_qf_diffusion(qd, 0, E, zero, out);
  for (const double x : out) CHECK(x == 0.0);

  apply_qf_diffusion(qd, 0, E, gu, gv);
  for (std::int64_t e = 0; e < E; ++e) {
    for (std::int64_t qi = 0; qi < nq; qi += 5) {
      const auto S = [&](int s) { return qd.values[std::size_t((e * 6 + s) * nq + qi)]; };
      const double u0 = gu[std::size_t((0 * E + e) * nq + qi)];
      const double u1 = gu[std::size_t((1 * E + e) * nq + qi)];
      const double u2 = gu[std::size_t((2 * E + e) * nq + qi)];
      CHECK(gv[std::size_t((0 * E + e) * nq + qi)] ==
            doctest::Approx(S(0) * u0 + S(1) * u1 + S(2) * u2).epsilon(1e-14));
      CHECK(gv[std::size_t((1 * E + e) * nq + qi)] ==
            doctest::Approx(S(1) * u0 + S(3) * u1 + S(4) * u2).epsilon(1e-14));
      CHECK(gv[std::size_t((2 * E + e) * nq + qi)] ==
            doctest::Approx(S(2) * u0 + S(4) * u1 + S(5) * u2).epsilon(1e-14));
    }
  }

  CHECK_THROWS_AS(apply_qf_mass(qd, 0, 1, gu, gv), std::invalid_argument);
}

TEST_CASE("the pointwise stages are local: permuting points permutes outputs") {
  const auto mesh = build_mesh(1, 1, 1, 2, Deformation::Sine);
  const auto basis = make_basis(2, make_quadrature(QuadratureKind::GaussLegendre, 4));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Diffusion);
  const std::int64_t nq = qd.nq;
  std::vector<double> gu(std::size_t(3 * nq)), gv(gu.size(), 0.0);
  fill_random(gu, 45);
  apply_qf_diffusion(qd, 0, 1, gu, gv);

  // reverse the quadrature-point order in the data and the input
  QData rev = qd;
  std::vector<double> gur(gu.size()), gvr(gu.size(), 0.0);
  for (int s = 0; s < 6; ++s)
    for (std::int64_t qi = 0; qi < nq; ++qi)
      rev.values[std::size_t(s * nq + qi)] = qd.values[std::size_t(s * nq + (nq - 1 - qi))];
  for (int d = 0; d < 3; ++d)
    for (std::int64_t qi = 0; qi < nq; ++qi)
      gur[std::size_t(d * nq + qi)] = gu[std::size_t(d * nq + (nq - 1 - qi))];
  apply_qf_diffusion(rev, 0, 1, gur, gvr);
  for (int d = 0; d < 3; ++d)
    for (std::int64_t qi = 0; qi < nq; ++qi)
      CHECK(gvr[std::size_t(d * nq + qi)] == gv[std::size_t(d * nq + (nq - 1 - qi))]);
}

TEST_CASE("the pointwise stages are local: batch slices match the full apply") {
  const auto mesh = build_mesh(3, 1, 1, 2, Deformation::Sine);
  const auto basis = make_basis(2, make_quadrature(QuadratureKind::GaussLegendre, 4));
  const auto qd = compute_qdata(mesh, basis, QDataKind::Mass);
  const std::int64_t E = qd.num_elements;
  const std::int64_t nq = qd.nq;
  std::vector<double> u(std::size_t(E * nq)), whole(u.size(), 0.0), parts(u.size(), 0.0);
  fill_random(u, 44);
  apply_qf_mass(qd, 0, E, u, whole);
  for (std::int64_t e = 0; e < E; ++e) {
    apply_qf_mass(qd, e, 1, std::span<const double>(u).subspan(std::size_t(e * nq), std::size_t(nq)),
                  std::span<double>(parts).subspan(std::size_t(e * nq), std::size_t(nq)));
  }
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(whole[i] == parts[i]);
}

TEST_CASE("tangled coordinates are reported with element and point") {
  auto mesh = build_mesh(2, 1, 1, 1, Deformation::None);
  // fold the second element: push its far-x corners to the left of its near face
  for (const std::int64_t node : {2, 5, 8, 11}) mesh.coords[std::size_t(node)] = 0.1;
  const auto basis = make_basis(1, make_quadrature(QuadratureKind::GaussLegendre, 3));
  CHECK_THROWS_WITH_AS(compute_qdata(mesh, basis, QDataKind::Mass),
                       doctest::Contains("element 1"), std::runtime_error);
}
