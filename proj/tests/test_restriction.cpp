#include <cstring>
#include <set>

#include "doctest.h"
#include "hexfem/restriction.hpp"
#include "oracle_helpers.hpp"

using namespace hexfem;
using namespace hexfem::testing;

TEST_CASE("scatter copies shared values into both elements") {
  const auto mesh = build_mesh(2, 1, 1, 1, Deformation::None);
  const auto r = make_restriction(mesh, 1);
  std::vector<double> l(std::size_t(mesh.n_L));
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = double(i);
  std::vector<double> e(std::size_t(2) * 8, 0.0);
  apply_g(r, l, e);
  // element 0 right face and element 1 left face carry the same L-values
  for (int fz = 0; fz < 2; ++fz)
    for (int fy = 0; fy < 2; ++fy) {
      const std::size_t slot0 = std::size_t(1 + 2 * (fy + 2 * fz));  // kx=1 in elem 0
      const std::size_t slot1 = std::size_t(0 + 2 * (fy + 2 * fz));  // kx=0 in elem 1
      CHECK(e[slot0] == e[8 + slot1]);
    }
}

TEST_CASE("ones scatter to ones, transpose gives multiplicities") {
  const auto mesh = build_mesh(2, 2, 2, 1, Deformation::None);
  const auto r = make_restriction(mesh, 1);
  std::vector<double> l(std::size_t(mesh.n_L), 1.0);
  std::vector<double> e(std::size_t(r.num_elements) * 8, 0.0);
  apply_g(r, l, e);
  for (const double v : e) CHECK(v == 1.0);

  std::vector<double> back(std::size_t(mesh.n_L), 0.0);
  apply_g_transpose(r, e, back);
  const auto mult = multiplicity(r);
  std::set<double> values(back.begin(), back.end());
  CHECK(values == std::set<double>{1.0, 2.0, 4.0, 8.0});
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == mult[i]);
  // the mesh center is shared by all 8 elements
  CHECK(mult[std::size_t(13)] == 8.0);
}

TEST_CASE("gather-scatter is the multiplicity diagonal") {
  const auto mesh = build_mesh(2, 2, 2, 2, Deformation::None);
  const auto r = make_restriction(mesh, 3);
  const std::size_t n = std::size_t(3) * std::size_t(mesh.n_L);
  std::vector<double> l(n);
  fill_random(l, 3);
  std::vector<double> e(std::size_t(3) * std::size_t(r.num_elements) * std::size_t(r.elem_size), 0.0);
  std::vector<double> back(n, 0.0);
  apply_g(r, l, e);
  apply_g_transpose(r, e, back);
  const auto mult = multiplicity(r);
  for (int c = 0; c < 3; ++c)
    for (std::int64_t i = 0; i < mesh.n_L; ++i) {
      const std::size_t k = std::size_t(c * mesh.n_L + i);
      CHECK(back[k] == doctest::Approx(mult[std::size_t(i)] * l[k]).epsilon(1e-14));
    }
}

TEST_CASE("single element: transpose of scatter is the identity") {
  const auto mesh = build_mesh(1, 1, 1, 2, Deformation::None);
  const auto r = make_restriction(mesh, 1);
  std::vector<double> l(std::size_t(mesh.n_L));
  fill_random(l, 4);
  std::vector<double> e(std::size_t(r.elem_size), 0.0);
  std::vector<double> back(l.size(), 0.0);
  apply_g(r, l, e);
  apply_g_transpose(r, e, back);
  for (std::size_t i = 0; i < l.size(); ++i) CHECK(back[i] == l[i]);
}

TEST_CASE("scatter and gather are adjoint") {
  const auto mesh = build_mesh(3, 2, 2, 2, Deformation::None);
  const auto r = make_restriction(mesh, 3);
  const std::size_t nl = std::size_t(3) * std::size_t(mesh.n_L);
  const std::size_t nev = std::size_t(3) * std::size_t(r.num_elements) * std::size_t(r.elem_size);
  std::vector<double> l(nl), ev(nev), Gl(nev, 0.0), Gte(nl, 0.0);
  fill_random(l, 6);
  fill_random(ev, 7);
  apply_g(r, l, Gl);
  apply_g_transpose(r, ev, Gte);
  const double a = dot(Gl, ev);
  const double b = dot(l, Gte);
  CHECK(std::abs(a - b) <= 1e-14 * std::max(std::abs(a), std::abs(b)));
}

TEST_CASE("no two elements of a color class share a node") {
  for (const auto [dims, p] : {std::pair{std::array{2, 2, 2}, 1},
                               {std::array{3, 2, 1}, 2},
                               {std::array{4, 3, 2}, 3}}) {
    const auto mesh = build_mesh(dims[0], dims[1], dims[2], p, Deformation::None);
    const auto r = make_restriction(mesh, 1);
    std::size_t total = 0;
    for (const auto& cls : r.colors) {
      std::set<std::int64_t> used;
      for (const auto e : cls) {
        for (int s = 0; s < r.elem_size; ++s) {
          const auto idx = r.indices[std::size_t(e) * std::size_t(r.elem_size) + std::size_t(s)];
          CHECK(used.insert(idx).second);
        }
      }
      total += cls.size();
    }
    CHECK(total == std::size_t(r.num_elements));
  }
}

TEST_CASE("gather is bitwise deterministic across pool sizes") {
  const auto mesh = build_mesh(3, 3, 2, 3, Deformation::None);
  const auto r = make_restriction(mesh, 3);
  const std::size_t nev = std::size_t(3) * std::size_t(r.num_elements) * std::size_t(r.elem_size);
  std::vector<double> ev(nev);
  fill_random(ev, 8);
  std::vector<double> ref(std::size_t(3) * std::size_t(mesh.n_L), 0.0);
  apply_g_transpose(r, ev, ref);
  for (const int workers : {1, 2, 4, 8}) {
    ThreadPool pool(workers);
    std::vector<double> out(ref.size(), 0.0);
    apply_g_transpose(r, ev, out, &pool);
    CHECK(std::memcmp(ref.data(), out.data(), ref.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("length mismatches are rejected") {
  const auto mesh = build_mesh(2, 1, 1, 1, Deformation::None);
  const auto r = make_restriction(mesh, 1);
  std::vector<double> l(std::size_t(mesh.n_L) + 1, 0.0);
  std::vector<double> e(std::size_t(r.num_elements) * 8, 0.0);
  CHECK_THROWS_AS(apply_g(r, l, e), std::invalid_argument);
  CHECK_THROWS_AS(apply_g_transpose(r, e, l), std::invalid_argument);
}
