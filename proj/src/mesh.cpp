#include "hexfem/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hexfem/quadrature.hpp"

namespace hexfem {

namespace {

// 1D lattice of GLL points mapped into [0,1], nx elements of degree p.
std::vector<double> axis_coords(int nx, int p) {
  const std::vector<double> gll =
      make_quadrature(QuadratureKind::GaussLobattoLegendre, p + 1).points;
  std::vector<double> coords(std::size_t(nx) * p + 1);
  const double h = 1.0 / nx;
  for (int k = 0; k < nx; ++k) {
    for (int j = 0; j <= p; ++j) {
      coords[std::size_t(k) * p + std::size_t(j)] =
          (k + 0.5 * (gll[std::size_t(j)] + 1.0)) * h;
    }
  }
  coords.back() = 1.0;
  coords.front() = 0.0;
  return coords;
}

}  // namespace

HexMesh build_mesh(int nx, int ny, int nz, int p, Deformation deformation) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("build_mesh: element counts must be >= 1");
  if (p < 1) throw std::invalid_argument("build_mesh: p must be >= 1");

  HexMesh mesh;
  mesh.dims = {nx, ny, nz};
  mesh.p = p;
  mesh.deformation = deformation;
  mesh.nodes_per_axis = {std::int64_t(nx) * p + 1, std::int64_t(ny) * p + 1,
                         std::int64_t(nz) * p + 1};
  mesh.n_L = mesh.nodes_per_axis[0] * mesh.nodes_per_axis[1] * mesh.nodes_per_axis[2];
  mesh.coords.assign(std::size_t(3 * mesh.n_L), 0.0);

  const auto cx = axis_coords(nx, p);
  const auto cy = axis_coords(ny, p);
  const auto cz = axis_coords(nz, p);
  const std::int64_t NX = mesh.nodes_per_axis[0];
  const std::int64_t NY = mesh.nodes_per_axis[1];
  const std::int64_t NZ = mesh.nodes_per_axis[2];

  std::int64_t node = 0;
  for (std::int64_t iz = 0; iz < NZ; ++iz) {
    for (std::int64_t iy = 0; iy < NY; ++iy) {
      for (std::int64_t ix = 0; ix < NX; ++ix, ++node) {
        double x = cx[std::size_t(ix)];
        double y = cy[std::size_t(iy)];
        double z = cz[std::size_t(iz)];
        if (deformation == Deformation::Sine) {
          const double bump = kSineDeformationAmplitude * std::sin(M_PI * x) *
                              std::sin(M_PI * y) * std::sin(M_PI * z);
          x += bump;
          y += bump;
          z += bump;
        }
        mesh.coords[std::size_t(node)] = x;
        mesh.coords[std::size_t(mesh.n_L + node)] = y;
        mesh.coords[std::size_t(2 * mesh.n_L + node)] = z;
        if (ix == 0 || ix == NX - 1 || iy == 0 || iy == NY - 1 || iz == 0 ||
            iz == NZ - 1) {
          mesh.boundary_nodes.push_back(node);
        }
      }
    }
  }
  return mesh;
}

std::vector<std::int64_t> element_node_indices(const HexMesh& mesh, std::int64_t e) {
  if (e < 0 || e >= mesh.num_elements())
    throw std::out_of_range("element_node_indices: element " + std::to_string(e) +
                            " out of range");
  const int p = mesh.p;
  const std::int64_t ex = e % mesh.dims[0];
  const std::int64_t ey = (e / mesh.dims[0]) % mesh.dims[1];
  const std::int64_t ez = e / (std::int64_t(mesh.dims[0]) * mesh.dims[1]);
  const std::int64_t NX = mesh.nodes_per_axis[0];
  const std::int64_t NY = mesh.nodes_per_axis[1];

  std::vector<std::int64_t> idx;
  idx.reserve(std::size_t(mesh.nodes_per_elem()));
  for (int kz = 0; kz <= p; ++kz) {
    for (int ky = 0; ky <= p; ++ky) {
      for (int kx = 0; kx <= p; ++kx) {
        const std::int64_t ix = ex * p + kx;
        const std::int64_t iy = ey * p + ky;
        const std::int64_t iz = ez * p + kz;
        idx.push_back(ix + NX * (iy + NY * iz));
      }
    }
  }
  return idx;
}

}  // namespace hexfem
