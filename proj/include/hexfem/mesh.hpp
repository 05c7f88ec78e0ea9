#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace hexfem {

enum class Deformation { None, Sine };

/// Structured hexahedral mesh of the unit cube [0,1]^3 with isoparametric
/// degree-p coordinates on GLL lattice nodes. Global scalar nodes are
/// numbered lexicographically, x fastest. Immutable after construction.
struct HexMesh {
  std::array<int, 3> dims{};            // elements per axis
  int p = 1;                            // geometry degree (= solution degree)
  std::array<std::int64_t, 3> nodes_per_axis{};
  std::int64_t n_L = 0;                 // scalar node count
  std::vector<double> coords;           // 3*n_L, component-major
  std::vector<std::int64_t> boundary_nodes;  // sorted L-indices on the boundary
  Deformation deformation = Deformation::None;

  std::int64_t num_elements() const {
    return std::int64_t(dims[0]) * dims[1] * dims[2];
  }
  int nodes_per_elem() const { return (p + 1) * (p + 1) * (p + 1); }
};

/// Builds the mesh. Node coordinates are the tensor lattice of GLL points
/// mapped to [0,1]^3; with Deformation::Sine every component is displaced by
/// eps*sin(pi*x)*sin(pi*y)*sin(pi*z), eps = 0.05, which keeps the boundary
/// fixed and det J positive at the tested resolutions.
HexMesh build_mesh(int nx, int ny, int nz, int p,
                   Deformation deformation = Deformation::None);

/// L-indices of element e in lexicographic within-element order (x fastest),
/// matching the tensor kernel layout. e out of range is rejected.
std::vector<std::int64_t> element_node_indices(const HexMesh& mesh,
                                               std::int64_t e);

constexpr double kSineDeformationAmplitude = 0.05;

}  // namespace hexfem
