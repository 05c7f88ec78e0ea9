#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hexfem/mesh.hpp"
#include "hexfem/parallel.hpp"

namespace hexfem {

/// The element restriction: scatter L-vector to E-vector and transpose
/// gather-accumulate, for m-component fields.
///
/// Layouts (component-major):
///   L-vector: l[comp*n_L + node]
///   E-vector: e[(comp*num_elements + elem)*elem_size + slot]
///
/// Elements are partitioned into 8 color classes by the parity of their
/// logical coordinates; no two elements of one class share an L-node, which
/// makes the parallel gather race-free and its accumulation order fixed
/// (classes in increasing id, one contribution per node per class).
struct ElemRestriction {
  std::int64_t num_elements = 0;
  int elem_size = 0;  // (p+1)^3
  std::int64_t n_L = 0;
  int m = 1;
  std::vector<std::int64_t> indices;  // num_elements * elem_size
  std::array<std::vector<std::int64_t>, 8> colors;
};

ElemRestriction make_restriction(const HexMesh& mesh, int m);

/// e[(c*E+e)*S+s] = l[c*n_L + indices[e*S+s]]; pure copy.
void apply_g(const ElemRestriction& r, std::span<const double> l_vec,
             std::span<double> e_vec, ThreadPool* pool = nullptr);

/// l[c*n_L + i] = sum of all element slots mapping to i. Deterministic for
/// any pool size (color-ordered accumulation).
void apply_g_transpose(const ElemRestriction& r, std::span<const double> e_vec,
                       std::span<double> l_vec, ThreadPool* pool = nullptr);

/// Per-node element count as a scalar L-vector (the diagonal of G^T G).
std::vector<double> multiplicity(const ElemRestriction& r);

/// Single-component gather-accumulate over the same index table, used for
/// component-independent element data (e.g. operator diagonals).
void gather_scalar(const ElemRestriction& r, std::span<const double> e_scalar,
                   std::span<double> l_scalar, ThreadPool* pool = nullptr);

}  // namespace hexfem
