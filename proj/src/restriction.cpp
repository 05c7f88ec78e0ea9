#include "hexfem/restriction.hpp"

#include <stdexcept>

namespace hexfem {

ElemRestriction make_restriction(const HexMesh& mesh, int m) {
  if (m < 1) throw std::invalid_argument("make_restriction: m must be >= 1");
  ElemRestriction r;
  r.num_elements = mesh.num_elements();
  r.elem_size = mesh.nodes_per_elem();
  r.n_L = mesh.n_L;
  r.m = m;
  r.indices.resize(std::size_t(r.num_elements) * std::size_t(r.elem_size));
  for (std::int64_t e = 0; e < r.num_elements; ++e) {
    const auto idx = element_node_indices(mesh, e);
    std::copy(idx.begin(), idx.end(),
              r.indices.begin() + std::size_t(e) * std::size_t(r.elem_size));
    const std::int64_t ex = e % mesh.dims[0];
    const std::int64_t ey = (e / mesh.dims[0]) % mesh.dims[1];
    const std::int64_t ez = e / (std::int64_t(mesh.dims[0]) * mesh.dims[1]);
    const int color = int((ex & 1) | ((ey & 1) << 1) | ((ez & 1) << 2));
    r.colors[std::size_t(color)].push_back(e);
  }
  return r;
}

void apply_g(const ElemRestriction& r, std::span<const double> l_vec,
             std::span<double> e_vec, ThreadPool* pool) {
  const std::int64_t S = r.elem_size;
  if (std::int64_t(l_vec.size()) != std::int64_t(r.m) * r.n_L)
    throw std::invalid_argument("apply_g: L-vector length mismatch");
  if (std::int64_t(e_vec.size()) != std::int64_t(r.m) * r.num_elements * S)
    throw std::invalid_argument("apply_g: E-vector length mismatch");

  auto work = [&](std::int64_t lo, std::int64_t hi, int) {
    for (std::int64_t item = lo; item < hi; ++item) {
      const std::int64_t c = item / r.num_elements;
      const std::int64_t e = item % r.num_elements;
      const std::int64_t* idx = r.indices.data() + e * S;
      const double* l = l_vec.data() + c * r.n_L;
      double* out = e_vec.data() + (c * r.num_elements + e) * S;
      for (std::int64_t s = 0; s < S; ++s) out[s] = l[idx[s]];
    }
  };
  const std::int64_t items = std::int64_t(r.m) * r.num_elements;
  if (pool) pool->parallel_for(items, work); else work(0, items, 0);
}

void apply_g_transpose(const ElemRestriction& r, std::span<const double> e_vec,
                       std::span<double> l_vec, ThreadPool* pool) {
  const std::int64_t S = r.elem_size;
  if (std::int64_t(l_vec.size()) != std::int64_t(r.m) * r.n_L)
    throw std::invalid_argument("apply_g_transpose: L-vector length mismatch");
  if (std::int64_t(e_vec.size()) != std::int64_t(r.m) * r.num_elements * S)
    throw std::invalid_argument("apply_g_transpose: E-vector length mismatch");

  std::fill(l_vec.begin(), l_vec.end(), 0.0);
  // Classes in increasing id; within a class no two elements share a node,
  // so the per-node accumulation order is the class order for any pool size.
  for (const auto& cls : r.colors) {
    const std::int64_t items = std::int64_t(r.m) * std::int64_t(cls.size());
    auto work = [&](std::int64_t lo, std::int64_t hi, int) {
      for (std::int64_t item = lo; item < hi; ++item) {
        const std::int64_t c = item / std::int64_t(cls.size());
        const std::int64_t e = cls[std::size_t(item % std::int64_t(cls.size()))];
        const std::int64_t* idx = r.indices.data() + e * S;
        const double* in = e_vec.data() + (c * r.num_elements + e) * S;
        double* l = l_vec.data() + c * r.n_L;
        for (std::int64_t s = 0; s < S; ++s) l[idx[s]] += in[s];
      }
    };
    if (pool) pool->parallel_for(items, work); else work(0, items, 0);
  }
}

std::vector<double> multiplicity(const ElemRestriction& r) {
  std::vector<double> mult(std::size_t(r.n_L), 0.0);
  for (std::int64_t e = 0; e < r.num_elements; ++e) {
    const std::int64_t* idx = r.indices.data() + e * std::int64_t(r.elem_size);
    for (int s = 0; s < r.elem_size; ++s) mult[std::size_t(idx[s])] += 1.0;
  }
  return mult;
}

void gather_scalar(const ElemRestriction& r, std::span<const double> e_scalar,
                   std::span<double> l_scalar, ThreadPool* pool) {
  const std::int64_t S = r.elem_size;
  if (std::int64_t(l_scalar.size()) != r.n_L)
    throw std::invalid_argument("gather_scalar: L-vector length mismatch");
  if (std::int64_t(e_scalar.size()) != r.num_elements * S)
    throw std::invalid_argument("gather_scalar: E-vector length mismatch");
  std::fill(l_scalar.begin(), l_scalar.end(), 0.0);
  for (const auto& cls : r.colors) {
    auto work = [&](std::int64_t lo, std::int64_t hi, int) {
      for (std::int64_t item = lo; item < hi; ++item) {
        const std::int64_t e = cls[std::size_t(item)];
        const std::int64_t* idx = r.indices.data() + e * S;
        const double* in = e_scalar.data() + e * S;
        for (std::int64_t s = 0; s < S; ++s) l_scalar[std::size_t(idx[s])] += in[s];
      }
    };
    const std::int64_t items = std::int64_t(cls.size());
    if (pool) pool->parallel_for(items, work); else work(0, items, 0);
  }
}

}  // namespace hexfem
