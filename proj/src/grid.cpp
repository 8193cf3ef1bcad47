#include "topo/grid.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "topo/errors.hpp"

namespace topo {

StructuredGrid StructuredGrid::make2d(int nelx, int nely) {
  if (nelx < 1 || nely < 1)
    throw ParamError("grid: element counts must be >= 1");
  StructuredGrid g;
  g.dim = 2;
  g.nelx = nelx;
  g.nely = nely;
  g.nelz = 0;
  return g;
}

StructuredGrid StructuredGrid::make3d(int nelx, int nely, int nelz) {
  if (nelx < 1 || nely < 1 || nelz < 1)
    throw ParamError("grid: element counts must be >= 1");
  StructuredGrid g;
  g.dim = 3;
  g.nelx = nelx;
  g.nely = nely;
  g.nelz = nelz;
  return g;
}

std::array<int, 3> StructuredGrid::element_coords(int e) const {
  const int ex = e % nelx;
  const int ey = (e / nelx) % nely;
  const int ez = dim == 3 ? e / (nelx * nely) : 0;
  return {ex, ey, ez};
}

void StructuredGrid::element_nodes(int e, std::array<int, 8>& out) const {
  const auto [ex, ey, ez] = element_coords(e);
  out[0] = node_index(ex, ey, ez);
  out[1] = node_index(ex + 1, ey, ez);
  out[2] = node_index(ex + 1, ey + 1, ez);
  out[3] = node_index(ex, ey + 1, ez);
  if (dim == 3) {
    out[4] = node_index(ex, ey, ez + 1);
    out[5] = node_index(ex + 1, ey, ez + 1);
    out[6] = node_index(ex + 1, ey + 1, ez + 1);
    out[7] = node_index(ex, ey + 1, ez + 1);
  } else {
    out[4] = out[5] = out[6] = out[7] = -1;
  }
}

std::array<double, 3> StructuredGrid::element_center(int e) const {
  const auto [ex, ey, ez] = element_coords(e);
  return {ex + 0.5, ey + 0.5, dim == 3 ? ez + 0.5 : 0.0};
}

DofMap::DofMap(const StructuredGrid& grid, std::vector<int> fixed_dofs,
               std::vector<Spring> springs)
    : dofs_per_node_(grid.dofs_per_node()), springs_(std::move(springs)) {
  const int ndof = grid.dof_count();
  std::set<int> fixed(fixed_dofs.begin(), fixed_dofs.end());
  for (int d : fixed)
    if (d < 0 || d >= ndof)
      throw ParamError("dofmap: fixed DOF " + std::to_string(d) +
                       " out of range");
  fixed_.assign(fixed.begin(), fixed.end());

  free_index_.assign(ndof, -1);
  free_to_global_.reserve(ndof - static_cast<int>(fixed_.size()));
  for (int d = 0; d < ndof; ++d) {
    if (!fixed.count(d)) {
      free_index_[d] = static_cast<int>(free_to_global_.size());
      free_to_global_.push_back(d);
    }
  }

  for (const Spring& s : springs_) {
    if (s.dof < 0 || s.dof >= ndof)
      throw ParamError("dofmap: spring DOF out of range");
    if (fixed.count(s.dof))
      throw ParamError("dofmap: spring attached to fixed DOF " +
                       std::to_string(s.dof));
    if (!(s.stiffness > 0.0))
      throw ParamError("dofmap: spring stiffness must be positive");
  }
}

}  // namespace topo
