#pragma once

#include <array>
#include <utility>
#include <vector>

namespace topo {

// Regular grid of unit square (2D) or unit cube (3D) elements.
// Node and element numbering is lexicographic: x fastest, then y, then z.
struct StructuredGrid {
  int dim = 2;
  int nelx = 1;
  int nely = 1;
  int nelz = 0;  // only meaningful when dim == 3

  static StructuredGrid make2d(int nelx, int nely);
  static StructuredGrid make3d(int nelx, int nely, int nelz);

  int nodes_per_element() const { return dim == 2 ? 4 : 8; }
  int dofs_per_node() const { return dim; }

  int node_count() const {
    return (nelx + 1) * (nely + 1) * (dim == 3 ? nelz + 1 : 1);
  }
  int element_count() const { return nelx * nely * (dim == 3 ? nelz : 1); }
  int dof_count() const { return node_count() * dofs_per_node(); }

  int node_index(int ix, int iy, int iz = 0) const {
    return ix + (nelx + 1) * (iy + (nely + 1) * iz);
  }
  int element_index(int ex, int ey, int ez = 0) const {
    return ex + nelx * (ey + nely * ez);
  }
  std::array<int, 3> element_coords(int e) const;

  // Global node ids of element e in the local order used by the element
  // stiffness matrix: (x,y),(x+1,y),(x+1,y+1),(x,y+1), repeated at z+1 in 3D.
  void element_nodes(int e, std::array<int, 8>& out) const;

  std::array<double, 3> element_center(int e) const;
};

// One concentrated nodal force: axis is 0 (x), 1 (y) or 2 (z).
struct LoadEntry {
  int node = 0;
  int axis = 0;
  double value = 0.0;
};

struct LoadCase {
  std::vector<LoadEntry> entries;
};

// Grounded spring added to the diagonal of the global operator.
struct Spring {
  int dof = 0;  // global DOF index
  double stiffness = 0.0;
};

// Partition of the grid DOFs into fixed supports and free unknowns,
// plus optional grounded springs on free DOFs.
class DofMap {
public:
  DofMap(const StructuredGrid& grid, std::vector<int> fixed_dofs,
         std::vector<Spring> springs = {});

  int dofs_per_node() const { return dofs_per_node_; }
  int total_dofs() const { return static_cast<int>(free_index_.size()); }
  int free_count() const { return static_cast<int>(free_to_global_.size()); }

  // -1 when the global DOF is fixed.
  int free_index(int global_dof) const { return free_index_[global_dof]; }
  int global_of_free(int i) const { return free_to_global_[i]; }
  bool is_fixed(int global_dof) const { return free_index_[global_dof] < 0; }

  const std::vector<int>& fixed_dofs() const { return fixed_; }  // sorted
  const std::vector<Spring>& springs() const { return springs_; }

  static int dof_of(int node, int axis, int dofs_per_node) {
    return node * dofs_per_node + axis;
  }

private:
  int dofs_per_node_;
  std::vector<int> free_index_;
  std::vector<int> free_to_global_;
  std::vector<int> fixed_;
  std::vector<Spring> springs_;
};

}  // namespace topo
