#pragma once

#include <Eigen/Dense>

namespace topo {

// Unit-modulus element stiffness matrix on the unit element:
// bilinear quadrilateral (plane stress, unit thickness) for dim == 2,
// trilinear hexahedron for dim == 3. Full Gauss integration
// (2x2 points in 2D, 2x2x2 in 3D). The result is symmetrized.
Eigen::MatrixXd element_stiffness(int dim, double poisson);

}  // namespace topo
