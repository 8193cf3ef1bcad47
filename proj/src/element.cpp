#include "topo/element.hpp"

#include <cmath>

#include "topo/errors.hpp"

namespace topo {

namespace {

// Corner order matches StructuredGrid::element_nodes: CCW bottom face,
// then the same square at z+1. Natural coordinates of node i are signs_[i].
constexpr double kCorner2d[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
constexpr double kCorner3d[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1},
                                    {-1, 1, -1},  {-1, -1, 1}, {1, -1, 1},
                                    {1, 1, 1},    {-1, 1, 1}};

Eigen::MatrixXd quad4_plane_stress(double nu) {
  // Plane-stress constitutive matrix for E = 1.
  Eigen::Matrix3d D;
  D << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, (1.0 - nu) / 2.0;
  D /= (1.0 - nu * nu);

  Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(8, 8);
  const double g = 1.0 / std::sqrt(3.0);
  // Unit element: x = (xi+1)/2, so d/dx = 2 d/dxi and detJ = 1/4.
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double xi = (a == 0 ? -g : g);
      const double eta = (b == 0 ? -g : g);
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int i = 0; i < 4; ++i) {
        const double sx = kCorner2d[i][0];
        const double sy = kCorner2d[i][1];
        const double dNdx = 2.0 * 0.25 * sx * (1.0 + sy * eta);
        const double dNdy = 2.0 * 0.25 * sy * (1.0 + sx * xi);
        B(0, 2 * i) = dNdx;
        B(1, 2 * i + 1) = dNdy;
        B(2, 2 * i) = dNdy;
        B(2, 2 * i + 1) = dNdx;
      }
      Ke += 0.25 * B.transpose() * D * B;
    }
  }
  return 0.5 * (Ke + Ke.transpose());
}

Eigen::MatrixXd hex8_solid(double nu) {
  // Isotropic 3D constitutive matrix for E = 1, Voigt order
  // [xx, yy, zz, yz, xz, xy].
  const double lambda = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = 1.0 / (2.0 * (1.0 + nu));
  Eigen::Matrix<double, 6, 6> D = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) D(i, j) = lambda;
    D(i, i) = lambda + 2.0 * mu;
    D(3 + i, 3 + i) = mu;
  }

  Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(24, 24);
  const double g = 1.0 / std::sqrt(3.0);
  // Unit cube: d/dx = 2 d/dxi, detJ = 1/8.
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        const double xi = (a == 0 ? -g : g);
        const double eta = (b == 0 ? -g : g);
        const double zeta = (c == 0 ? -g : g);
        Eigen::Matrix<double, 6, 24> B = Eigen::Matrix<double, 6, 24>::Zero();
        for (int i = 0; i < 8; ++i) {
          const double sx = kCorner3d[i][0];
          const double sy = kCorner3d[i][1];
          const double sz = kCorner3d[i][2];
          const double dNdx = 2.0 * 0.125 * sx * (1 + sy * eta) * (1 + sz * zeta);
          const double dNdy = 2.0 * 0.125 * sy * (1 + sx * xi) * (1 + sz * zeta);
          const double dNdz = 2.0 * 0.125 * sz * (1 + sx * xi) * (1 + sy * eta);
          const int col = 3 * i;
          B(0, col) = dNdx;
          B(1, col + 1) = dNdy;
          B(2, col + 2) = dNdz;
          B(3, col + 1) = dNdz;
          B(3, col + 2) = dNdy;
          B(4, col) = dNdz;
          B(4, col + 2) = dNdx;
          B(5, col) = dNdy;
          B(5, col + 1) = dNdx;
        }
        Ke += 0.125 * B.transpose() * D * B;
      }
    }
  }
  return 0.5 * (Ke + Ke.transpose());
}

}  // namespace

Eigen::MatrixXd element_stiffness(int dim, double poisson) {
  if (!(poisson >= 0.0 && poisson < 0.5))
    throw ParamError("element_stiffness: Poisson ratio must be in [0, 0.5)");
  if (dim == 2) return quad4_plane_stress(poisson);
  if (dim == 3) return hex8_solid(poisson);
  throw ParamError("element_stiffness: dim must be 2 or 3");
}

}  // namespace topo
