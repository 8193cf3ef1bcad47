#include "oracles.hpp"

#include <cmath>

namespace oracle {

namespace {

// Node coordinates of the unit element in the production local order.
void node_coords(int dim, int i, double* x) {
  static const int q4[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  if (dim == 2) {
    x[0] = q4[i][0];
    x[1] = q4[i][1];
  } else {
    x[0] = q4[i % 4][0];
    x[1] = q4[i % 4][1];
    x[2] = i < 4 ? 0.0 : 1.0;
  }
}

}  // namespace

Eigen::MatrixXd element_stiffness_quadrature(int dim, double poisson) {
  const int npe = dim == 2 ? 4 : 8;
  const int nstr = dim == 2 ? 3 : 6;
  const int ndof = npe * dim;

  Eigen::MatrixXd D(nstr, nstr);
  if (dim == 2) {
    D.setZero();
    const double c = 1.0 / (1.0 - poisson * poisson);
    D(0, 0) = D(1, 1) = c;
    D(0, 1) = D(1, 0) = poisson * c;
    D(2, 2) = c * (1.0 - poisson) / 2.0;
  } else {
    D.setZero();
    const double lam =
        poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    const double mu = 1.0 / (2.0 * (1.0 + poisson));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) D(i, j) = lam;
      D(i, i) += 2.0 * mu;
      D(3 + i, 3 + i) = mu;
    }
  }

  Eigen::MatrixXd coords(npe, dim);
  for (int i = 0; i < npe; ++i) {
    double x[3];
    node_coords(dim, i, x);
    for (int d = 0; d < dim; ++d) coords(i, d) = x[d];
  }

  const double gp = 1.0 / std::sqrt(3.0);
  Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(ndof, ndof);
  const int ngp = dim == 2 ? 4 : 8;
  for (int q = 0; q < ngp; ++q) {
    Eigen::VectorXd xi(dim);
    xi[0] = (q & 1) ? gp : -gp;
    xi[1] = (q & 2) ? gp : -gp;
    if (dim == 3) xi[2] = (q & 4) ? gp : -gp;

    // dN/dxi for the multilinear element, node i has natural corner signs.
    Eigen::MatrixXd dN(npe, dim);
    for (int i = 0; i < npe; ++i) {
      double sgn[3];
      double x[3];
      node_coords(dim, i, x);
      for (int d = 0; d < dim; ++d) sgn[d] = 2.0 * x[d] - 1.0;
      for (int d = 0; d < dim; ++d) {
        double val = sgn[d] / (1 << dim);
        for (int o = 0; o < dim; ++o)
          if (o != d) val *= 1.0 + sgn[o] * xi[o];
        dN(i, d) = val;
      }
    }

    const Eigen::MatrixXd J = dN.transpose() * coords;  // dim x dim
    const Eigen::MatrixXd dNdx = dN * J.inverse().transpose();
    const double detJ = J.determinant();

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nstr, ndof);
    for (int i = 0; i < npe; ++i) {
      const int c = dim * i;
      if (dim == 2) {
        B(0, c) = dNdx(i, 0);
        B(1, c + 1) = dNdx(i, 1);
        B(2, c) = dNdx(i, 1);
        B(2, c + 1) = dNdx(i, 0);
      } else {
        B(0, c) = dNdx(i, 0);
        B(1, c + 1) = dNdx(i, 1);
        B(2, c + 2) = dNdx(i, 2);
        B(3, c + 1) = dNdx(i, 2);
        B(3, c + 2) = dNdx(i, 1);
        B(4, c) = dNdx(i, 2);
        B(4, c + 2) = dNdx(i, 0);
        B(5, c) = dNdx(i, 1);
        B(5, c + 1) = dNdx(i, 0);
      }
    }
    Ke += detJ * B.transpose() * D * B;
  }
  return Ke;
}

Eigen::MatrixXd quad4_analytic(double nu) {
  const double k[8] = {0.5 - nu / 6.0,        0.125 + nu / 8.0,
                       -0.25 - nu / 12.0,     -0.125 + 3.0 * nu / 8.0,
                       -0.25 + nu / 12.0,     -0.125 - nu / 8.0,
                       nu / 6.0,              0.125 - 3.0 * nu / 8.0};
  const int idx[8][8] = {{0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2},
                         {2, 7, 0, 5, 6, 3, 4, 1}, {3, 6, 5, 0, 7, 2, 1, 4},
                         {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
                         {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};
  Eigen::MatrixXd Ke(8, 8);
  const double s = 1.0 / (1.0 - nu * nu);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) Ke(i, j) = s * k[idx[i][j]];
  return Ke;
}

Eigen::MatrixXd dense_global_stiffness(const topo::StructuredGrid& grid,
                                       const Eigen::MatrixXd& Ke,
                                       const std::vector<double>& moduli) {
  const int nd = grid.dofs_per_node();
  const int npe = grid.nodes_per_element();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(grid.dof_count(), grid.dof_count());
  std::array<int, 8> nodes{};
  for (int e = 0; e < grid.element_count(); ++e) {
    grid.element_nodes(e, nodes);
    for (int i = 0; i < npe; ++i)
      for (int a = 0; a < nd; ++a)
        for (int j = 0; j < npe; ++j)
          for (int b = 0; b < nd; ++b)
            K(nodes[i] * nd + a, nodes[j] * nd + b) +=
                moduli[e] * Ke(i * nd + a, j * nd + b);
  }
  return K;
}

Eigen::MatrixXd dense_reduced_stiffness(const topo::StructuredGrid& grid,
                                        const topo::DofMap& dofmap,
                                        const Eigen::MatrixXd& Ke,
                                        const std::vector<double>& moduli) {
  const Eigen::MatrixXd full = dense_global_stiffness(grid, Ke, moduli);
  const int n = dofmap.free_count();
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      K(i, j) = full(dofmap.global_of_free(i), dofmap.global_of_free(j));
  for (const topo::Spring& s : dofmap.springs()) {
    const int i = dofmap.free_index(s.dof);
    K(i, i) += s.stiffness;
  }
  return K;
}

Eigen::MatrixXd dense_filter_matrix(const topo::StructuredGrid& grid,
                                    double radius) {
  const int ne = grid.element_count();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(ne, ne);
  for (int i = 0; i < ne; ++i) {
    const auto ci = grid.element_center(i);
    double sum = 0.0;
    for (int j = 0; j < ne; ++j) {
      const auto cj = grid.element_center(j);
      const double d = std::sqrt((ci[0] - cj[0]) * (ci[0] - cj[0]) +
                                 (ci[1] - cj[1]) * (ci[1] - cj[1]) +
                                 (ci[2] - cj[2]) * (ci[2] - cj[2]));
      const double w = std::max(0.0, radius - d);
      F(i, j) = w;
      sum += w;
    }
    F.row(i) /= sum;
  }
  return F;
}

double dense_compliance(const topo::StructuredGrid& grid,
                        const topo::DofMap& dofmap, const Eigen::MatrixXd& Ke,
                        const topo::SimpLaw& law,
                        const std::vector<double>& phys,
                        const Eigen::VectorXd& f_free) {
  std::vector<double> E(phys.size());
  for (std::size_t e = 0; e < phys.size(); ++e)
    E[e] = law.Emin + (law.E0 - law.Emin) * std::pow(phys[e], law.penal);
  const Eigen::MatrixXd K = dense_reduced_stiffness(grid, dofmap, Ke, E);
  const Eigen::VectorXd u = K.ldlt().solve(f_free);
  return f_free.dot(u);
}

}  // namespace oracle
