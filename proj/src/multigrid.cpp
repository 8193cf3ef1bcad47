#include "topo/multigrid.hpp"

#include <cmath>
#include <string>

#include "topo/errors.hpp"

namespace topo {

void MultigridConfig::validate() const {
  if (levels < 2) throw ParamError("multigrid: levels must be >= 2");
  if (pre_smooth < 1 || post_smooth < 1)
    throw ParamError("multigrid: smoothing counts must be >= 1");
  if (!(jacobi_weight >= 0.0 && jacobi_weight < 1.0))
    throw ParamError("multigrid: jacobi weight must be in (0, 1), or 0 for auto");
  if (!(cg_tol > 0.0)) throw ParamError("multigrid: cg tolerance must be > 0");
  if (max_cg < 1) throw ParamError("multigrid: max CG iterations must be >= 1");
}

namespace {

struct Lattice {
  int dim;
  int nelx, nely, nelz;            // elements per axis (nelz = 0 in 2D)
  std::vector<int> free_index;     // per DOF; -1 fixed
  std::vector<int> free_to_dof;

  int nodes_x() const { return nelx + 1; }
  int nodes_y() const { return nely + 1; }
  int nodes_z() const { return dim == 3 ? nelz + 1 : 1; }
  int node(int ix, int iy, int iz) const {
    return ix + nodes_x() * (iy + nodes_y() * iz);
  }
  int node_count() const { return nodes_x() * nodes_y() * nodes_z(); }
};

}  // namespace

MultigridHierarchy::MultigridHierarchy(const StructuredGrid& grid,
                                       const DofMap& dofmap,
                                       const MultigridConfig& cfg)
    : cfg_(cfg) {
  cfg_.validate();
  cfg_.jacobi_weight = cfg_.effective_jacobi_weight(grid.dim);
  const int L = cfg_.levels;
  const int nd = grid.dofs_per_node();
  const int div = 1 << (L - 1);
  auto check_axis = [&](int nel, const char* name) {
    if (nel % div != 0)
      throw ConfigError(std::string("multigrid: ") + name + "=" +
                        std::to_string(nel) + " not divisible by 2^(levels-1)=" +
                        std::to_string(div));
  };
  check_axis(grid.nelx, "nelx");
  check_axis(grid.nely, "nely");
  if (grid.dim == 3) check_axis(grid.nelz, "nelz");

  // Level 0 lattice mirrors the fine DofMap; coarser fixed sets are
  // inherited from the coincident fine node (index doubled per axis).
  std::vector<Lattice> lat(L);
  lat[0].dim = grid.dim;
  lat[0].nelx = grid.nelx;
  lat[0].nely = grid.nely;
  lat[0].nelz = grid.dim == 3 ? grid.nelz : 0;
  lat[0].free_index.resize(grid.dof_count());
  for (int d = 0; d < grid.dof_count(); ++d) {
    lat[0].free_index[d] = dofmap.free_index(d);
    if (dofmap.free_index(d) >= 0) lat[0].free_to_dof.push_back(d);
  }

  for (int l = 1; l < L; ++l) {
    Lattice& c = lat[l];
    const Lattice& f = lat[l - 1];
    c.dim = f.dim;
    c.nelx = f.nelx / 2;
    c.nely = f.nely / 2;
    c.nelz = f.dim == 3 ? f.nelz / 2 : 0;
    c.free_index.assign(static_cast<std::size_t>(c.node_count()) * nd, -1);
    for (int iz = 0; iz < c.nodes_z(); ++iz)
      for (int iy = 0; iy < c.nodes_y(); ++iy)
        for (int ix = 0; ix < c.nodes_x(); ++ix) {
          const int cn = c.node(ix, iy, iz);
          const int fn = f.node(2 * ix, 2 * iy, 2 * iz);
          for (int a = 0; a < nd; ++a) {
            if (f.free_index[fn * nd + a] >= 0) {
              c.free_index[cn * nd + a] =
                  static_cast<int>(c.free_to_dof.size());
              c.free_to_dof.push_back(cn * nd + a);
            }
          }
        }
  }

  // Prolongations: rows over fine free DOFs, columns over coarse free DOFs.
  P_.resize(L - 1);
  for (int l = 0; l + 1 < L; ++l) {
    const Lattice& f = lat[l];
    const Lattice& c = lat[l + 1];
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(f.free_to_dof.size() * (grid.dim == 3 ? 8 : 4));
    auto axis_weights = [](int i, int (&idx)[2], double (&w)[2]) {
      if (i % 2 == 0) {
        idx[0] = i / 2;
        w[0] = 1.0;
        idx[1] = -1;
        w[1] = 0.0;
      } else {
        idx[0] = (i - 1) / 2;
        idx[1] = (i + 1) / 2;
        w[0] = w[1] = 0.5;
      }
    };
    for (int iz = 0; iz < f.nodes_z(); ++iz) {
      int zi[2] = {0, -1};
      double zw[2] = {1.0, 0.0};
      if (grid.dim == 3) axis_weights(iz, zi, zw);
      for (int iy = 0; iy < f.nodes_y(); ++iy) {
        int yi[2];
        double yw[2];
        axis_weights(iy, yi, yw);
        for (int ix = 0; ix < f.nodes_x(); ++ix) {
          int xi[2];
          double xw[2];
          axis_weights(ix, xi, xw);
          const int fn = f.node(ix, iy, iz);
          for (int a = 0; a < nd; ++a) {
            const int row = f.free_index[fn * nd + a];
            if (row < 0) continue;  // fixed fine DOF: zero row
            for (int kz = 0; kz < 2; ++kz) {
              if (zi[kz] < 0) continue;
              for (int ky = 0; ky < 2; ++ky) {
                if (yi[ky] < 0) continue;
                for (int kx = 0; kx < 2; ++kx) {
                  if (xi[kx] < 0) continue;
                  const int cn = c.node(xi[kx], yi[ky], zi[kz]);
                  const int col = c.free_index[cn * nd + a];
                  if (col < 0) continue;
                  trips.emplace_back(row, col, xw[kx] * yw[ky] * zw[kz]);
                }
              }
            }
          }
        }
      }
    }
    P_[l].resize(static_cast<int>(f.free_to_dof.size()),
                 static_cast<int>(c.free_to_dof.size()));
    P_[l].setFromTriplets(trips.begin(), trips.end());
    P_[l].makeCompressed();
  }

  K_.resize(L);
  inv_diag_.resize(L);
}

void MultigridHierarchy::update(const Eigen::SparseMatrix<double>& fine) {
  if (fine.rows() != P_[0].rows())
    throw ParamError("multigrid: fine operator size mismatch");
  K_[0] = fine;
  for (std::size_t l = 0; l + 1 < K_.size(); ++l) {
    Eigen::SparseMatrix<double> KP = K_[l] * P_[l];
    K_[l + 1] = P_[l].transpose() * KP;
    K_[l + 1].makeCompressed();
  }
  for (std::size_t l = 0; l < K_.size(); ++l) {
    inv_diag_[l] = K_[l].diagonal().cwiseInverse();
    if (!inv_diag_[l].allFinite())
      throw SolverError("multigrid: zero diagonal entry on level " +
                        std::to_string(l));
  }
  if (!coarse_analyzed_) {
    coarse_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    coarse_->analyzePattern(K_.back());
    coarse_analyzed_ = true;
  }
  coarse_->factorize(K_.back());
  if (coarse_->info() != Eigen::Success)
    throw SolverError("multigrid: coarsest-level factorization failed");
  ready_ = true;
}

void MultigridHierarchy::cycle(int level, const Eigen::VectorXd& f,
                               Eigen::VectorXd& u) const {
  const Eigen::SparseMatrix<double>& K = K_[level];
  const Eigen::VectorXd& dinv = inv_diag_[level];
  const double w = cfg_.jacobi_weight;

  for (int s = 0; s < cfg_.pre_smooth; ++s)
    u += w * dinv.cwiseProduct(f - K * u);

  Eigen::VectorXd rc = P_[level].transpose() * (f - K * u);
  Eigen::VectorXd ec;
  if (level + 2 == levels()) {
    ec = coarse_->solve(rc);
  } else {
    ec = Eigen::VectorXd::Zero(rc.size());
    cycle(level + 1, rc, ec);
  }
  u += P_[level] * ec;

  for (int s = 0; s < cfg_.post_smooth; ++s)
    u += w * dinv.cwiseProduct(f - K * u);
}

Eigen::VectorXd MultigridHierarchy::vcycle(const Eigen::VectorXd& f,
                                           const Eigen::VectorXd& u0) const {
  if (!ready_) throw SolverError("multigrid: hierarchy not updated");
  Eigen::VectorXd u = u0;
  cycle(0, f, u);
  return u;
}

Eigen::VectorXd MultigridHierarchy::precondition(const Eigen::VectorXd& r) const {
  return vcycle(r, Eigen::VectorXd::Zero(r.size()));
}

MultigridHierarchy build_hierarchy(const StiffnessAssembler& assembler,
                                   const std::vector<double>& moduli,
                                   double min_modulus,
                                   const MultigridConfig& cfg) {
  MultigridHierarchy hier(assembler.grid(), assembler.dofmap(), cfg);
  SymmetricOperator op;
  assembler.assemble(moduli, min_modulus, op);
  hier.update(op.matrix());
  return hier;
}

MgcgResult mgcg(const MultigridHierarchy& hier, const Eigen::VectorXd& f,
                const Eigen::VectorXd& u0, const MultigridConfig& cfg) {
  const Eigen::SparseMatrix<double>& K = hier.op(0);
  MgcgResult res;
  const double fnorm = f.norm();
  if (fnorm == 0.0) {
    res.u = Eigen::VectorXd::Zero(K.rows());
    return res;
  }

  res.u = u0.size() == K.rows() ? u0 : Eigen::VectorXd::Zero(K.rows());
  Eigen::VectorXd r = f - K * res.u;
  res.residual = r.norm() / fnorm;
  if (res.residual <= cfg.cg_tol) return res;

  Eigen::VectorXd z = hier.precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int k = 1; k <= cfg.max_cg; ++k) {
    const Eigen::VectorXd q = K * p;
    const double alpha = rz / p.dot(q);
    res.u += alpha * p;
    r -= alpha * q;
    res.iterations = k;
    res.residual = r.norm() / fnorm;
    if (res.residual <= cfg.cg_tol) return res;
    z = hier.precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  res.hit_cap = true;
  return res;
}

Eigen::VectorXd direct_solve(const Eigen::SparseMatrix<double>& K,
                             const Eigen::VectorXd& f, int max_free_dofs) {
  DirectSolver solver(max_free_dofs);
  solver.factorize(K);
  return solver.solve(K, f);
}

void DirectSolver::factorize(const Eigen::SparseMatrix<double>& K) {
  if (K.rows() > max_free_dofs_)
    throw SolverError("direct solve refused: " + std::to_string(K.rows()) +
                      " free DOFs exceed cap " + std::to_string(max_free_dofs_) +
                      "; use the mgcg solver for problems this size");
  if (!analyzed_) {
    ldlt_->analyzePattern(K);
    analyzed_ = true;
  }
  ldlt_->factorize(K);
  if (ldlt_->info() != Eigen::Success)
    throw SolverError("direct solve: factorization failed");
}

Eigen::VectorXd DirectSolver::solve(const Eigen::SparseMatrix<double>& K,
                                    const Eigen::VectorXd& f) const {
  Eigen::VectorXd u = ldlt_->solve(f);
  const double fnorm = f.norm();
  if (fnorm == 0.0) return Eigen::VectorXd::Zero(f.size());
  // A couple of refinement sweeps keep the residual at reference quality
  // even for high-contrast moduli.
  for (int sweep = 0; sweep < 3; ++sweep) {
    const Eigen::VectorXd r = f - K * u;
    if (r.norm() / fnorm <= 1e-10) return u;
    u += ldlt_->solve(r);
  }
  if ((f - K * u).norm() / fnorm > 1e-10)
    throw SolverError("direct solve: refinement failed to reach 1e-10");
  return u;
}

}  // namespace topo
