#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "topo/assembly.hpp"
#include "topo/grid.hpp"

namespace topo {

struct MultigridConfig {
  int levels = 3;          // total grid levels, fine included
  int pre_smooth = 1;      // damped-Jacobi sweeps before coarse correction
  int post_smooth = 1;     // and after
  // Damping of the Jacobi smoother; 0 selects a dimension-dependent value
  // (0.8 for quadrilaterals, 0.5 for hexahedra, which keeps the sweep
  // convergent: the trilinear element has lambda_max(D^-1 K) above 3).
  double jacobi_weight = 0.0;
  double cg_tol = 1e-6;    // relative force residual stopping rule
  int max_cg = 200;

  void validate() const;
  double effective_jacobi_weight(int dim) const {
    return jacobi_weight > 0.0 ? jacobi_weight : (dim == 3 ? 0.5 : 0.8);
  }
};

// Geometric hierarchy on nested structured lattices. Prolongations are
// bilinear/trilinear between node lattices and are built once; level
// operators are Galerkin products refreshed via update() whenever the fine
// operator changes.
class MultigridHierarchy {
public:
  MultigridHierarchy(const StructuredGrid& grid, const DofMap& dofmap,
                     const MultigridConfig& cfg);

  int levels() const { return static_cast<int>(K_.size()); }
  bool ready() const { return ready_; }
  const MultigridConfig& config() const { return cfg_; }

  // Refresh Galerkin operators and the coarsest factorization for a new
  // fine-level operator (same pattern as built for).
  void update(const Eigen::SparseMatrix<double>& fine);

  const Eigen::SparseMatrix<double>& op(int level) const { return K_[level]; }
  // Interpolation from level+1 (coarse) to level.
  const Eigen::SparseMatrix<double>& prolongation(int level) const {
    return P_[level];
  }

  // One V-cycle for K u = f starting from u0.
  Eigen::VectorXd vcycle(const Eigen::VectorXd& f,
                         const Eigen::VectorXd& u0) const;
  // Preconditioner application: one V-cycle from a zero initial guess.
  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const;

private:
  void cycle(int level, const Eigen::VectorXd& f, Eigen::VectorXd& u) const;

  MultigridConfig cfg_;
  std::vector<Eigen::SparseMatrix<double>> P_;
  std::vector<Eigen::SparseMatrix<double>> K_;
  std::vector<Eigen::VectorXd> inv_diag_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> coarse_;
  bool coarse_analyzed_ = false;
  bool ready_ = false;
};

// Assembles K(moduli) and returns a numerically ready hierarchy.
MultigridHierarchy build_hierarchy(const StiffnessAssembler& assembler,
                                   const std::vector<double>& moduli,
                                   double min_modulus,
                                   const MultigridConfig& cfg);

struct MgcgResult {
  Eigen::VectorXd u;
  int iterations = 0;
  bool hit_cap = false;
  double residual = 0.0;  // relative force residual at exit
};

// Conjugate gradients preconditioned by one V-cycle of `hier`.
MgcgResult mgcg(const MultigridHierarchy& hier, const Eigen::VectorXd& f,
                const Eigen::VectorXd& u0, const MultigridConfig& cfg);

// Sparse Cholesky reference solve with iterative refinement down to a
// 1e-10 relative residual. Guarded by a free-DOF cap.
Eigen::VectorXd direct_solve(const Eigen::SparseMatrix<double>& K,
                             const Eigen::VectorXd& f,
                             int max_free_dofs = 400000);

// Repeated direct solves with a fixed sparsity pattern (reference solver
// inside the optimization loop). Symbolic analysis happens once.
class DirectSolver {
public:
  explicit DirectSolver(int max_free_dofs = 400000)
      : max_free_dofs_(max_free_dofs) {}
  void factorize(const Eigen::SparseMatrix<double>& K);
  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& K,
                        const Eigen::VectorXd& f) const;

private:
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_ =
      std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  bool analyzed_ = false;
  int max_free_dofs_;
};

}  // namespace topo
