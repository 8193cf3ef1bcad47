#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "topo/assembly.hpp"
#include "topo/multigrid.hpp"

namespace topo {

struct ReanalysisConfig {
  int history_columns = 2;   // size of the projection basis (N_s)
  int expansion_terms = 2;   // series terms in the reduced basis (N_m)
  double residual_tol = 0.01;  // accept reduced solutions below this
  int activation_loop = 20;  // reduced solves start after this loop (N_on)

  void validate() const;
};

// FIFO block of normalized displacement snapshots, oldest column first.
class ProjectionBasis {
public:
  explicit ProjectionBasis(int capacity);

  int capacity() const { return capacity_; }
  int columns() const { return static_cast<int>(phi_.cols()); }
  bool full() const { return columns() == capacity_; }
  const Eigen::MatrixXd& matrix() const { return phi_; }

  // Appends u / |u|; evicts the oldest column beyond capacity.
  void insert(const Eigen::VectorXd& u);

private:
  int capacity_;
  Eigen::MatrixXd phi_;
};

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Rank-s approximate inverse of a reference operator:
// v -> Phi (Phi' K0 Phi)^{-1} Phi' v. The s x s projection is formed with s
// operator applies and factored once per construction.
class ProjectedInverse {
public:
  ProjectedInverse(const ProjectionBasis& basis, const ApplyFn& apply_reference);

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  const Eigen::MatrixXd& reduced_matrix() const { return k_phi_; }

private:
  Eigen::MatrixXd phi_;
  Eigen::MatrixXd k_phi_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

// Series basis seeded by the previous solution and orthonormalized by a
// thin SVD; columns with singular values below svd_rel_tol * sigma_max are
// dropped.
struct ReducedBasis {
  Eigen::MatrixXd raw;          // columns r_1 .. r_m before orthonormalization
  Eigen::MatrixXd orthonormal;  // retained left singular vectors
  int rank() const { return static_cast<int>(orthonormal.cols()); }
};

ReducedBasis build_reduced_basis(const Eigen::VectorXd& seed, int terms,
                                 const ProjectedInverse& inverse,
                                 const ApplyFn& apply_delta,
                                 double svd_rel_tol = 1e-12);

struct ReducedSolution {
  Eigen::VectorXd y;   // coefficients in the basis
  Eigen::VectorXd u;   // basis * y
  double residual = 0.0;  // |K u - f| / |f|
};

// Galerkin solve restricted to the span of an orthonormal basis.
ReducedSolution reduced_solve(const ApplyFn& apply_current,
                              const Eigen::MatrixXd& basis,
                              const Eigen::VectorXd& f);

enum class SolvePath { warmup, reduced_accepted, reduced_rejected };

const char* to_string(SolvePath path);

struct ReanalysisOutcome {
  SolvePath path = SolvePath::warmup;
  double residual = std::numeric_limits<double>::quiet_NaN();  // reduced-model force residual
  int cg_iterations = 0;     // CG iterations if MGCG ran this call
  bool cg_hit_cap = false;
  double mgcg_residual = std::numeric_limits<double>::quiet_NaN();
};

struct ReanalysisState {
  ReanalysisState(int free_dofs, const ReanalysisConfig& cfg)
      : reference_moduli(), last_solution(Eigen::VectorXd::Zero(free_dofs)),
        history(cfg.history_columns) {}

  std::vector<double> reference_moduli;  // empty until the first solve
  Eigen::VectorXd last_solution;
  ProjectionBasis history;

  long mgcg_evaluations = 0;
  long reduced_solves = 0;
  long accepted = 0;
  long rejected = 0;
};

using MgcgFn = std::function<MgcgResult(const Eigen::VectorXd& f,
                                        const Eigen::VectorXd& u0)>;

// One equilibrium solve of the adaptive scheme: warm-up MGCG before the
// activation loop (capturing the trailing solutions into the projection
// basis), reduced solves afterwards with an MGCG fallback and basis refresh
// whenever the force-residual criterion fails. Updates the reference moduli
// and last solution in every case.
ReanalysisOutcome reanalysis_solve(ReanalysisState& state,
                                   const StiffnessAssembler& assembler,
                                   const std::vector<double>& moduli_now,
                                   const SymmetricOperator& K_now,
                                   const Eigen::VectorXd& f, int loop,
                                   const ReanalysisConfig& cfg,
                                   const MgcgFn& run_mgcg,
                                   Eigen::VectorXd& u_out);

}  // namespace topo
