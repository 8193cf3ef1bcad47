#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "topo/grid.hpp"

namespace topo {

// Global stiffness operator over free DOFs. Owned storage, refilled in
// place by StiffnessAssembler across design iterations.
class SymmetricOperator {
public:
  const Eigen::SparseMatrix<double>& matrix() const { return K_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }
  int rows() const { return static_cast<int>(K_.rows()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return K_ * x; }

private:
  friend class StiffnessAssembler;
  Eigen::SparseMatrix<double> K_;
  Eigen::VectorXd diag_;
};

// Assembles and applies the global stiffness for a fixed grid/support
// layout. The sparsity pattern and per-element scatter maps are built once;
// assemble() only rewrites values.
class StiffnessAssembler {
public:
  StiffnessAssembler(StructuredGrid grid, DofMap dofmap, double poisson);

  const StructuredGrid& grid() const { return grid_; }
  const DofMap& dofmap() const { return dofmap_; }
  const Eigen::MatrixXd& element_matrix() const { return Ke_; }
  double poisson() const { return poisson_; }
  int free_count() const { return dofmap_.free_count(); }

  // K(moduli) over free DOFs, springs added to the diagonal.
  // Every modulus must satisfy min_modulus <= E_e (and be positive).
  void assemble(const std::vector<double>& moduli, double min_modulus,
                SymmetricOperator& op) const;

  // y = K(moduli) * x without touching assembled storage.
  Eigen::VectorXd apply_moduli(const std::vector<double>& moduli,
                               const Eigen::VectorXd& x) const;

  // y = (K(moduli_new) - K(moduli_old)) * x, element by element;
  // the difference operator is never materialized.
  Eigen::VectorXd apply_delta(const Eigen::VectorXd& x,
                              const std::vector<double>& moduli_new,
                              const std::vector<double>& moduli_old) const;

  // Element-local congruence a_e' * Ke * b_e for every element, with fixed
  // DOFs contributing zero. Used by sensitivity evaluations.
  std::vector<double> element_quadratic_form(const Eigen::VectorXd& a,
                                             const Eigen::VectorXd& b) const;

private:
  void check_moduli_size(const std::vector<double>& m) const;

  StructuredGrid grid_;
  DofMap dofmap_;
  double poisson_;
  Eigen::MatrixXd Ke_;
  int edofs_;
  std::vector<std::int32_t> elem_free_;  // element-local free DOF ids, -1 fixed
  Eigen::SparseMatrix<double> pattern_;
  std::vector<std::int32_t> slots_;  // (e, i, j) -> value slot, -1 if dropped
};

// Free-DOF load vector. Throws ConfigError for loads on fixed DOFs,
// missing nodes, or an all-zero result.
Eigen::VectorXd build_load(const StructuredGrid& grid, const DofMap& dofmap,
                           const LoadCase& loads);

}  // namespace topo
