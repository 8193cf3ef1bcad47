#pragma once

#include <Eigen/Dense>
#include <vector>

#include "topo/assembly.hpp"
#include "topo/grid.hpp"

namespace topo {

// Power-law interpolation of Young's modulus in the physical density.
struct SimpLaw {
  double E0 = 1.0;
  double Emin = 1e-9;
  double penal = 3.0;
};

// Design densities and their filtered (physical) image.
struct DensityField {
  std::vector<double> design;
  std::vector<double> physical;
};

double simp_modulus(double phys, const SimpLaw& law);
std::vector<double> simp_moduli(const std::vector<double>& phys,
                                const SimpLaw& law);
// d E_e / d rho_e, used by all sensitivity paths.
double simp_derivative(double phys, const SimpLaw& law);

// Cone-weighted neighborhood averaging between element centers.
// Weight of neighbor j around element i is max(0, r - |x_i - x_j|);
// neighbor lists are precomputed once per grid.
class FilterKernel {
public:
  FilterKernel(const StructuredGrid& grid, double radius);

  double radius() const { return radius_; }
  int element_count() const { return static_cast<int>(weight_sum_.size()); }
  int neighbor_begin(int e) const { return offsets_[e]; }
  int neighbor_end(int e) const { return offsets_[e + 1]; }
  int neighbor(int k) const { return neighbors_[k]; }
  double weight(int k) const { return weights_[k]; }
  double weight_sum(int e) const { return weight_sum_[e]; }

  // physical = F design, with unit row sums.
  std::vector<double> apply(const std::vector<double>& design) const;
  // F' v: maps sensitivities w.r.t. physical densities back to design space.
  std::vector<double> apply_transpose(const std::vector<double>& v) const;

private:
  double radius_;
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
  std::vector<double> weights_;
  std::vector<double> weight_sum_;
};

// dC/d(physical density) for end-compliance: -dE_e * u_e' Ke u_e.
// The global stiffness derivative is never assembled.
std::vector<double> compliance_sensitivity(const StiffnessAssembler& assembler,
                                           const std::vector<double>& phys,
                                           const SimpLaw& law,
                                           const Eigen::VectorXd& u);

// dE_e * lambda_e' Ke u_e per element; sign conventions are applied by the
// caller (see optimizer).
std::vector<double> adjoint_sensitivity(const StiffnessAssembler& assembler,
                                        const std::vector<double>& phys,
                                        const SimpLaw& law,
                                        const Eigen::VectorXd& lambda,
                                        const Eigen::VectorXd& u);

}  // namespace topo
