#include "topo/filter.hpp"

#include <cmath>
#include <string>

#include "topo/errors.hpp"

namespace topo {

double simp_modulus(double phys, const SimpLaw& law) {
  if (!(phys >= 0.0 && phys <= 1.0))
    throw ParamError("simp: density outside [0, 1]");
  return law.Emin + (law.E0 - law.Emin) * std::pow(phys, law.penal);
}

std::vector<double> simp_moduli(const std::vector<double>& phys,
                                const SimpLaw& law) {
  std::vector<double> E(phys.size());
  for (std::size_t i = 0; i < phys.size(); ++i) E[i] = simp_modulus(phys[i], law);
  return E;
}

double simp_derivative(double phys, const SimpLaw& law) {
  return law.penal * (law.E0 - law.Emin) * std::pow(phys, law.penal - 1.0);
}

FilterKernel::FilterKernel(const StructuredGrid& grid, double radius)
    : radius_(radius) {
  if (!(radius > 0.0)) throw ParamError("filter: radius must be positive");
  const int ne = grid.element_count();
  const int win = std::max(0, static_cast<int>(std::ceil(radius)) - 1);

  offsets_.assign(ne + 1, 0);
  weight_sum_.assign(ne, 0.0);
  neighbors_.reserve(static_cast<std::size_t>(ne) * (2 * win + 1));
  weights_.reserve(neighbors_.capacity());

  const int nz = grid.dim == 3 ? grid.nelz : 1;
  for (int ez = 0; ez < nz; ++ez) {
    for (int ey = 0; ey < grid.nely; ++ey) {
      for (int ex = 0; ex < grid.nelx; ++ex) {
        const int e = grid.element_index(ex, ey, ez);
        double sum = 0.0;
        const int z0 = std::max(0, ez - win), z1 = std::min(nz - 1, ez + win);
        const int y0 = std::max(0, ey - win), y1 = std::min(grid.nely - 1, ey + win);
        const int x0 = std::max(0, ex - win), x1 = std::min(grid.nelx - 1, ex + win);
        for (int jz = z0; jz <= z1; ++jz) {
          for (int jy = y0; jy <= y1; ++jy) {
            for (int jx = x0; jx <= x1; ++jx) {
              const double dx = jx - ex, dy = jy - ey, dz = jz - ez;
              const double w =
                  radius - std::sqrt(dx * dx + dy * dy + dz * dz);
              if (w <= 0.0) continue;
              neighbors_.push_back(grid.element_index(jx, jy, jz));
              weights_.push_back(w);
              sum += w;
            }
          }
        }
        weight_sum_[e] = sum;
        offsets_[e + 1] = static_cast<int>(neighbors_.size());
      }
    }
  }
}

std::vector<double> FilterKernel::apply(const std::vector<double>& design) const {
  const int ne = element_count();
  if (static_cast<int>(design.size()) != ne)
    throw ParamError("filter: field size mismatch");
  std::vector<double> phys(ne);
  for (int e = 0; e < ne; ++e) {
    double acc = 0.0;
    for (int k = offsets_[e]; k < offsets_[e + 1]; ++k)
      acc += weights_[k] * design[neighbors_[k]];
    phys[e] = acc / weight_sum_[e];
  }
  return phys;
}

std::vector<double> FilterKernel::apply_transpose(
    const std::vector<double>& v) const {
  const int ne = element_count();
  if (static_cast<int>(v.size()) != ne)
    throw ParamError("filter: field size mismatch");
  std::vector<double> out(ne, 0.0);
  for (int e = 0; e < ne; ++e) {
    const double scaled = v[e] / weight_sum_[e];
    for (int k = offsets_[e]; k < offsets_[e + 1]; ++k)
      out[neighbors_[k]] += weights_[k] * scaled;
  }
  return out;
}

std::vector<double> compliance_sensitivity(const StiffnessAssembler& assembler,
                                           const std::vector<double>& phys,
                                           const SimpLaw& law,
                                           const Eigen::VectorXd& u) {
  std::vector<double> q = assembler.element_quadratic_form(u, u);
  for (std::size_t e = 0; e < q.size(); ++e)
    q[e] *= -simp_derivative(phys[e], law);
  return q;
}

std::vector<double> adjoint_sensitivity(const StiffnessAssembler& assembler,
                                        const std::vector<double>& phys,
                                        const SimpLaw& law,
                                        const Eigen::VectorXd& lambda,
                                        const Eigen::VectorXd& u) {
  std::vector<double> q = assembler.element_quadratic_form(lambda, u);
  for (std::size_t e = 0; e < q.size(); ++e)
    q[e] *= simp_derivative(phys[e], law);
  return q;
}

}  // namespace topo
