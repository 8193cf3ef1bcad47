#include "topo/assembly.hpp"

#include <string>

#include "topo/element.hpp"
#include "topo/errors.hpp"

namespace topo {

StiffnessAssembler::StiffnessAssembler(StructuredGrid grid, DofMap dofmap,
                                       double poisson)
    : grid_(grid), dofmap_(std::move(dofmap)), poisson_(poisson) {
  Ke_ = element_stiffness(grid_.dim, poisson);
  const int npe = grid_.nodes_per_element();
  const int nd = grid_.dofs_per_node();
  edofs_ = npe * nd;
  const int ne = grid_.element_count();

  elem_free_.resize(static_cast<std::size_t>(ne) * edofs_);
  std::array<int, 8> nodes{};
  for (int e = 0; e < ne; ++e) {
    grid_.element_nodes(e, nodes);
    for (int i = 0; i < npe; ++i)
      for (int a = 0; a < nd; ++a)
        elem_free_[static_cast<std::size_t>(e) * edofs_ + i * nd + a] =
            dofmap_.free_index(DofMap::dof_of(nodes[i], a, nd));
  }

  // Structural pass: pattern with zero values, then per-element value slots.
  const int n = dofmap_.free_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(ne) * edofs_ * edofs_ / 2);
  for (int e = 0; e < ne; ++e) {
    const auto* ef = &elem_free_[static_cast<std::size_t>(e) * edofs_];
    for (int i = 0; i < edofs_; ++i) {
      if (ef[i] < 0) continue;
      for (int j = 0; j < edofs_; ++j)
        if (ef[j] >= 0) trips.emplace_back(ef[i], ef[j], 0.0);
    }
  }
  for (const Spring& s : dofmap_.springs()) {
    const int i = dofmap_.free_index(s.dof);
    trips.emplace_back(i, i, 0.0);
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(trips.begin(), trips.end());
  pattern_.makeCompressed();

  slots_.assign(static_cast<std::size_t>(ne) * edofs_ * edofs_, -1);
  const auto* outer = pattern_.outerIndexPtr();
  const auto* inner = pattern_.innerIndexPtr();
  auto find_slot = [&](int row, int col) {
    int lo = outer[col], hi = outer[col + 1];  // column-major storage
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (inner[mid] < row)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  };
  for (int e = 0; e < ne; ++e) {
    const auto* ef = &elem_free_[static_cast<std::size_t>(e) * edofs_];
    auto* slot = &slots_[static_cast<std::size_t>(e) * edofs_ * edofs_];
    for (int i = 0; i < edofs_; ++i) {
      if (ef[i] < 0) continue;
      for (int j = 0; j < edofs_; ++j)
        if (ef[j] >= 0) slot[i * edofs_ + j] = find_slot(ef[i], ef[j]);
    }
  }
}

void StiffnessAssembler::check_moduli_size(const std::vector<double>& m) const {
  if (static_cast<int>(m.size()) != grid_.element_count())
    throw ParamError("assembler: moduli size " + std::to_string(m.size()) +
                     " != element count " +
                     std::to_string(grid_.element_count()));
}

void StiffnessAssembler::assemble(const std::vector<double>& moduli,
                                  double min_modulus,
                                  SymmetricOperator& op) const {
  check_moduli_size(moduli);
  for (double e : moduli)
    if (!(e >= min_modulus) || !(e > 0.0))
      throw ParamError("assembler: modulus below minimum or nonpositive");

  if (op.K_.nonZeros() != pattern_.nonZeros() || op.K_.rows() != pattern_.rows())
    op.K_ = pattern_;
  double* vals = op.K_.valuePtr();
  std::fill(vals, vals + op.K_.nonZeros(), 0.0);

  const int ne = grid_.element_count();
  const double* ke = Ke_.data();  // column-major edofs_ x edofs_
  for (int e = 0; e < ne; ++e) {
    const double Ee = moduli[e];
    const auto* slot = &slots_[static_cast<std::size_t>(e) * edofs_ * edofs_];
    for (int j = 0; j < edofs_; ++j) {
      const double* kcol = ke + static_cast<std::size_t>(j) * edofs_;
      const auto* srow = slot;  // slots indexed (i * edofs_ + j)
      for (int i = 0; i < edofs_; ++i) {
        const int s = srow[i * edofs_ + j];
        if (s >= 0) vals[s] += Ee * kcol[i];
      }
    }
  }
  for (const Spring& s : dofmap_.springs()) {
    const int i = dofmap_.free_index(s.dof);
    // diagonal slot lookup through coeffRef is fine here: springs are few
    op.K_.coeffRef(i, i) += s.stiffness;
  }
  op.diag_ = op.K_.diagonal();
}

Eigen::VectorXd StiffnessAssembler::apply_moduli(
    const std::vector<double>& moduli, const Eigen::VectorXd& x) const {
  check_moduli_size(moduli);
  if (x.size() != dofmap_.free_count())
    throw ParamError("assembler: vector size mismatch");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd xe(edofs_), ye(edofs_);
  const int ne = grid_.element_count();
  for (int e = 0; e < ne; ++e) {
    const auto* ef = &elem_free_[static_cast<std::size_t>(e) * edofs_];
    for (int i = 0; i < edofs_; ++i) xe[i] = ef[i] >= 0 ? x[ef[i]] : 0.0;
    ye.noalias() = (moduli[e] * Ke_) * xe;
    for (int i = 0; i < edofs_; ++i)
      if (ef[i] >= 0) y[ef[i]] += ye[i];
  }
  for (const Spring& s : dofmap_.springs()) {
    const int i = dofmap_.free_index(s.dof);
    y[i] += s.stiffness * x[i];
  }
  return y;
}

Eigen::VectorXd StiffnessAssembler::apply_delta(
    const Eigen::VectorXd& x, const std::vector<double>& moduli_new,
    const std::vector<double>& moduli_old) const {
  check_moduli_size(moduli_new);
  check_moduli_size(moduli_old);
  if (x.size() != dofmap_.free_count())
    throw ParamError("assembler: vector size mismatch");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd xe(edofs_), ye(edofs_);
  const int ne = grid_.element_count();
  for (int e = 0; e < ne; ++e) {
    const double dE = moduli_new[e] - moduli_old[e];
    if (dE == 0.0) continue;
    const auto* ef = &elem_free_[static_cast<std::size_t>(e) * edofs_];
    for (int i = 0; i < edofs_; ++i) xe[i] = ef[i] >= 0 ? x[ef[i]] : 0.0;
    ye.noalias() = (dE * Ke_) * xe;
    for (int i = 0; i < edofs_; ++i)
      if (ef[i] >= 0) y[ef[i]] += ye[i];
  }
  return y;  // springs cancel in the difference
}

std::vector<double> StiffnessAssembler::element_quadratic_form(
    const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (a.size() != dofmap_.free_count() || b.size() != dofmap_.free_count())
    throw ParamError("assembler: vector size mismatch");
  const int ne = grid_.element_count();
  std::vector<double> q(ne, 0.0);
  Eigen::VectorXd ae(edofs_), be(edofs_);
  for (int e = 0; e < ne; ++e) {
    const auto* ef = &elem_free_[static_cast<std::size_t>(e) * edofs_];
    for (int i = 0; i < edofs_; ++i) {
      ae[i] = ef[i] >= 0 ? a[ef[i]] : 0.0;
      be[i] = ef[i] >= 0 ? b[ef[i]] : 0.0;
    }
    q[e] = ae.dot(Ke_ * be);
  }
  return q;
}

Eigen::VectorXd build_load(const StructuredGrid& grid, const DofMap& dofmap,
                           const LoadCase& loads) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dofmap.free_count());
  if (loads.entries.empty())
    throw ConfigError("load case is empty; the load vector must be nonzero");
  for (const LoadEntry& le : loads.entries) {
    if (le.node < 0 || le.node >= grid.node_count())
      throw ConfigError("load node " + std::to_string(le.node) +
                        " does not exist");
    if (le.axis < 0 || le.axis >= grid.dofs_per_node())
      throw ConfigError("load axis out of range");
    const int dof = DofMap::dof_of(le.node, le.axis, grid.dofs_per_node());
    const int idx = dofmap.free_index(dof);
    if (idx < 0)
      throw ConfigError("load applied to fixed DOF " + std::to_string(dof));
    f[idx] += le.value;
  }
  if (f.norm() == 0.0)
    throw ConfigError("assembled load vector is zero");
  return f;
}

}  // namespace topo
