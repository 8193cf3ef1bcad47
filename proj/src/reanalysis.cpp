#include "topo/reanalysis.hpp"

#include <cmath>

#include "topo/errors.hpp"

namespace topo {

void ReanalysisConfig::validate() const {
  if (history_columns < 1)
    throw ParamError("reanalysis: history columns must be >= 1");
  if (expansion_terms < 1)
    throw ParamError("reanalysis: expansion terms must be >= 1");
  if (!(residual_tol > 0.0))
    throw ParamError("reanalysis: residual tolerance must be > 0");
  if (activation_loop <= history_columns)
    throw ParamError(
        "reanalysis: activation loop must exceed the history size");
}

ProjectionBasis::ProjectionBasis(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ParamError("projection basis: capacity must be >= 1");
}

void ProjectionBasis::insert(const Eigen::VectorXd& u) {
  const double norm = u.norm();
  if (!(norm > 0.0))
    throw ParamError("projection basis: cannot insert a zero vector");
  if (phi_.rows() == 0) phi_.resize(u.size(), 0);
  if (phi_.rows() != u.size())
    throw ParamError("projection basis: vector size mismatch");

  if (columns() < capacity_) {
    phi_.conservativeResize(Eigen::NoChange, columns() + 1);
  } else {
    // evict the oldest column
    for (int c = 0; c + 1 < columns(); ++c) phi_.col(c) = phi_.col(c + 1);
  }
  phi_.col(columns() - 1) = u / norm;
}

ProjectedInverse::ProjectedInverse(const ProjectionBasis& basis,
                                   const ApplyFn& apply_reference) {
  if (basis.columns() < 1)
    throw DegenerateBasisError("projected inverse: empty projection basis");
  phi_ = basis.matrix();
  const int s = static_cast<int>(phi_.cols());
  k_phi_.resize(s, s);
  for (int c = 0; c < s; ++c)
    k_phi_.col(c) = phi_.transpose() * apply_reference(phi_.col(c));
  k_phi_ = 0.5 * (k_phi_ + k_phi_.transpose()).eval();
  lu_.compute(k_phi_);
  if (!lu_.isInvertible())
    throw DegenerateBasisError(
        "projected inverse: projected operator is singular");
}

Eigen::VectorXd ProjectedInverse::apply(const Eigen::VectorXd& v) const {
  return phi_ * lu_.solve(phi_.transpose() * v);
}

ReducedBasis build_reduced_basis(const Eigen::VectorXd& seed, int terms,
                                 const ProjectedInverse& inverse,
                                 const ApplyFn& apply_delta,
                                 double svd_rel_tol) {
  if (terms < 1) throw ParamError("reduced basis: terms must be >= 1");
  ReducedBasis rb;
  rb.raw.resize(seed.size(), terms);
  rb.raw.col(0) = seed;
  for (int i = 1; i < terms; ++i)
    rb.raw.col(i) = -inverse.apply(apply_delta(rb.raw.col(i - 1)));

  Eigen::BDCSVD<Eigen::MatrixXd> svd(rb.raw, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma[0] : 0.0;
  if (!(smax > 0.0))
    throw DegenerateBasisError("reduced basis: all columns are zero");
  int rank = 0;
  while (rank < sigma.size() && sigma[rank] >= svd_rel_tol * smax) ++rank;
  rb.orthonormal = svd.matrixU().leftCols(rank);
  return rb;
}

ReducedSolution reduced_solve(const ApplyFn& apply_current,
                              const Eigen::MatrixXd& basis,
                              const Eigen::VectorXd& f) {
  const int rank = static_cast<int>(basis.cols());
  if (rank < 1) throw DegenerateBasisError("reduced solve: empty basis");
  const double fnorm = f.norm();
  if (!(fnorm > 0.0)) throw ParamError("reduced solve: zero load vector");

  Eigen::MatrixXd W(basis.rows(), rank);  // K * basis
  for (int c = 0; c < rank; ++c) W.col(c) = apply_current(basis.col(c));

  Eigen::MatrixXd Kr = basis.transpose() * W;
  Kr = 0.5 * (Kr + Kr.transpose()).eval();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Kr);
  if (!lu.isInvertible())
    throw DegenerateBasisError("reduced solve: projected system is singular");

  ReducedSolution sol;
  sol.y = lu.solve(basis.transpose() * f);
  sol.u = basis * sol.y;
  sol.residual = (W * sol.y - f).norm() / fnorm;
  return sol;
}

const char* to_string(SolvePath path) {
  switch (path) {
    case SolvePath::warmup: return "warmup";
    case SolvePath::reduced_accepted: return "carm-accepted";
    case SolvePath::reduced_rejected: return "carm-rejected";
  }
  return "?";
}

ReanalysisOutcome reanalysis_solve(ReanalysisState& state,
                                   const StiffnessAssembler& assembler,
                                   const std::vector<double>& moduli_now,
                                   const SymmetricOperator& K_now,
                                   const Eigen::VectorXd& f, int loop,
                                   const ReanalysisConfig& cfg,
                                   const MgcgFn& run_mgcg,
                                   Eigen::VectorXd& u_out) {
  cfg.validate();
  ReanalysisOutcome out;
  Eigen::VectorXd mgcg_seed = state.last_solution;

  auto mgcg_into_history = [&](SolvePath path, bool capture) {
    MgcgResult res = run_mgcg(f, mgcg_seed);
    ++state.mgcg_evaluations;
    out.cg_iterations = res.iterations;
    out.cg_hit_cap = res.hit_cap;
    out.mgcg_residual = res.residual;
    out.path = path;
    if (capture && res.u.norm() > 0.0) state.history.insert(res.u);
    u_out = std::move(res.u);
  };

  if (loop <= cfg.activation_loop) {
    // Warm-up phase; the trailing history_columns solutions fill the basis
    // so it is complete when the activation loop is reached.
    const bool capture = loop > cfg.activation_loop - cfg.history_columns;
    mgcg_into_history(SolvePath::warmup, capture);
  } else {
    bool fall_back = false;
    try {
      if (!state.history.full())
        throw DegenerateBasisError("reanalysis: projection basis not full");
      const ApplyFn apply_ref = [&](const Eigen::VectorXd& v) {
        return assembler.apply_moduli(state.reference_moduli, v);
      };
      const ApplyFn apply_dk = [&](const Eigen::VectorXd& v) {
        return assembler.apply_delta(v, moduli_now, state.reference_moduli);
      };
      ProjectedInverse inverse(state.history, apply_ref);
      ReducedBasis rb = build_reduced_basis(state.last_solution,
                                            cfg.expansion_terms, inverse,
                                            apply_dk);
      ReducedSolution sol = reduced_solve(
          [&](const Eigen::VectorXd& v) { return K_now.apply(v); },
          rb.orthonormal, f);
      ++state.reduced_solves;
      out.residual = sol.residual;
      if (sol.residual < cfg.residual_tol) {
        ++state.accepted;
        out.path = SolvePath::reduced_accepted;
        u_out = std::move(sol.u);
      } else {
        // the rejected solution is still the best available initial guess
        mgcg_seed = std::move(sol.u);
        fall_back = true;
      }
    } catch (const DegenerateBasisError&) {
      fall_back = true;
    }
    if (fall_back) {
      ++state.rejected;
      mgcg_into_history(SolvePath::reduced_rejected, true);
    }
  }

  state.last_solution = u_out;
  state.reference_moduli = moduli_now;
  return out;
}

}  // namespace topo
