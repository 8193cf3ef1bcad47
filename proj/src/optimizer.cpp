#include "topo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>

#include "topo/errors.hpp"

namespace topo {

const char* to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::direct: return "direct";
    case SolverMode::mgcg: return "mgcg";
    case SolverMode::aarmr: return "aarmr";
  }
  return "?";
}

SolverMode solver_mode_from_string(const std::string& s) {
  if (s == "direct") return SolverMode::direct;
  if (s == "mgcg") return SolverMode::mgcg;
  if (s == "aarmr") return SolverMode::aarmr;
  throw ParamError("unknown solver mode '" + s + "' (direct|mgcg|aarmr)");
}

OcResult oc_update(const std::vector<double>& rho,
                   const std::vector<double>& dC,
                   const std::vector<double>& dV, const FilterKernel& kernel,
                   double volume_fraction, double move_limit,
                   bool clamp_positive, double design_floor, double damping) {
  const std::size_t n = rho.size();
  if (dC.size() != n || dV.size() != n)
    throw ParamError("oc_update: field size mismatch");
  if (!(move_limit > 0.0 && move_limit <= 1.0))
    throw ParamError("oc_update: move limit must be in (0, 1]");
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0))
    throw ParamError("oc_update: volume fraction must be in (0, 1)");

  OcResult res;
  std::vector<double> dc(n);
  for (std::size_t e = 0; e < n; ++e) {
    dc[e] = dC[e];
    if (dc[e] > 0.0) {
      dc[e] = 0.0;
      if (clamp_positive) ++res.clamped;
    }
  }

  std::vector<double> cand(n);
  auto volume_at = [&](double lambda) {
    for (std::size_t e = 0; e < n; ++e) {
      const double be =
          std::pow(std::max(0.0, -dc[e]) / (lambda * dV[e]), damping);
      double x = rho[e] * be;
      x = std::clamp(x, rho[e] - move_limit, rho[e] + move_limit);
      cand[e] = std::clamp(x, design_floor, 1.0);
    }
    const std::vector<double> phys = kernel.apply(cand);
    double vol = 0.0;
    for (double p : phys) vol += p;
    return vol / static_cast<double>(n);
  };

  double lo = 1e-9, hi = 1e9;
  const double v_lo = volume_at(lo);  // most material
  const double v_hi = volume_at(hi);  // least material
  if (volume_fraction < v_hi - 1e-12)
    throw SolverError(
        "oc_update: volume target " + std::to_string(volume_fraction) +
        " cannot be met; the least-material step still has volume " +
        std::to_string(v_hi));
  if (v_lo < volume_fraction - 1e-12) {
    // The volume bound is an inequality; when even the largest admissible
    // step stays below the target the constraint is inactive and the
    // full-growth step is taken.
    res.lambda = lo;
    volume_at(lo);
    res.design = cand;
    return res;
  }

  double vol = v_lo;
  while ((hi - lo) / (hi + lo) > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    vol = volume_at(mid);
    if (vol > volume_fraction)
      lo = mid;
    else
      hi = mid;
    if (std::abs(vol - volume_fraction) <= 1e-10 * volume_fraction) {
      res.lambda = mid;
      res.design = cand;
      return res;
    }
  }
  res.lambda = 0.5 * (lo + hi);
  vol = volume_at(res.lambda);
  if (std::abs(vol - volume_fraction) > 1e-9 * volume_fraction)
    throw SolverError("oc_update: bisection failed to meet the volume target");
  res.design = cand;
  return res;
}

double change_metric(const std::vector<double>& now,
                     const std::vector<double>& before) {
  if (now.size() != before.size())
    throw ParamError("change_metric: field size mismatch");
  double sum = 0.0;
  for (std::size_t e = 0; e < now.size(); ++e)
    sum += std::abs(now[e] - before[e]);
  return sum / static_cast<double>(now.size()) * 100.0;
}

namespace {

// Rebuilds the Galerkin chain at most once per design iteration, and only
// when an MGCG evaluation actually happens (reduced solves skip it).
class LazyHierarchy {
public:
  LazyHierarchy(const StructuredGrid& grid, const DofMap& dofmap,
                const MultigridConfig& cfg)
      : hier_(grid, dofmap, cfg) {}

  void invalidate() { current_ = false; }
  MultigridHierarchy& refresh(const SymmetricOperator& op) {
    if (!current_) {
      hier_.update(op.matrix());
      current_ = true;
    }
    return hier_;
  }

private:
  MultigridHierarchy hier_;
  bool current_ = false;
};

struct SolveStats {
  SolvePath path = SolvePath::warmup;
  bool reduced = false;  // true when any reduced path was taken
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  long cg_iterations = 0;
};

}  // namespace

OptimizeResult optimize(const OptProblem& problem, const OptConfig& config) {
  const StructuredGrid& grid = problem.grid;
  const int ne = grid.element_count();
  if (!(problem.volume_fraction > 0.0 && problem.volume_fraction < 1.0))
    throw ParamError("optimize: volume fraction must be in (0, 1)");
  const bool inverter = problem.objective == ObjectiveKind::output_displacement;
  if (inverter && problem.output_dof < 0)
    throw ConfigError("optimize: output DOF required for the inverter objective");

  StiffnessAssembler assembler(grid, problem.dofmap, problem.poisson);
  const FilterKernel kernel(grid, problem.filter_radius);
  const Eigen::VectorXd f = build_load(grid, problem.dofmap, problem.loads);
  const int nfree = assembler.free_count();

  // Chain-ruled volume sensitivity (constant for unit elements).
  const std::vector<double> dV = kernel.apply_transpose(
      std::vector<double>(ne, 1.0));

  int out_idx = -1;
  Eigen::VectorXd adjoint_rhs;
  if (inverter) {
    out_idx = problem.dofmap.free_index(problem.output_dof);
    if (out_idx < 0)
      throw ConfigError("optimize: output DOF is fixed");
    adjoint_rhs = Eigen::VectorXd::Zero(nfree);
    adjoint_rhs[out_idx] = -1.0;
  }

  OptimizeResult result;
  const double v0 =
      config.volume_schedule ? config.volume_schedule(1) : problem.volume_fraction;
  std::vector<double> rho(ne, v0);
  std::vector<double> phys = kernel.apply(rho);
  result.field = {rho, phys};
  if (config.max_iterations < 1) return result;

  switch (config.mode) {
    case SolverMode::direct:
      break;
    case SolverMode::mgcg:
    case SolverMode::aarmr:
      config.mg.validate();
      break;
  }
  if (config.mode == SolverMode::aarmr) config.reanalysis.validate();

  std::optional<LazyHierarchy> lazy;
  if (config.mode != SolverMode::direct)
    lazy.emplace(grid, problem.dofmap, config.mg);
  DirectSolver direct(config.direct_dof_cap);
  ReanalysisState state_u(nfree, config.reanalysis);
  long adjoint_mgcg_calls = 0;

  SymmetricOperator op;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nfree);
  Eigen::VectorXd adj = Eigen::VectorXd::Zero(nfree);

  for (int loop = 1; loop <= config.max_iterations; ++loop) {
    const double volume_target = config.volume_schedule
                                     ? config.volume_schedule(loop)
                                     : problem.volume_fraction;

    const std::vector<double> moduli = simp_moduli(phys, problem.law);
    assembler.assemble(moduli, problem.law.Emin, op);
    if (lazy) lazy->invalidate();

    SolveStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    switch (config.mode) {
      case SolverMode::direct: {
        direct.factorize(op.matrix());
        u = direct.solve(op.matrix(), f);
        if (inverter) adj = direct.solve(op.matrix(), adjoint_rhs);
        stats.path = SolvePath::warmup;  // unused for this mode
        break;
      }
      case SolverMode::mgcg: {
        MultigridHierarchy& hier = lazy->refresh(op);
        MgcgResult r = mgcg(hier, f, u, config.mg);
        stats.cg_iterations += r.iterations;
        ++result.mgcg_evaluations;
        ++result.mgcg_evaluations_primary;
        result.cg_primary_total += r.iterations;
        u = std::move(r.u);
        if (inverter) {
          MgcgResult ra = mgcg(hier, adjoint_rhs, adj, config.mg);
          stats.cg_iterations += ra.iterations;
          ++result.mgcg_evaluations;
          adj = std::move(ra.u);
        }
        break;
      }
      case SolverMode::aarmr: {
        const MgcgFn run = [&](const Eigen::VectorXd& rhs,
                               const Eigen::VectorXd& u0) {
          return mgcg(lazy->refresh(op), rhs, u0, config.mg);
        };
        ReanalysisOutcome oc = reanalysis_solve(state_u, assembler, moduli, op,
                                                f, loop, config.reanalysis,
                                                run, u);
        stats.path = oc.path;
        stats.reduced = true;
        stats.epsilon = oc.residual;
        stats.cg_iterations += oc.cg_iterations;
        result.cg_primary_total += oc.cg_iterations;
        if (inverter) {
          // Only the equilibrium system is reduced; the adjoint stays on
          // MGCG so the signed sensitivities keep solver-grade accuracy.
          MgcgResult ra = mgcg(lazy->refresh(op), adjoint_rhs, adj, config.mg);
          stats.cg_iterations += ra.iterations;
          ++adjoint_mgcg_calls;
          adj = std::move(ra.u);
        }
        break;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double solve_seconds =
        std::chrono::duration<double>(t1 - t0).count();

    double objective;
    std::vector<double> d_phys;
    if (!inverter) {
      objective = f.dot(u);
      d_phys = compliance_sensitivity(assembler, phys, problem.law, u);
    } else {
      objective = -u[out_idx];
      d_phys = adjoint_sensitivity(assembler, phys, problem.law, adj, u);
      for (double& s : d_phys) s = -s;
    }

    const std::vector<double> d_rho = kernel.apply_transpose(d_phys);
    OcResult oc = oc_update(rho, d_rho, dV, kernel, volume_target,
                            config.move_limit, !inverter,
                            inverter ? 1e-3 : 0.0, config.oc_damping);
    if (oc.clamped > 0 && result.clamped_sensitivities == 0)
      std::cerr << "warning: clamped " << oc.clamped
                << " positive compliance sensitivities at loop " << loop
                << " (approximate displacements)\n";
    result.clamped_sensitivities += oc.clamped;

    double max_change = 0.0;
    for (int e = 0; e < ne; ++e)
      max_change = std::max(max_change, std::abs(oc.design[e] - rho[e]));
    const double w = change_metric(oc.design, rho);

    rho = std::move(oc.design);
    phys = kernel.apply(rho);
    double volume = 0.0;
    for (double p : phys) volume += p;
    volume /= static_cast<double>(ne);

    IterationRecord rec;
    rec.loop = loop;
    rec.objective = objective;
    rec.volume = volume;
    rec.change_pct = w;
    rec.path = config.mode == SolverMode::aarmr ? to_string(stats.path)
                                                : to_string(config.mode);
    rec.epsilon = stats.epsilon;
    rec.cg_iterations = stats.cg_iterations;
    rec.solve_seconds = solve_seconds;
    result.cg_total += stats.cg_iterations;
    result.solve_seconds_total += solve_seconds;
    result.records.push_back(std::move(rec));

    if (config.change_tol > 0.0 && max_change < config.change_tol) {
      result.converged = true;
      break;
    }
  }

  if (config.mode == SolverMode::aarmr) {
    result.mgcg_evaluations = state_u.mgcg_evaluations + adjoint_mgcg_calls;
    result.mgcg_evaluations_primary = state_u.mgcg_evaluations;
    result.reduced_accepted = state_u.accepted;
    result.reduced_rejected = state_u.rejected;
  }

  result.field = {rho, phys};
  return result;
}

}  // namespace topo
