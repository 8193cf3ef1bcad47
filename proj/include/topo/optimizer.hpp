#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "topo/filter.hpp"
#include "topo/grid.hpp"
#include "topo/multigrid.hpp"
#include "topo/reanalysis.hpp"

namespace topo {

enum class ObjectiveKind { compliance, output_displacement };
enum class SolverMode { direct, mgcg, aarmr };

const char* to_string(SolverMode mode);
SolverMode solver_mode_from_string(const std::string& s);

struct OptProblem {
  StructuredGrid grid;
  DofMap dofmap;
  LoadCase loads;
  ObjectiveKind objective = ObjectiveKind::compliance;
  int output_dof = -1;  // global DOF of the output port (inverter only)
  double volume_fraction = 0.5;
  double poisson = 0.3;
  SimpLaw law;
  double filter_radius = 2.5;
};

struct OptConfig {
  int max_iterations = 200;
  double change_tol = 0.01;  // stop below this max |d rho|; 0 disables
  double move_limit = 0.2;
  double oc_damping = 0.5;
  SolverMode mode = SolverMode::mgcg;
  MultigridConfig mg;
  ReanalysisConfig reanalysis;
  int direct_dof_cap = 400000;
  // Optional per-loop volume fraction override (1-based loop index).
  std::function<double(int)> volume_schedule;
};

struct IterationRecord {
  int loop = 0;
  double objective = 0.0;
  double volume = 0.0;      // mean physical density after the update
  double change_pct = 0.0;  // mean |d rho| * 100
  std::string path;         // warmup | carm-accepted | carm-rejected | mgcg | direct
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  long cg_iterations = 0;
  double solve_seconds = 0.0;
};

struct OcResult {
  std::vector<double> design;
  double lambda = 0.0;
  int clamped = 0;  // positive sensitivities zeroed before the update
};

// Optimality-criteria update with Lagrange-multiplier bisection so that the
// filtered candidate meets the volume fraction to 1e-9 relative (or stays
// below it when the move limit cannot reach it; the bound is an
// inequality). design_floor keeps the multiplicative update alive for
// signed (mechanism) sensitivities; elements at exactly zero could never
// regrow.
OcResult oc_update(const std::vector<double>& rho,
                   const std::vector<double>& dC,
                   const std::vector<double>& dV, const FilterKernel& kernel,
                   double volume_fraction, double move_limit,
                   bool clamp_positive = true, double design_floor = 0.0,
                   double damping = 0.5);

// Mean absolute density change, in percent.
double change_metric(const std::vector<double>& now,
                     const std::vector<double>& before);

struct OptimizeResult {
  DensityField field;
  std::vector<IterationRecord> records;
  bool converged = false;
  long mgcg_evaluations = 0;  // all systems (adjoint included)
  long mgcg_evaluations_primary = 0;
  long reduced_accepted = 0;
  long reduced_rejected = 0;
  long cg_total = 0;          // all systems
  long cg_primary_total = 0;  // equilibrium system only
  double solve_seconds_total = 0.0;
  int clamped_sensitivities = 0;
};

OptimizeResult optimize(const OptProblem& problem, const OptConfig& config);

}  // namespace topo
