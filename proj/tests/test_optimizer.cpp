#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "topo/errors.hpp"
#include "topo/optimizer.hpp"
#include "topo/presets.hpp"

using namespace topo;

namespace {

// Independent zooming lambda scan: brackets the volume target on a log grid
// and refines until the interval collapses.
double lambda_scan(const std::vector<double>& rho, const std::vector<double>& dc,
                   const std::vector<double>& dv, const FilterKernel& kernel,
                   double volfrac, double move) {
  auto volume_at = [&](double lambda) {
    std::vector<double> cand(rho.size());
    for (std::size_t e = 0; e < rho.size(); ++e) {
      const double be =
          std::sqrt(std::max(0.0, -std::min(dc[e], 0.0)) / (lambda * dv[e]));
      cand[e] = std::clamp(std::clamp(rho[e] * be, rho[e] - move, rho[e] + move),
                           0.0, 1.0);
    }
    const auto phys = kernel.apply(cand);
    double vol = 0.0;
    for (double p : phys) vol += p;
    return vol / static_cast<double>(rho.size());
  };

  double lo = 1e-9, hi = 1e9;
  for (int zoom = 0; zoom < 40; ++zoom) {
    const int steps = 64;
    double best_lo = lo, best_hi = hi;
    for (int i = 0; i < steps; ++i) {
      const double a = lo * std::pow(hi / lo, i / double(steps));
      const double b = lo * std::pow(hi / lo, (i + 1) / double(steps));
      if (volume_at(a) >= volfrac && volfrac >= volume_at(b)) {
        best_lo = a;
        best_hi = b;
        break;
      }
    }
    lo = best_lo;
    hi = best_hi;
    if ((hi - lo) / (hi + lo) < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("oc update keeps a uniform field at the volume fraction") {
  const auto grid = StructuredGrid::make2d(8, 4);
  FilterKernel kernel(grid, 2.5);
  const int ne = grid.element_count();
  const double V = 0.4;
  const std::vector<double> rho(ne, V);
  const std::vector<double> dc(ne, -1.0);
  const std::vector<double> dv = kernel.apply_transpose(std::vector<double>(ne, 1.0));

  const OcResult res = oc_update(rho, dc, dv, kernel, V, 0.2);
  // dv varies near boundaries, so exact uniformity is not preserved, but
  // the volume constraint must hold tightly.
  double vol = 0.0;
  for (double p : kernel.apply(res.design)) vol += p;
  vol /= ne;
  CHECK(std::abs(vol - V) <= 1e-9 * V);

  // with a spatially constant volume sensitivity it is a strict fixed point
  const std::vector<double> dv1(ne, 1.0);
  const OcResult res1 = oc_update(rho, dc, dv1, kernel, V, 0.2);
  for (double x : res1.design) CHECK(x == doctest::Approx(V).epsilon(1e-9));
}

TEST_CASE("a dominant sensitivity saturates its element at full move") {
  const auto grid = StructuredGrid::make2d(4, 2);
  FilterKernel kernel(grid, 1.0);  // identity filter isolates the element
  const int ne = grid.element_count();
  std::vector<double> rho(ne, 0.5);
  std::vector<double> dc(ne, -1e-9);
  dc[3] = -1e12;
  const std::vector<double> dv(ne, 1.0);

  const OcResult res = oc_update(rho, dc, dv, kernel, 0.5, 1.0);
  CHECK(res.design[3] == 1.0);
  for (int e = 0; e < ne; ++e)
    if (e != 3) CHECK(res.design[e] < 0.5);
  double vol = 0.0;
  for (double p : kernel.apply(res.design)) vol += p;
  CHECK(std::abs(vol / ne - 0.5) <= 1e-9 * 0.5);
}

TEST_CASE("oc update agrees with an independent lambda scan") {
  const auto grid = StructuredGrid::make2d(6, 4);
  FilterKernel kernel(grid, 1.8);
  const int ne = grid.element_count();
  const auto rho = testutil::random_densities(ne, 91);
  std::vector<double> dc(ne);
  std::mt19937 gen(92);
  std::uniform_real_distribution<double> dist(0.1, 2.0);
  for (double& v : dc) v = -dist(gen);
  const std::vector<double> dv = kernel.apply_transpose(std::vector<double>(ne, 1.0));

  const double V = 0.45;
  const OcResult res = oc_update(rho, dc, dv, kernel, V, 0.2);
  const double lam_ref = lambda_scan(rho, dc, dv, kernel, V, 0.2);
  CHECK(res.lambda == doctest::Approx(lam_ref).epsilon(1e-6));

  std::vector<double> expect(ne);
  for (int e = 0; e < ne; ++e) {
    const double be = std::sqrt(-dc[e] / (lam_ref * dv[e]));
    expect[e] =
        std::clamp(std::clamp(rho[e] * be, rho[e] - 0.2, rho[e] + 0.2), 0.0, 1.0);
  }
  for (int e = 0; e < ne; ++e)
    CHECK(res.design[e] == doctest::Approx(expect[e]).epsilon(1e-6));
}

TEST_CASE("positive compliance sensitivities are clamped and counted") {
  const auto grid = StructuredGrid::make2d(4, 2);
  FilterKernel kernel(grid, 1.0);
  const int ne = grid.element_count();
  const std::vector<double> rho(ne, 0.5);
  std::vector<double> dc(ne, -1.0);
  dc[0] = 0.5;
  dc[5] = 0.1;
  const std::vector<double> dv(ne, 1.0);
  const OcResult res = oc_update(rho, dc, dv, kernel, 0.5, 0.2);
  CHECK(res.clamped == 2);
}

TEST_CASE("an unreachable volume target fails the bracket") {
  const auto grid = StructuredGrid::make2d(4, 2);
  FilterKernel kernel(grid, 2.5);
  const int ne = grid.element_count();
  const std::vector<double> rho(ne, 0.9);
  const std::vector<double> dc(ne, -1.0);
  const std::vector<double> dv(ne, 1.0);
  CHECK_THROWS_AS(oc_update(rho, dc, dv, kernel, 0.5, 0.05), SolverError);
}

TEST_CASE("change metric") {
  CHECK(change_metric({0.2, 0.4, 0.6}, {0.2, 0.4, 0.6}) == 0.0);
  CHECK(change_metric({0.21, 0.41, 0.61}, {0.2, 0.4, 0.6}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const auto a = testutil::random_densities(40, 95);
  const auto b = testutil::random_densities(40, 96);
  double acc = 0.0;
  for (int i = 0; i < 40; ++i) acc += std::abs(a[i] - b[i]);
  CHECK(change_metric(a, b) == doctest::Approx(acc / 40.0 * 100.0).epsilon(1e-14));
}

TEST_CASE("equilibrium identity for the compliance objective") {
  auto fx = testutil::cantilever2d(8, 4);
  StiffnessAssembler assembler(fx.grid, fx.dofmap, 0.3);
  SimpLaw law;
  const auto phys = testutil::random_densities(fx.grid.element_count(), 97);
  SymmetricOperator op;
  assembler.assemble(simp_moduli(phys, law), law.Emin, op);
  const Eigen::VectorXd f = build_load(fx.grid, fx.dofmap, fx.loads);
  const Eigen::VectorXd u = direct_solve(op.matrix(), f);
  const double c1 = f.dot(u);
  const double c2 = u.dot(op.apply(u));
  CHECK(std::abs(c1 - c2) <= 1e-10 * std::abs(c1));
}

namespace {

// Small inverter model matching the preset layout.
BuiltProblem small_inverter(int nelx, int nely, const std::string& mode) {
  ProblemSpec spec = default_spec("inverter2d");
  apply_override(spec, "nelx", std::to_string(nelx));
  apply_override(spec, "nely", std::to_string(nely));
  apply_override(spec, "mode", mode);
  return build_problem(spec);
}

double inverter_objective(const BuiltProblem& bp,
                          const std::vector<double>& phys) {
  StiffnessAssembler assembler(bp.problem.grid, bp.problem.dofmap,
                               bp.problem.poisson);
  SymmetricOperator op;
  assembler.assemble(simp_moduli(phys, bp.problem.law), bp.problem.law.Emin, op);
  const Eigen::VectorXd f =
      build_load(bp.problem.grid, bp.problem.dofmap, bp.problem.loads);
  const Eigen::VectorXd u = direct_solve(op.matrix(), f);
  return -u[bp.problem.dofmap.free_index(bp.problem.output_dof)];
}

}  // namespace

TEST_CASE("inverter system is solvable and the output stays finite") {
  const BuiltProblem bp = small_inverter(8, 4, "direct");
  const auto phys = testutil::random_densities(bp.problem.grid.element_count(), 98);
  const double c = inverter_objective(bp, phys);
  CHECK(std::isfinite(c));
}

TEST_CASE("inverter adjoint gradient matches finite differences") {
  const BuiltProblem bp = small_inverter(8, 4, "direct");
  const auto& problem = bp.problem;
  StiffnessAssembler assembler(problem.grid, problem.dofmap, problem.poisson);
  const auto phys = testutil::random_densities(problem.grid.element_count(), 99);

  SymmetricOperator op;
  assembler.assemble(simp_moduli(phys, problem.law), problem.law.Emin, op);
  const Eigen::VectorXd f = build_load(problem.grid, problem.dofmap, problem.loads);
  const Eigen::VectorXd u = direct_solve(op.matrix(), f);
  const int out_idx = problem.dofmap.free_index(problem.output_dof);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(u.size());
  l[out_idx] = -1.0;
  const Eigen::VectorXd adj = direct_solve(op.matrix(), l);

  auto grad = adjoint_sensitivity(assembler, phys, problem.law, adj, u);
  for (double& g : grad) g = -g;

  const double h = 1e-6;
  double max_scale = 0.0;
  for (double g : grad) max_scale = std::max(max_scale, std::abs(g));
  for (int e = 0; e < problem.grid.element_count(); ++e) {
    auto plus = phys, minus = phys;
    plus[e] += h;
    minus[e] -= h;
    const double fd =
        (inverter_objective(bp, plus) - inverter_objective(bp, minus)) /
        (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[e]), 1e-9 * max_scale});
    CHECK(std::abs(grad[e] - fd) / denom <= 1e-4);
  }
}

TEST_CASE("a zero iteration cap returns the uniform initial field") {
  ProblemSpec spec = default_spec("cantilever2d");
  apply_override(spec, "nelx", "16");
  apply_override(spec, "nely", "8");
  apply_override(spec, "mode", "direct");
  apply_override(spec, "max_iters", "0");
  const BuiltProblem bp = build_problem(spec);
  const OptimizeResult res = optimize(bp.problem, bp.config);
  CHECK(res.records.empty());
  for (double r : res.field.design) CHECK(r == 0.5);
}

TEST_CASE("direct-mode cantilever run decreases compliance and meets volume") {
  ProblemSpec spec = default_spec("cantilever2d");
  apply_override(spec, "nelx", "60");
  apply_override(spec, "nely", "20");
  apply_override(spec, "mode", "direct");
  apply_override(spec, "max_iters", "30");
  apply_override(spec, "conv_tol", "0");
  const BuiltProblem bp = build_problem(spec);
  const OptimizeResult res = optimize(bp.problem, bp.config);
  REQUIRE(res.records.size() == 30);

  const auto& rec = res.records;
  CHECK(rec.back().objective < 0.95 * rec[4].objective);
  for (std::size_t k = 5; k + 1 < rec.size(); ++k)
    CHECK(rec[k + 1].objective <= rec[k].objective * 1.02);
  CHECK(std::abs(rec.back().volume - 0.5) <= 1e-9 * 0.5);
  for (const auto& r : rec) CHECK(r.path == "direct");
}

TEST_CASE("optimization is deterministic") {
  ProblemSpec spec = default_spec("cantilever2d");
  apply_override(spec, "nelx", "24");
  apply_override(spec, "nely", "12");
  apply_override(spec, "mode", "mgcg");
  apply_override(spec, "levels", "2");
  apply_override(spec, "max_iters", "8");
  apply_override(spec, "conv_tol", "0");
  const BuiltProblem bp = build_problem(spec);
  const OptimizeResult a = optimize(bp.problem, bp.config);
  const OptimizeResult b = optimize(bp.problem, bp.config);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].objective == b.records[i].objective);
    CHECK(a.records[i].volume == b.records[i].volume);
    CHECK(a.records[i].change_pct == b.records[i].change_pct);
    CHECK(a.records[i].cg_iterations == b.records[i].cg_iterations);
  }
}

TEST_CASE("solver modes share the loop skeleton and activation contract") {
  ProblemSpec spec = default_spec("cantilever2d");
  apply_override(spec, "nelx", "32");
  apply_override(spec, "nely", "16");
  apply_override(spec, "levels", "2");
  apply_override(spec, "max_iters", "16");
  apply_override(spec, "conv_tol", "0");
  apply_override(spec, "non", "8");

  apply_override(spec, "mode", "mgcg");
  BuiltProblem ref = build_problem(spec);
  const OptimizeResult rm = optimize(ref.problem, ref.config);

  apply_override(spec, "mode", "aarmr");
  BuiltProblem bp = build_problem(spec);
  const OptimizeResult ra = optimize(bp.problem, bp.config);

  REQUIRE(rm.records.size() == ra.records.size());
  for (std::size_t i = 0; i < rm.records.size(); ++i) {
    CHECK(rm.records[i].loop == ra.records[i].loop);
    CHECK(rm.records[i].path == "mgcg");
    const auto& ar = ra.records[i];
    if (ar.loop <= 8) {
      CHECK(ar.path == "warmup");  // no reduced solve before activation
      CHECK(std::isnan(ar.epsilon));
    } else {
      CHECK((ar.path == "carm-accepted" || ar.path == "carm-rejected"));
      CHECK(std::isfinite(ar.epsilon));
    }
  }
  // both modes optimize the same problem to a similar objective
  CHECK(std::abs(ra.records.back().objective - rm.records.back().objective) <=
        0.01 * std::abs(rm.records.back().objective));
}

TEST_CASE("volume schedule overrides the per-loop target") {
  ProblemSpec spec = default_spec("volschedule2d");
  apply_override(spec, "nelx", "32");
  apply_override(spec, "nely", "16");
  apply_override(spec, "mode", "mgcg");
  apply_override(spec, "levels", "2");
  apply_override(spec, "max_iters", "60");
  apply_override(spec, "conv_tol", "0");
  const BuiltProblem bp = build_problem(spec);
  const OptimizeResult res = optimize(bp.problem, bp.config);
  REQUIRE(res.records.size() == 60);
  CHECK(res.records[48].volume == doctest::Approx(0.48).epsilon(1e-9));
  CHECK(res.records[52].volume == doctest::Approx(0.48 - 0.005 * 3).epsilon(1e-9));
  CHECK(res.records[58].volume == doctest::Approx(0.45).epsilon(1e-9));
}

TEST_CASE("an unreachable-from-below target takes the full-growth step") {
  // Mostly positive (clamped) sensitivities shrink almost every element;
  // the volume bound is an inequality, so the update must not fail.
  const auto grid = StructuredGrid::make2d(4, 2);
  FilterKernel kernel(grid, 1.0);
  const int ne = grid.element_count();
  const std::vector<double> rho(ne, 0.3);
  std::vector<double> dc(ne, 0.5);
  dc[0] = -1.0;
  const std::vector<double> dv(ne, 1.0);

  const OcResult res = oc_update(rho, dc, dv, kernel, 0.45, 0.1);
  CHECK(res.design[0] == doctest::Approx(0.4).epsilon(1e-12));
  for (int e = 1; e < ne; ++e)
    CHECK(res.design[e] == doctest::Approx(0.2).epsilon(1e-12));
  double vol = 0.0;
  for (double p : kernel.apply(res.design)) vol += p;
  CHECK(vol / ne < 0.45);  // below the target, which is feasible
}
