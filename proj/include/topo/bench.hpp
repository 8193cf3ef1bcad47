#pragma once

#include <string>
#include <utility>
#include <vector>

#include "topo/optimizer.hpp"
#include "topo/presets.hpp"

namespace topo {

struct RunTotals {
  double objective = 0.0;          // internal readout of the last loop
  double objective_checked = 0.0;  // final design, reference-quality solve
  double solve_seconds = 0.0;
  long mgcg_evaluations = 0;
  long cg_total = 0;
  double avg_cg = 0.0;
  long reduced_accepted = 0;
  long reduced_rejected = 0;
  int clamped = 0;
  int iterations = 0;
  bool converged = false;
};

struct RunReport {
  ProblemSpec spec;
  std::vector<IterationRecord> records;
  RunTotals totals;
};

// Runs one optimization. With a nonempty out_dir, writes iterations.csv,
// density.pgm (2D) or density.vtk (3D), and summary.txt.
RunReport run_spec(const ProblemSpec& spec, const std::string& out_dir);

std::string summary_text(const RunReport& report);

struct CompareRow {
  std::string mode;
  bool ok = false;
  std::string error;
  RunTotals totals;
  double diff_pct = 0.0;  // objective difference vs the reference mode
  double speedup = 0.0;   // reference solve time / this mode's solve time
};

struct CompareReport {
  std::vector<CompareRow> rows;  // rows[0] is the reference
};

// Runs the spec once per mode (first mode = reference). Failed runs are
// annotated and do not stop the comparison.
CompareReport compare_modes(const ProblemSpec& spec,
                            const std::vector<std::string>& modes,
                            const std::string& out_dir);

std::string compare_csv(const CompareReport& report);
std::string compare_table(const CompareReport& report);

using SweepAxis = std::pair<std::string, std::vector<std::string>>;

struct SweepCell {
  std::vector<std::pair<std::string, std::string>> overrides;
  bool ok = false;
  std::string error;
  RunTotals totals;
};

struct SweepReport {
  std::vector<std::string> keys;
  std::vector<SweepCell> cells;
};

// Cartesian product over the axes; per-cell failures are recorded and the
// sweep continues.
SweepReport sweep_spec(const ProblemSpec& base,
                       const std::vector<SweepAxis>& axes,
                       const std::string& out_dir);

std::string sweep_csv(const SweepReport& report);

}  // namespace topo
