#pragma once

#include <string>
#include <vector>

#include "topo/optimizer.hpp"

namespace topo {

// Fully resolved run description: a named preset plus every overridable
// knob. Defaults come from the preset; overrides are applied by key.
struct ProblemSpec {
  std::string preset = "cantilever2d";
  int nelx = 0;
  int nely = 0;
  int nelz = 0;
  std::string mode = "aarmr";
  double volfrac = 0.5;
  double eps_tol = 0.01;
  int ns = 2;
  int nm = 2;
  int non = 20;
  int levels = 3;
  double cgtol = 1e-6;
  int maxcg = 200;
  int max_iters = 200;
  double conv_tol = 0.01;
  double move = 0.2;
  double damping = 0.5;
  double radius = 2.5;
  double penal = 3.0;
};

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);

// Preset defaults (benchmark-scale resolutions). Throws ConfigError for an
// unknown name.
ProblemSpec default_spec(const std::string& preset);

// Mutates one spec field by key; throws ConfigError for unknown keys or
// unparsable values. Keys match the struct field names.
void apply_override(ProblemSpec& spec, const std::string& key,
                    const std::string& value);

// Flat `key = value` file; the preset key (if present) is applied first.
ProblemSpec spec_from_config_file(const std::string& path);

struct BuiltProblem {
  OptProblem problem;
  OptConfig config;
};

BuiltProblem build_problem(const ProblemSpec& spec);

// Canonical text dump of supports, loads and springs; regression-locked by
// a golden file in the test suite.
std::string describe_boundary_conditions(const ProblemSpec& spec);

}  // namespace topo
