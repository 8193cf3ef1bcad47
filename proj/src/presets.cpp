#include "topo/presets.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "topo/errors.hpp"

namespace topo {

namespace {

const std::vector<std::string> kPresets = {
    "cantilever2d",       "halfwheel2d",        "ssbeam3d",
    "cantilever3d-case1", "cantilever3d-case2", "cantilever3d-case3",
    "cantilever3d-case4", "inverter2d",         "volschedule2d"};

bool starts_with(const std::string& s, const std::string& p) {
  return s.rfind(p, 0) == 0;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& preset_names() { return kPresets; }

bool is_preset(const std::string& name) {
  return std::find(kPresets.begin(), kPresets.end(), name) != kPresets.end();
}

ProblemSpec default_spec(const std::string& preset) {
  ProblemSpec s;
  s.preset = preset;
  if (preset == "cantilever2d") {
    s.nelx = 300;
    s.nely = 180;
    s.volfrac = 0.5;
    s.eps_tol = 0.001;
    s.maxcg = 200;
  } else if (preset == "halfwheel2d") {
    s.nelx = 320;
    s.nely = 160;
    s.volfrac = 0.5;
    s.eps_tol = 0.01;
    s.maxcg = 200;
  } else if (preset == "ssbeam3d") {
    s.nelx = 72;
    s.nely = 24;
    s.nelz = 48;
    s.volfrac = 0.2;
    s.eps_tol = 0.01;
    s.maxcg = 50;
  } else if (starts_with(preset, "cantilever3d-case")) {
    const bool large = preset == "cantilever3d-case4";
    s.nelx = large ? 64 : 48;
    s.nely = 16;
    s.nelz = large ? 32 : 24;
    s.volfrac = 0.3;
    s.eps_tol = 0.01;
    s.maxcg = 50;
    if (!is_preset(preset)) throw ConfigError("unknown preset '" + preset + "'");
  } else if (preset == "inverter2d") {
    s.nelx = 320;
    s.nely = 160;
    s.volfrac = 0.3;
    s.eps_tol = 0.001;
    s.maxcg = 200;
    s.move = 0.05;  // signed sensitivities destabilize larger steps
  } else if (preset == "volschedule2d") {
    s.nelx = 640;
    s.nely = 320;
    s.volfrac = 0.48;
    s.eps_tol = 0.01;
    s.maxcg = 200;
  } else {
    throw ConfigError("unknown preset '" + preset + "'");
  }
  return s;
}

void apply_override(ProblemSpec& spec, const std::string& key,
                    const std::string& value) {
  if (key == "preset") {
    const ProblemSpec fresh = default_spec(value);
    spec = fresh;
  } else if (key == "nelx") {
    spec.nelx = parse_int(key, value);
  } else if (key == "nely") {
    spec.nely = parse_int(key, value);
  } else if (key == "nelz") {
    spec.nelz = parse_int(key, value);
  } else if (key == "mode") {
    solver_mode_from_string(value);  // validate
    spec.mode = value;
  } else if (key == "volfrac") {
    spec.volfrac = parse_double(key, value);
  } else if (key == "eps_tol") {
    spec.eps_tol = parse_double(key, value);
  } else if (key == "ns") {
    spec.ns = parse_int(key, value);
  } else if (key == "nm") {
    spec.nm = parse_int(key, value);
  } else if (key == "non") {
    spec.non = parse_int(key, value);
  } else if (key == "levels") {
    spec.levels = parse_int(key, value);
  } else if (key == "cgtol") {
    spec.cgtol = parse_double(key, value);
  } else if (key == "maxcg") {
    spec.maxcg = parse_int(key, value);
  } else if (key == "max_iters") {
    spec.max_iters = parse_int(key, value);
  } else if (key == "conv_tol") {
    spec.conv_tol = parse_double(key, value);
  } else if (key == "move") {
    spec.move = parse_double(key, value);
  } else if (key == "damping") {
    spec.damping = parse_double(key, value);
  } else if (key == "radius") {
    spec.radius = parse_double(key, value);
  } else if (key == "penal") {
    spec.penal = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ProblemSpec spec_from_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  ProblemSpec spec;
  bool have_preset = false;
  for (const auto& [k, v] : pairs)
    if (k == "preset") {
      spec = default_spec(v);
      have_preset = true;
    }
  if (!have_preset) spec = default_spec(spec.preset);
  for (const auto& [k, v] : pairs)
    if (k != "preset") apply_override(spec, k, v);
  return spec;
}

namespace {

struct Geometry {
  std::vector<int> fixed;
  std::vector<Spring> springs;
  LoadCase loads;
  ObjectiveKind objective = ObjectiveKind::compliance;
  int output_dof = -1;
  std::function<double(int)> schedule;
};

Geometry make_geometry(const ProblemSpec& spec, const StructuredGrid& grid) {
  Geometry g;
  const int nd = grid.dofs_per_node();
  auto fix_node = [&](int node) {
    for (int a = 0; a < nd; ++a) g.fixed.push_back(DofMap::dof_of(node, a, nd));
  };

  if (spec.preset == "cantilever2d") {
    for (int iy = 0; iy <= grid.nely; ++iy) fix_node(grid.node_index(0, iy));
    g.loads.entries.push_back({grid.node_index(grid.nelx, grid.nely / 2), 1, -1.0});
  } else if (spec.preset == "halfwheel2d" || spec.preset == "volschedule2d") {
    fix_node(grid.node_index(0, 0));
    g.fixed.push_back(DofMap::dof_of(grid.node_index(grid.nelx, 0), 1, nd));
    g.loads.entries.push_back({grid.node_index(grid.nelx / 2, 0), 1, -1.0});
    if (spec.preset == "volschedule2d") {
      const double v0 = spec.volfrac;
      g.schedule = [v0](int loop) {
        if (loop <= 50) return v0;
        return std::max(v0 - 0.03, v0 - 0.005 * (loop - 50));
      };
    }
  } else if (spec.preset == "ssbeam3d") {
    fix_node(grid.node_index(0, 0, 0));
    fix_node(grid.node_index(grid.nelx, 0, 0));
    fix_node(grid.node_index(0, grid.nely, 0));
    fix_node(grid.node_index(grid.nelx, grid.nely, 0));
    g.loads.entries.push_back(
        {grid.node_index(grid.nelx / 2, grid.nely / 2, 0), 2, -1.0});
  } else if (starts_with(spec.preset, "cantilever3d-case")) {
    for (int iz = 0; iz <= grid.nelz; ++iz)
      for (int iy = 0; iy <= grid.nely; ++iy)
        fix_node(grid.node_index(0, iy, iz));
    const int ex = grid.nelx;
    const int my = grid.nely / 2;
    const int mz = grid.nelz / 2;
    if (spec.preset == "cantilever3d-case1") {
      g.loads.entries.push_back({grid.node_index(ex, my, mz), 2, -1.0});
    } else if (spec.preset == "cantilever3d-case2") {
      g.loads.entries.push_back({grid.node_index(ex, my, 0), 2, -0.5});
      g.loads.entries.push_back({grid.node_index(ex, my, grid.nelz), 2, -0.5});
    } else if (spec.preset == "cantilever3d-case3") {
      g.loads.entries.push_back({grid.node_index(ex, 0, 0), 2, -0.25});
      g.loads.entries.push_back({grid.node_index(ex, grid.nely, 0), 2, -0.25});
      g.loads.entries.push_back({grid.node_index(ex, 0, grid.nelz), 2, -0.25});
      g.loads.entries.push_back(
          {grid.node_index(ex, grid.nely, grid.nelz), 2, -0.25});
    } else {  // case4: line load discretized over the free-end bottom edge
      const double per_node = 1.0 / (grid.nely + 1);
      for (int iy = 0; iy <= grid.nely; ++iy)
        g.loads.entries.push_back({grid.node_index(ex, iy, 0), 2, -per_node});
    }
  } else if (spec.preset == "inverter2d") {
    // Symmetric half-model: the bottom edge is the symmetry plane.
    for (int ix = 0; ix <= grid.nelx; ++ix)
      g.fixed.push_back(DofMap::dof_of(grid.node_index(ix, 0), 1, nd));
    fix_node(grid.node_index(0, grid.nely));
    fix_node(grid.node_index(0, grid.nely - 1));
    const int in_dof = DofMap::dof_of(grid.node_index(0, 0), 0, nd);
    const int out_dof = DofMap::dof_of(grid.node_index(grid.nelx, 0), 0, nd);
    g.springs.push_back({in_dof, 1.0});
    g.springs.push_back({out_dof, 0.1});
    g.loads.entries.push_back({grid.node_index(0, 0), 0, -1.0});
    g.objective = ObjectiveKind::output_displacement;
    g.output_dof = out_dof;
  } else {
    throw ConfigError("unknown preset '" + spec.preset + "'");
  }
  return g;
}

}  // namespace

BuiltProblem build_problem(const ProblemSpec& spec) {
  if (!is_preset(spec.preset))
    throw ConfigError("unknown preset '" + spec.preset + "'");
  const bool is3d = spec.preset == "ssbeam3d" ||
                    starts_with(spec.preset, "cantilever3d-case");
  if (is3d && spec.nelz < 1)
    throw ConfigError("preset '" + spec.preset + "' needs nelz >= 1");
  if (!is3d && spec.nelz != 0)
    throw ConfigError("preset '" + spec.preset + "' is two-dimensional; nelz must stay 0");
  const StructuredGrid grid =
      is3d ? StructuredGrid::make3d(spec.nelx, spec.nely, spec.nelz)
           : StructuredGrid::make2d(spec.nelx, spec.nely);
  Geometry geo = make_geometry(spec, grid);

  BuiltProblem bp{OptProblem{grid, DofMap(grid, geo.fixed, geo.springs),
                             geo.loads, geo.objective, geo.output_dof,
                             spec.volfrac, 0.3, SimpLaw{}, spec.radius},
                  OptConfig{}};
  bp.problem.objective = geo.objective;
  bp.problem.output_dof = geo.output_dof;
  bp.problem.volume_fraction = spec.volfrac;
  bp.problem.law.penal = spec.penal;
  bp.problem.filter_radius = spec.radius;

  bp.config.max_iterations = spec.max_iters;
  bp.config.change_tol = spec.conv_tol;
  bp.config.move_limit = spec.move;
  bp.config.oc_damping = spec.damping;
  bp.config.mode = solver_mode_from_string(spec.mode);
  bp.config.mg.levels = spec.levels;
  bp.config.mg.cg_tol = spec.cgtol;
  bp.config.mg.max_cg = spec.maxcg;
  bp.config.reanalysis.history_columns = spec.ns;
  bp.config.reanalysis.expansion_terms = spec.nm;
  bp.config.reanalysis.residual_tol = spec.eps_tol;
  bp.config.reanalysis.activation_loop = spec.non;
  bp.config.volume_schedule = geo.schedule;
  return bp;
}

std::string describe_boundary_conditions(const ProblemSpec& spec) {
  const BuiltProblem bp = build_problem(spec);
  std::ostringstream os;
  os << "preset=" << spec.preset << " nelx=" << spec.nelx
     << " nely=" << spec.nely << " nelz=" << spec.nelz << "\n";
  os << "fixed[" << bp.problem.dofmap.fixed_dofs().size() << "]:";
  for (int d : bp.problem.dofmap.fixed_dofs()) os << " " << d;
  os << "\nloads:";
  for (const LoadEntry& le : bp.problem.loads.entries)
    os << " (" << le.node << "," << le.axis << "," << le.value << ")";
  os << "\nsprings:";
  for (const Spring& s : bp.problem.dofmap.springs())
    os << " (" << s.dof << "," << s.stiffness << ")";
  os << "\nobjective: "
     << (bp.problem.objective == ObjectiveKind::compliance
             ? "compliance"
             : "output-displacement dof=" + std::to_string(bp.problem.output_dof))
     << "\n";
  return os.str();
}

}  // namespace topo
