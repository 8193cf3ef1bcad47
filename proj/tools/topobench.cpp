// Command-line driver: run single optimizations, compare solver modes on
// the same problem, or sweep parameter grids. Problems come from named
// presets or flat `key = value` config files; flags override both.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "topo/bench.hpp"
#include "topo/errors.hpp"
#include "topo/io.hpp"
#include "topo/presets.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string target;
  std::string out_dir = "out";
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("target", args.target,
                  "preset name or path to a config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.sets,
                  "override any config key, e.g. --set nelx=160");
}

void add_spec_flags(CLI::App* cmd, std::vector<std::string>& sets) {
  auto forward = [&sets](const std::string& key) {
    return [&sets, key](const std::string& v) { sets.push_back(key + "=" + v); };
  };
  cmd->add_option_function<std::string>("--nelx", forward("nelx"));
  cmd->add_option_function<std::string>("--nely", forward("nely"));
  cmd->add_option_function<std::string>("--nelz", forward("nelz"));
  cmd->add_option_function<std::string>("--mode", forward("mode"),
                                        "direct|mgcg|aarmr");
  cmd->add_option_function<std::string>("--volfrac", forward("volfrac"));
  cmd->add_option_function<std::string>("--eps-tol", forward("eps_tol"),
                                        "reduced-model residual criterion");
  cmd->add_option_function<std::string>("--ns", forward("ns"),
                                        "projection-basis columns");
  cmd->add_option_function<std::string>("--nm", forward("nm"),
                                        "reduced-basis terms");
  cmd->add_option_function<std::string>("--non", forward("non"),
                                        "activation loop");
  cmd->add_option_function<std::string>("--levels", forward("levels"));
  cmd->add_option_function<std::string>("--cgtol", forward("cgtol"));
  cmd->add_option_function<std::string>("--maxcg", forward("maxcg"));
  cmd->add_option_function<std::string>("--iters", forward("max_iters"));
  cmd->add_option_function<std::string>("--conv-tol", forward("conv_tol"));
  cmd->add_option_function<std::string>("--move", forward("move"));
  cmd->add_option_function<std::string>("--radius", forward("radius"));
  cmd->add_option_function<std::string>("--penal", forward("penal"));
}

topo::ProblemSpec resolve_spec(const CommonArgs& args) {
  topo::ProblemSpec spec;
  if (topo::is_preset(args.target)) {
    spec = topo::default_spec(args.target);
  } else if (std::filesystem::exists(args.target)) {
    spec = topo::spec_from_config_file(args.target);
  } else {
    std::ostringstream os;
    os << "'" << args.target << "' is neither a preset nor a config file.\n"
       << "Presets:";
    for (const std::string& p : topo::preset_names()) os << " " << p;
    throw topo::ConfigError(os.str());
  }
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw topo::ConfigError("--set expects key=value, got '" + kv + "'");
    topo::apply_override(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return spec;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured-grid topology optimization benchmark driver"};
  app.require_subcommand(1);

  CommonArgs run_args, cmp_args, sweep_args;
  std::string cmp_modes = "mgcg,aarmr";
  std::vector<std::string> sweep_params;

  CLI::App* run = app.add_subcommand("run", "run one optimization");
  add_common(run, run_args);
  add_spec_flags(run, run_args.sets);

  CLI::App* cmp = app.add_subcommand(
      "compare", "run several solver modes; the first is the reference");
  add_common(cmp, cmp_args);
  add_spec_flags(cmp, cmp_args.sets);
  cmp->add_option("--modes", cmp_modes, "comma-separated solver modes");

  CLI::App* swp = app.add_subcommand("sweep", "Cartesian parameter sweep");
  add_common(swp, sweep_args);
  add_spec_flags(swp, sweep_args.sets);
  swp->add_option("--param", sweep_params,
                  "axis as key=v1,v2,... (repeatable)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) {
      const topo::ProblemSpec spec = resolve_spec(run_args);
      const topo::RunReport report = topo::run_spec(spec, run_args.out_dir);
      std::cout << topo::summary_text(report)
                << "artifacts: " << run_args.out_dir << "/\n";
    } else if (cmp->parsed()) {
      const topo::ProblemSpec spec = resolve_spec(cmp_args);
      const topo::CompareReport report =
          topo::compare_modes(spec, split_csv(cmp_modes), cmp_args.out_dir);
      std::cout << topo::compare_table(report);
    } else if (swp->parsed()) {
      const topo::ProblemSpec spec = resolve_spec(sweep_args);
      std::vector<topo::SweepAxis> axes;
      for (const std::string& p : sweep_params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos)
          throw topo::ConfigError("--param expects key=v1,v2,..., got '" + p +
                                  "'");
        axes.emplace_back(p.substr(0, eq), split_csv(p.substr(eq + 1)));
      }
      const topo::SweepReport report =
          topo::sweep_spec(spec, axes, sweep_args.out_dir);
      int failed = 0;
      for (const auto& c : report.cells) failed += c.ok ? 0 : 1;
      std::cout << "sweep: " << report.cells.size() << " cells, " << failed
                << " failed; table: " << sweep_args.out_dir << "/sweep.csv\n";
    }
  } catch (const topo::ConfigError& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const topo::ParamError& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const topo::IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error (solver): " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
