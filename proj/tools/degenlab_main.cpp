// degenlab: batch driver for the verification suites.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "degenlab/error.hpp"
#include "degenlab/suites.hpp"

namespace fs = std::filesystem;
using namespace degenlab;

int main(int argc, char** argv) {
  CLI::App app{"degenlab: numerical checks for degenerate elliptic operators"};
  app.set_config("--config", "", "key=value file mirroring the flags; flags win");

  std::vector<std::string> commands = suite_names();
  commands.push_back("all");
  std::string command;
  app.add_option("command", command, "examples | kyfan | superaffine | barrier | slopes | abp | distfield | movingplane | all")
      ->required()
      ->check(CLI::IsMember(commands));

  SuiteOptions opt;
  std::string out_dir;
  bool deterministic = false;
  app.add_option("--grid-h", opt.grid_h, "override the grid spacing of every instance");
  app.add_option("--seed", opt.seed, "base seed")->capture_default_str();
  app.add_option("--tol-scale", opt.tol_scale, "multiply the tolerances")->capture_default_str();
  app.add_option("--out", out_dir, "write <command>.jsonl into this directory instead of stdout");
  app.add_flag("--quick", opt.quick, "coarser grids and fewer samples");
  app.add_flag("--deterministic", deterministic, "omit timings so reruns are byte-identical");
  app.add_option("--n", opt.n, "restrict to dimension n");
  app.add_option("--alpha", opt.alpha, "restrict alpha-parameterized instances");
  app.add_option("--builtin", opt.builtin, "movingplane: analyze this builtin field only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    file.open(fs::path(out_dir) / (command + ".jsonl"));
    if (!file) {
      std::cerr << "cannot write to " << out_dir << "\n";
      return 2;
    }
    os = &file;
  }

  std::vector<CheckReport> reports;
  try {
    reports = run_suite(command, opt, [&](const CheckReport& r) {
      *os << r.to_json(deterministic).dump() << '\n';
      os->flush();
    });
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  const int code = suite_exit_code(reports);
  std::size_t bad = 0;
  for (const auto& r : reports) bad += !r.ok();
  std::cerr << command << ": " << reports.size() << " reports, " << bad << " not ok, exit " << code << "\n";
  return code;
}
