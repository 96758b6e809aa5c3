// sim: command-line front end over the dirsel C API.

#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "dirsel/dirsel.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code(int status) {
  switch (status) {
    case DIRSEL_OK: return 0;
    case DIRSEL_E_CONFIG:
    case DIRSEL_E_VALIDATION:
    case DIRSEL_E_ARG: return kExitConfig;
    default: return kExitRuntime;
  }
}

void print_messages() {
  const std::string msg = dirsel_last_message();
  if (!msg.empty()) std::fputs(msg.c_str(), stderr);
}

int report(int status) {
  print_messages();
  if (status != DIRSEL_OK)
    std::fprintf(stderr, "sim: %s: %s\n", dirsel_status_string(status), dirsel_last_error());
  return exit_code(status);
}

struct ScenarioDeleter {
  void operator()(dirsel_scenario* s) const { dirsel_scenario_free(s); }
};
using ScenarioPtr = std::unique_ptr<dirsel_scenario, ScenarioDeleter>;

// Runs a C API call that hands back an owned string and prints it.
template <class F>
void print_owned(F&& call) {
  char* text = nullptr;
  if (call(&text) == DIRSEL_OK && text) std::fputs(text, stdout);
  dirsel_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct selection simulator: eps-runs, the limit system and eps-sweeps"};
  app.require_subcommand(1);

  std::string out_dir;
  int threads = 1;
  bool echo = false;
  app.add_option("--out", out_dir, "Output directory (default: outputs.dir of the config)");
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--echo-config", echo, "Print the resolved config and its symbol table");

  std::string config;
  double eps = 0.0;
  bool dump_fields = false;
  std::string report_dir;

  auto* validate = app.add_subcommand("validate", "Check the model assumptions of a config");
  validate->add_option("config", config, "JSON config")->required();
  auto* simulate = app.add_subcommand("simulate", "Run the eps-model for one eps");
  simulate->add_option("config", config, "JSON config")->required();
  simulate->add_option("--eps", eps, "Mutation scale eps > 0")->required();
  simulate->add_flag("--dump-fields", dump_fields, "Also write the full u field at each snapshot");
  auto* limit = app.add_subcommand("limit", "Run the limit system");
  limit->add_option("config", config, "JSON config")->required();
  auto* sweep = app.add_subcommand("sweep", "Run the limit system and every eps in the sweep");
  sweep->add_option("config", config, "JSON config")->required();
  auto* plot = app.add_subcommand("plot", "Render SVG figures from a sweep output directory");
  plot->add_option("reportdir", report_dir, "Directory written by sim sweep")->required();

  for (auto* sub : {validate, simulate, limit, sweep, plot}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (plot->parsed()) return report(dirsel_plot(report_dir.c_str()));

  dirsel_scenario* raw = nullptr;
  int status = dirsel_scenario_load(config.c_str(), &raw);
  if (status != DIRSEL_OK) return report(status);
  ScenarioPtr scenario(raw);

  if (echo) {
    print_owned([&](char** t) { return dirsel_scenario_echo(scenario.get(), t); });
    print_owned([&](char** t) { return dirsel_scenario_symbol_table(scenario.get(), t); });
  }
  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();

  if (validate->parsed()) {
    char* text = nullptr;
    status = dirsel_validate(scenario.get(), &text);
    if (text) std::fputs(text, stdout);
    dirsel_string_free(text);
    return report(status);
  }
  if (simulate->parsed()) return report(dirsel_simulate(scenario.get(), eps, out, dump_fields));
  if (limit->parsed()) return report(dirsel_limit(scenario.get(), out));
  return report(dirsel_sweep(scenario.get(), out, threads));
}
