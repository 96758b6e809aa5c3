#include "dirsel/dirsel.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "dirsel/config.hpp"
#include "dirsel/error.hpp"
#include "dirsel/harness.hpp"
#include "dirsel/plot.hpp"

struct dirsel_scenario {
  dirsel::Scenario scenario;
};

namespace {

using namespace dirsel;

thread_local std::string g_error;
thread_local std::string g_message;

int status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Resolution:
      return DIRSEL_E_CONFIG;
    case ErrorKind::Validation:
    case ErrorKind::NonExtinction:
      return DIRSEL_E_VALIDATION;
    case ErrorKind::NumericalBreakdown:
    case ErrorKind::ConcavityLoss:
    case ErrorKind::NanGuard:
      return DIRSEL_E_NUMERICAL;
    case ErrorKind::Io:
      return DIRSEL_E_IO;
  }
  return DIRSEL_E_INTERNAL;
}

int set_error(int status, std::string text) {
  g_error = std::move(text);
  return status;
}

template <class F>
int guarded(F&& body) {
  g_error.clear();
  g_message.clear();
  try {
    return body();
  } catch (const Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DIRSEL_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DIRSEL_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(DIRSEL_E_INTERNAL, "unknown exception");
  }
}

void note(const std::string& line) { g_message += line + "\n"; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string out_dir(const Scenario& s, const char* outdir) {
  return outdir && *outdir ? std::string(outdir) : s.output_dir;
}

// Fast-time input (dt, T_final, compare times in tau = t / eps) mapped to
// selection time.
Scenario to_selection_time(Scenario s, double eps) {
  const auto steps = std::llround(s.grids.T_final / s.grids.dt);
  s.grids.dt *= eps;
  s.grids.T_final = static_cast<double>(steps) * s.grids.dt;
  for (double& t : s.sweep.compare_times)
    t = static_cast<double>(std::llround(t / (s.grids.dt / eps))) * s.grids.dt;
  s.time_convention = TimeConvention::Selection;
  return s;
}

void note_plots(const PlotOutcome& outcome) {
  for (const auto& f : outcome.files) note("wrote " + f);
  for (const auto& n : outcome.notices) note(n);
}

}  // namespace

extern "C" {

int dirsel_scenario_load(const char* path, dirsel_scenario** out) {
  if (!path || !out) return set_error(DIRSEL_E_ARG, "null argument");
  *out = nullptr;
  return guarded([&]() -> int {
    *out = new dirsel_scenario{read_config(path)};
    return DIRSEL_OK;
  });
}

int dirsel_scenario_from_json(const char* text, dirsel_scenario** out) {
  if (!text || !out) return set_error(DIRSEL_E_ARG, "null argument");
  *out = nullptr;
  return guarded([&]() -> int {
    *out = new dirsel_scenario{parse_config(text)};
    return DIRSEL_OK;
  });
}

int dirsel_scenario_default(dirsel_scenario** out) {
  if (!out) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    *out = new dirsel_scenario{default_scenario()};
    return DIRSEL_OK;
  });
}

void dirsel_scenario_free(dirsel_scenario* scenario) { delete scenario; }

int dirsel_scenario_echo(const dirsel_scenario* scenario, char** out) {
  if (!scenario || !out) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    *out = dup_string(echo_config(scenario->scenario));
    return DIRSEL_OK;
  });
}

int dirsel_scenario_symbol_table(const dirsel_scenario* scenario, char** out) {
  if (!scenario || !out) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    *out = dup_string(symbol_table(scenario->scenario));
    return DIRSEL_OK;
  });
}

void dirsel_string_free(char* s) { std::free(s); }

int dirsel_scenario_set_output_dir(dirsel_scenario* scenario, const char* dir) {
  if (!scenario || !dir) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    scenario->scenario.output_dir = dir;
    return DIRSEL_OK;
  });
}

int dirsel_validate(const dirsel_scenario* scenario, char** report) {
  if (!scenario) return set_error(DIRSEL_E_ARG, "null argument");
  if (report) *report = nullptr;
  return guarded([&]() -> int {
    const auto& s = scenario->scenario;
    const auto init = resolve_initial(s.params, s.initial, s.grids);
    const auto result = validate_assumptions(s.params, init, s.grids);
    for (const auto& w : config_warnings(s)) note("warning: " + w);
    if (report) *report = dup_string(result.to_text());
    if (result.passed()) return DIRSEL_OK;
    const auto* ne = result.find("non_extinction");
    std::string text = ne && !ne->passed ? "non-extinction condition fails: " + ne->detail
                                         : std::string("model assumptions not satisfied:");
    for (const auto& item : result.items)
      if (!item.passed && &item != ne) text += "\n  " + item.name + ": " + item.detail;
    return set_error(DIRSEL_E_VALIDATION, text);
  });
}

int dirsel_bounds_of(const dirsel_scenario* scenario, dirsel_bounds* out) {
  if (!scenario || !out) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    const auto& p = scenario->scenario.params;
    const auto b = rho_bounds(p);
    *out = dirsel_bounds{b.rho_m, b.rho_M, b.c_m, p.c_B};
    return DIRSEL_OK;
  });
}

int dirsel_simulate(const dirsel_scenario* scenario, double eps, const char* outdir,
                    int dump_fields) {
  if (!scenario) return set_error(DIRSEL_E_ARG, "null argument");
  if (!(eps > 0.0) || !std::isfinite(eps))
    return set_error(DIRSEL_E_ARG, "eps must be a positive finite number");
  return guarded([&]() -> int {
    const Scenario& given = scenario->scenario;
    require_valid(given);
    const bool raw = given.time_convention == TimeConvention::Raw;
    Scenario s = raw ? to_selection_time(given, eps) : given;
    s.grids.check();
    s.sweep.eps_list = {eps};
    for (const auto& w : config_warnings(s)) note("warning: " + w);

    const auto init = resolve_initial(s.params, s.initial, s.grids);
    EpsOptions options;
    options.picard = s.picard;
    options.dump_fields = dump_fields != 0;
    options.forcing = s.forcing();
    const auto run = run_epsilon(s.params, init, s.grids, eps, sweep_snapshot_times(s), options);

    const std::filesystem::path dir(out_dir(given, outdir));
    const double scale = raw ? eps : 1.0;
    const auto base = "eps_" + eps_tag(eps);
    write_text_file((dir / (base + ".csv")).string(), eps_run_csv(run, s.grids, scale));
    note("wrote " + (dir / (base + ".csv")).string());
    if (options.dump_fields) {
      write_text_file((dir / (base + "_fields.csv")).string(), eps_fields_csv(run, s.grids, scale));
      note("wrote " + (dir / (base + "_fields.csv")).string());
    }
    std::ostringstream summary;
    summary << "bound violations: " << run.bound_violations;
    if (run.bound_violations > 0)
      summary << " (worst excess " << run.worst_violation << "; first: " << run.first_violation << ")";
    note(summary.str());
    if (run.aborted) {
      std::ostringstream msg;
      msg << "run aborted: " << run.abort_reason << " (last valid t = "
          << run.last_valid_time / scale << ")";
      return set_error(DIRSEL_E_NUMERICAL, msg.str());
    }
    return DIRSEL_OK;
  });
}

int dirsel_limit(const dirsel_scenario* scenario, const char* outdir) {
  if (!scenario) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    const Scenario& s = scenario->scenario;
    if (s.time_convention != TimeConvention::Selection)
      fail(ErrorKind::Config, "the limit run requires solver.time_convention = \"selection\"");
    require_valid(s);
    const auto init = resolve_initial(s.params, s.initial, s.grids);
    const auto run = run_limit(s.params, init, s.grids, sweep_snapshot_times(s));
    const std::filesystem::path dir(out_dir(s, outdir));
    write_text_file((dir / "limit.csv").string(), limit_run_csv(run, s.grids));
    note("wrote " + (dir / "limit.csv").string());
    std::ostringstream summary;
    summary << "max constraint residual " << run.max_constraint_residual
            << ", max velocity mismatch " << run.max_velocity_mismatch;
    note(summary.str());
    if (run.aborted) {
      std::ostringstream msg;
      msg << "limit run aborted: " << run.abort_reason << " (last valid t = "
          << run.last_valid_time << ")";
      return set_error(DIRSEL_E_NUMERICAL, msg.str());
    }
    return DIRSEL_OK;
  });
}

int dirsel_sweep(const dirsel_scenario* scenario, const char* outdir, int threads) {
  if (!scenario) return set_error(DIRSEL_E_ARG, "null argument");
  if (threads < 1) return set_error(DIRSEL_E_ARG, "threads must be >= 1");
  return guarded([&]() -> int {
    const Scenario& s = scenario->scenario;
    require_valid(s);
    for (const auto& w : config_warnings(s)) note("warning: " + w);
    const auto result = run_sweep(s, threads);
    const std::string dir = out_dir(s, outdir);
    write_sweep(result, s, dir);
    note("wrote " + (std::filesystem::path(dir) / "report.csv").string());
    note("wrote " + (std::filesystem::path(dir) / "report.txt").string());
    if (s.plots) note_plots(emit_plots(plot_data(result, s.grids), dir));
    else note("plotting disabled; no figures written");
    if (!result.report.aborts.empty()) {
      std::string text = "partial report: some runs aborted";
      for (const auto& a : result.report.aborts) {
        std::ostringstream line;
        line << "\n  " << (a.eps > 0.0 ? "eps = " + eps_tag(a.eps) : std::string("limit")) << ": "
             << a.reason;
        text += line.str();
      }
      return set_error(DIRSEL_E_NUMERICAL, text);
    }
    return DIRSEL_OK;
  });
}

int dirsel_plot(const char* reportdir) {
  if (!reportdir) return set_error(DIRSEL_E_ARG, "null argument");
  return guarded([&]() -> int {
    note_plots(emit_plots(load_plot_data(reportdir), reportdir));
    return DIRSEL_OK;
  });
}

const char* dirsel_last_message(void) { return g_message.c_str(); }

const char* dirsel_last_error(void) { return g_error.c_str(); }

const char* dirsel_status_string(int status) {
  switch (status) {
    case DIRSEL_OK: return "ok";
    case DIRSEL_E_CONFIG: return "configuration error";
    case DIRSEL_E_VALIDATION: return "model assumptions not satisfied";
    case DIRSEL_E_NUMERICAL: return "run aborted";
    case DIRSEL_E_IO: return "i/o error";
    case DIRSEL_E_ARG: return "invalid argument";
    case DIRSEL_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

}  // extern "C"
