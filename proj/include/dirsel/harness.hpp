#pragma once

#include <string>
#include <vector>

#include "dirsel/config.hpp"
#include "dirsel/epsilon_solver.hpp"
#include "dirsel/limit_solver.hpp"

namespace dirsel {

struct ReportRow {
  double eps = 0.0;
  double t = 0.0;
  double err_X = 0.0;
  double err_rho = 0.0;
  double err_c = 0.0;
  double width_ratio = 0.0;  // max_y width / sqrt(eps)
  double maxu_drift = 0.0;   // max_y |max_x u(y, t) - max_x u(y, 0)|
  // not part of report.csv
  double constraint_residual = 0.0;  // max_y at the refined argmax
  double max_abs_u = 0.0;            // max_y |max_x u|
  double maxu_band = 0.0;            // 2 eps |ln eps| + max_y |max_x u(y, 0)|
};

struct TrendVerdict {
  double t = 0.0;
  bool err_X_decreasing = true;
  bool err_rho_decreasing = true;
  bool residual_decreasing = true;
};

struct AbortNote {
  double eps = 0.0;  // 0 for the limit run
  std::string reason;
  double last_valid_time = 0.0;
};

struct ConvergenceReport {
  Coupling coupling = Coupling::Parabolic;
  std::vector<double> eps_list;
  std::vector<double> compare_times;
  double hx = 0.0;
  std::vector<ReportRow> rows;  // eps-major, then compare time
  std::vector<TrendVerdict> verdicts;
  std::vector<AbortNote> aborts;
  std::size_t bound_violations = 0;
  double limit_constraint_residual = 0.0;
  double limit_velocity_mismatch = 0.0;
  double loglog_slope_err_X = 0.0;  // least squares over the last compare time

  const ReportRow* find(double eps, double t) const;
};

struct SweepResult {
  ConvergenceReport report;
  LimitRun limit;
  std::vector<EpsRun> runs;  // same order as eps_list
};

// Snapshot times every run records: t = 0, the compare times and T_final.
std::vector<double> sweep_snapshot_times(const Scenario& scenario);

// One limit run and one eps-run per eps, spread over `threads` workers.
// Results land in fixed slots so the output does not depend on scheduling.
SweepResult run_sweep(const Scenario& scenario, int threads = 1);

ConvergenceReport build_report(const Scenario& scenario, const LimitRun& limit,
                               const std::vector<EpsRun>& runs);

// Least-squares slope of log(err) against log(eps) over positive entries.
double loglog_slope(const std::vector<double>& eps, const std::vector<double>& err);

std::string report_csv(const ConvergenceReport& report);
std::string report_text(const ConvergenceReport& report);

// Snapshot CSVs. `time_scale` divides the reported t (raw time convention).
std::string eps_run_csv(const EpsRun& run, const Grids& grids, double time_scale = 1.0);
std::string eps_fields_csv(const EpsRun& run, const Grids& grids, double time_scale = 1.0);
std::string limit_run_csv(const LimitRun& run, const Grids& grids);

std::string eps_tag(double eps);

// Writes report.csv, report.txt, limit.csv and eps_<eps>.csv into dir.
void write_sweep(const SweepResult& result, const Scenario& scenario, const std::string& dir);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dirsel
