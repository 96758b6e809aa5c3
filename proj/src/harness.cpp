#include "dirsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "dirsel/error.hpp"

namespace dirsel {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

template <typename Snap>
const Snap* at_time(const std::vector<Snap>& snaps, double t) {
  for (const auto& s : snaps)
    if (same_time(s.t, t)) return &s;
  return nullptr;
}

}  // namespace

const ReportRow* ConvergenceReport::find(double eps, double t) const {
  for (const auto& row : rows)
    if (row.eps == eps && same_time(row.t, t)) return &row;
  return nullptr;
}

std::vector<double> sweep_snapshot_times(const Scenario& scenario) {
  std::vector<double> times{0.0};
  for (double t : scenario.sweep.compare_times) times.push_back(t);
  times.push_back(scenario.grids.T_final);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), same_time), times.end());
  return times;
}

SweepResult run_sweep(const Scenario& scenario, int threads) {
  if (scenario.time_convention != TimeConvention::Selection)
    fail(ErrorKind::Config, "sweep requires solver.time_convention = \"selection\"");
  const auto init = resolve_initial(scenario.params, scenario.initial, scenario.grids);
  const auto times = sweep_snapshot_times(scenario);
  const auto& eps_list = scenario.sweep.eps_list;

  SweepResult result;
  result.runs.resize(eps_list.size());

  // Task 0 is the limit run, task k the k-th eps.
  const std::size_t tasks = eps_list.size() + 1;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> escaped(tasks);
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks; k = next++) try {
      if (k == 0) {
        result.limit = run_limit(scenario.params, init, scenario.grids, times);
        continue;
      }
      EpsOptions options;
      options.picard = scenario.picard;
      options.forcing = scenario.forcing();
      try {
        result.runs[k - 1] =
            run_epsilon(scenario.params, init, scenario.grids, eps_list[k - 1], times, options);
      } catch (const Error& e) {
        EpsRun failed;
        failed.eps = eps_list[k - 1];
        failed.aborted = true;
        failed.abort_reason = e.what();
        result.runs[k - 1] = std::move(failed);
      }
    } catch (...) {
      escaped[k] = std::current_exception();
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, tasks);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : escaped)
    if (e) std::rethrow_exception(e);

  result.report = build_report(scenario, result.limit, result.runs);
  return result;
}

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < eps.size() && k < err.size(); ++k) {
    if (!(eps[k] > 0.0) || !(err[k] > 0.0)) continue;
    const double x = std::log(eps[k]);
    const double y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (static_cast<double>(n) * sxy - sx * sy) / denom;
}

ConvergenceReport build_report(const Scenario& scenario, const LimitRun& limit,
                               const std::vector<EpsRun>& runs) {
  ConvergenceReport rep;
  rep.coupling = scenario.params.coupling;
  rep.eps_list = scenario.sweep.eps_list;
  rep.compare_times = scenario.sweep.compare_times;
  rep.hx = scenario.grids.hx();
  rep.limit_constraint_residual = limit.max_constraint_residual;
  rep.limit_velocity_mismatch = limit.max_velocity_mismatch;
  if (limit.aborted) rep.aborts.push_back({0.0, limit.abort_reason, limit.last_valid_time});

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& run : runs) {
    if (run.aborted) rep.aborts.push_back({run.eps, run.abort_reason, run.last_valid_time});
    rep.bound_violations += run.bound_violations;
    double init_abs = 0.0;
    for (double m : run.initial_max_u) init_abs = std::max(init_abs, std::abs(m));
    for (double t : rep.compare_times) {
      ReportRow row;
      row.eps = run.eps;
      row.t = t;
      row.maxu_band = 2.0 * run.eps * std::abs(std::log(run.eps)) + init_abs;
      const auto* es = at_time(run.snapshots, t);
      const auto* ls = at_time(limit.snapshots, t);
      if (!es || !ls) {
        row.err_X = row.err_rho = row.err_c = row.width_ratio = row.maxu_drift = nan;
        row.constraint_residual = row.max_abs_u = nan;
        rep.rows.push_back(row);
        continue;
      }
      const auto& m = es->metrics;
      for (std::size_t i = 0; i < ls->X.size(); ++i) {
        row.err_X = std::max(row.err_X, std::abs(m.X_eps[i] - ls->X[i]));
        row.err_rho = std::max(row.err_rho, std::abs(es->rho[i] - ls->rho[i]));
        row.err_c = std::max(row.err_c, std::abs(es->c[i] - ls->c[i]));
        row.width_ratio = std::max(row.width_ratio, m.width[i] / std::sqrt(run.eps));
        row.maxu_drift = std::max(row.maxu_drift, std::abs(m.max_u[i] - run.initial_max_u[i]));
        row.constraint_residual = std::max(row.constraint_residual, m.constraint_residual[i]);
        row.max_abs_u = std::max(row.max_abs_u, std::abs(m.max_u[i]));
      }
      rep.rows.push_back(row);
    }
  }

  for (double t : rep.compare_times) {
    TrendVerdict v;
    v.t = t;
    const ReportRow* prev = nullptr;
    for (double eps : rep.eps_list) {
      const ReportRow* row = rep.find(eps, t);
      if (!row) continue;
      if (prev) {
        v.err_X_decreasing = v.err_X_decreasing && row->err_X < prev->err_X;
        v.err_rho_decreasing = v.err_rho_decreasing && row->err_rho < prev->err_rho;
        v.residual_decreasing =
            v.residual_decreasing && row->constraint_residual < prev->constraint_residual;
      }
      prev = row;
    }
    rep.verdicts.push_back(v);
  }

  if (!rep.compare_times.empty()) {
    std::vector<double> errs;
    for (double eps : rep.eps_list) {
      const auto* row = rep.find(eps, rep.compare_times.back());
      errs.push_back(row ? row->err_X : nan);
    }
    rep.loglog_slope_err_X = loglog_slope(rep.eps_list, errs);
  }
  return rep;
}

std::string report_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "eps,t,err_X,err_rho,err_c,width_ratio,maxu_drift\n";
  for (const auto& r : report.rows)
    out << fmt(r.eps) << ',' << fmt(r.t) << ',' << fmt(r.err_X) << ',' << fmt(r.err_rho) << ','
        << fmt(r.err_c) << ',' << fmt(r.width_ratio) << ',' << fmt(r.maxu_drift) << '\n';
  return out.str();
}

std::string report_text(const ConvergenceReport& rep) {
  std::ostringstream out;
  const bool elliptic = rep.coupling == Coupling::Elliptic;
  out << "convergence report (" << (elliptic ? "elliptic" : "parabolic") << " coupling)\n";
  out << "eps list:";
  for (double e : rep.eps_list) out << ' ' << e;
  out << "\nhx = " << rep.hx << "\n\n";

  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-8s %-12s %-12s %-12s %-12s %-12s %-12s\n", "eps", "t",
                "err_X", "err_rho", "err_c", "width/sqrt", "maxu_drift", "residual");
  out << line;
  for (const auto& r : rep.rows) {
    std::snprintf(line, sizeof line,
                  "%-10g %-8g %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e\n", r.eps, r.t,
                  r.err_X, r.err_rho, r.err_c, r.width_ratio, r.maxu_drift,
                  r.constraint_residual);
    out << line;
  }
  out << "\nverdicts (strict decrease along the eps list):\n";
  for (const auto& v : rep.verdicts) {
    out << "  t = " << v.t << ": err_X " << (v.err_X_decreasing ? "decreasing" : "NOT decreasing")
        << ", err_rho " << (v.err_rho_decreasing ? "decreasing" : "NOT decreasing")
        << (elliptic ? " (informational)" : "") << ", constraint residual "
        << (v.residual_decreasing ? "decreasing" : "NOT decreasing") << "\n";
  }
  out << "\nlog-log slope of err_X against eps at the last compare time: "
      << rep.loglog_slope_err_X << " (observation, no rate is asserted)\n";
  out << "limit solver: max relative constraint residual " << rep.limit_constraint_residual
      << ", max velocity-form mismatch " << rep.limit_velocity_mismatch << "\n";
  out << "bound violations across eps-runs: " << rep.bound_violations << "\n";
  if (elliptic) {
    out << "\nnote: with elliptic coupling the density converges only weakly-* in time; the\n"
           "limit solver uses the pointwise product rho*c in the nutrient equation where the\n"
           "limit carries the weak limit <rho c>. err_rho and err_c above include any gap this\n"
           "causes; they are reported, not required to decrease.\n";
  }
  if (!rep.aborts.empty()) {
    out << "\naborted runs:\n";
    for (const auto& a : rep.aborts)
      out << "  " << (a.eps == 0.0 ? std::string("limit") : "eps = " + std::to_string(a.eps))
          << ": " << a.reason << " (last valid t = " << a.last_valid_time << ")\n";
  }
  return out.str();
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

std::string eps_run_csv(const EpsRun& run, const Grids& grids, double time_scale) {
  std::ostringstream out;
  out << "t,y,X_eps,rho,c,max_u,width,constraint_residual,strongconv_gap\n";
  const auto y = y_nodes(grids);
  for (const auto& s : run.snapshots) {
    const auto& m = s.metrics;
    for (std::size_t i = 0; i < s.rho.size(); ++i)
      out << fmt(s.t / time_scale) << ',' << fmt(y[i]) << ',' << fmt(m.X_eps[i]) << ','
          << fmt(s.rho[i]) << ',' << fmt(s.c[i]) << ',' << fmt(m.max_u[i]) << ','
          << fmt(m.width[i]) << ',' << fmt(m.constraint_residual[i]) << ','
          << fmt(m.strongconv_gap[i]) << '\n';
  }
  return out.str();
}

std::string eps_fields_csv(const EpsRun& run, const Grids& grids, double time_scale) {
  std::ostringstream out;
  out << "t,y,x,u\n";
  const auto y = y_nodes(grids);
  const auto x = x_nodes(grids);
  for (const auto& s : run.snapshots) {
    if (s.u.empty()) continue;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        out << fmt(s.t / time_scale) << ',' << fmt(y[i]) << ',' << fmt(x[j]) << ','
            << fmt(s.u[i * x.size() + j]) << '\n';
  }
  return out.str();
}

std::string limit_run_csv(const LimitRun& run, const Grids& grids) {
  std::ostringstream out;
  out << "t,y,X,rho,c,uxx_at_X,maxu_audit,lipschitz_t,lipschitz_y\n";
  const auto y = y_nodes(grids);
  for (const auto& s : run.snapshots)
    for (std::size_t i = 0; i < s.X.size(); ++i)
      out << fmt(s.t) << ',' << fmt(y[i]) << ',' << fmt(s.X[i]) << ',' << fmt(s.rho[i]) << ','
          << fmt(s.c[i]) << ',' << fmt(s.uxx_at_X[i]) << ',' << fmt(s.maxu_audit[i]) << ','
          << fmt(s.lipschitz_t[i]) << ',' << fmt(s.lipschitz_y[i]) << '\n';
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

void write_sweep(const SweepResult& result, const Scenario& scenario, const std::string& dir) {
  const std::filesystem::path base(dir);
  write_text_file((base / "report.csv").string(), report_csv(result.report));
  write_text_file((base / "report.txt").string(), report_text(result.report));
  write_text_file((base / "limit.csv").string(), limit_run_csv(result.limit, scenario.grids));
  for (const auto& run : result.runs)
    write_text_file((base / ("eps_" + eps_tag(run.eps) + ".csv")).string(),
                    eps_run_csv(run, scenario.grids));
}

}  // namespace dirsel
