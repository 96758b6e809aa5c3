#include "dirsel/epsilon_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dirsel/error.hpp"

namespace dirsel {

EpsState init_state(const ModelParams& params, const InitialProfiles& init, const Grids& grids,
                    double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::Config, "eps must be positive");
  EpsState s;
  s.t = 0.0;
  s.eps = eps;
  s.Ny = init.X0.size();
  s.Nx = grids.Nx;
  s.u.resize(s.Ny * s.Nx);
  s.rho.resize(s.Ny);
  const auto x = x_nodes(grids);
  const double sigma = init.sigma0;
  for (std::size_t i = 0; i < s.Ny; ++i) {
    const double level =
        eps * std::log(init.rho0[i] / std::sqrt(2.0 * std::numbers::pi * eps * sigma));
    auto col = s.column(i);
    for (std::size_t j = 0; j < s.Nx; ++j) {
      const double dev = x[j] - init.X0[i];
      col[j] = -dev * dev / (2.0 * sigma) + level;
    }
    s.rho[i] = stabilized_exp_mass(col, eps);
    const double rel = std::abs(s.rho[i] - init.rho0[i]) / init.rho0[i];
    if (!(rel <= kInitialMassTolerance)) {
      std::ostringstream msg;
      msg << "initial mass at y-node " << i << " is " << s.rho[i] << " for rho0 = "
          << init.rho0[i] << " (relative error " << rel << "); refine Nx for eps = " << eps;
      fail(ErrorKind::Resolution, msg.str());
    }
  }
  if (params.coupling == Coupling::Elliptic && init.c0.empty())
    s.c = solve_c_elliptic(init.rho0, params, grids.hy());
  else
    s.c = init.c0;
  return s;
}

namespace {

struct TraitTables {
  std::vector<double> r;
  std::vector<double> d;
};

TraitTables tabulate(const ModelParams& params, const Grids& grids) {
  const auto x = x_nodes(grids);
  TraitTables t;
  t.r.resize(x.size());
  t.d.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    t.r[j] = params.r.value(x[j]);
    t.d[j] = params.d.value(x[j]);
  }
  return t;
}

void advance_column(std::span<const double> from, std::span<double> to, const TraitTables& tab,
                    double c, double rho, double dt) {
  for (std::size_t j = 0; j < from.size(); ++j)
    to[j] = from[j] + dt * (tab.r[j] * c - tab.d[j] * (1.0 + rho));
}

void guard_column(std::span<const double> col, double rho, std::size_t i, const Grids& grids,
                  double t) {
  if (std::isfinite(rho) && rho > 0.0) {
    bool ok = true;
    for (double v : col) ok = ok && std::isfinite(v);
    if (ok) return;
  }
  std::size_t bad = 0;
  while (bad < col.size() && std::isfinite(col[bad])) ++bad;
  std::ostringstream msg;
  msg << "non-finite state at y = " << grids.y(i);
  if (bad < col.size()) msg << ", x = " << grids.x(bad);
  msg << ", t = " << t << " (rho = " << rho << ")";
  fail(ErrorKind::NanGuard, msg.str());
}

void step_u_impl(EpsState& state, const TraitTables& tab, const Grids& grids, double dt,
                 int picard) {
  std::vector<double> scratch(state.Nx);
  for (std::size_t i = 0; i < state.Ny; ++i) {
    auto col = state.column(i);
    const double c = state.c[i];
    const double rho_old = state.rho[i];
    advance_column(col, scratch, tab, c, rho_old, dt);
    double rho_new = stabilized_exp_mass(scratch, state.eps);
    for (int k = 0; k < picard; ++k) {
      advance_column(col, scratch, tab, c, 0.5 * (rho_old + rho_new), dt);
      rho_new = stabilized_exp_mass(scratch, state.eps);
    }
    guard_column(scratch, rho_new, i, grids, state.t + dt);
    std::copy(scratch.begin(), scratch.end(), col.begin());
    state.rho[i] = rho_new;
  }
  state.t += dt;
}

}  // namespace

void step_u(EpsState& state, const ModelParams& params, const Grids& grids, double dt,
            int picard) {
  step_u_impl(state, tabulate(params, grids), grids, dt, picard);
}

EpsMetrics diagnostics(const EpsState& state, const ModelParams& params, const Grids& grids,
                       bool lower_bounds, const BoundTolerance& tol) {
  const std::size_t ny = state.Ny;
  const std::size_t nx = state.Nx;
  const double hx = grids.hx();
  EpsMetrics m;
  m.X_eps.resize(ny);
  m.width.resize(ny);
  m.max_u.resize(ny);
  m.constraint_residual.resize(ny);
  m.strongconv_gap.resize(ny);
  m.ux_max.resize(ny);
  m.uxx_max.resize(ny);
  m.uxxx_max.resize(ny);

  const Bounds& b = params.bounds();
  auto flag = [&](double excess, const std::string& what, std::size_t i) {
    if (excess <= 0.0) return;
    if (m.bounds.count == 0) {
      std::ostringstream msg;
      msg << what << " at y = " << grids.y(i) << ", t = " << state.t << " (excess " << excess
          << ")";
      m.bounds.first = msg.str();
    }
    ++m.bounds.count;
    m.bounds.worst = std::max(m.bounds.worst, excess);
  };

  for (std::size_t i = 0; i < ny; ++i) {
    const auto col = state.column(i);
    const auto am = refine_argmax(col);
    const double X = am.x_star;
    const double c = state.c[i];
    const double rho = state.rho[i];
    m.X_eps[i] = X;
    m.width[i] = std::sqrt(state.eps / std::abs(am.uxx_star));
    m.max_u[i] = *std::max_element(col.begin(), col.end());
    const double rX = params.r.value(X);
    const double dX = params.d.value(X);
    m.constraint_residual[i] = std::abs(rX * c - dX * (1.0 + rho));
    m.strongconv_gap[i] = std::abs(rho * c * rX / dX - rho - rho * rho);

    double ux = 0.0, uxxx = 0.0;
    for (std::size_t j = 1; j + 1 < nx; ++j)
      ux = std::max(ux, std::abs(col[j + 1] - col[j - 1]) / (2.0 * hx));
    for (std::size_t j = 2; j + 2 < nx; ++j) {
      const double v = (col[j + 2] - 2.0 * col[j + 1] + 2.0 * col[j - 1] - col[j - 2]) /
                       (2.0 * hx * hx * hx);
      uxxx = std::max(uxxx, std::abs(v));
    }
    m.ux_max[i] = ux;
    m.uxx_max[i] = max_second_difference(col);
    m.uxxx_max[i] = uxxx;

    flag(-c - tol.solver, "c < 0", i);
    flag(c - params.c_B - tol.solver, "c > c_B", i);
    flag(rho - b.rho_M - tol.discretization, "rho > rho_M", i);
    if (lower_bounds) {
      flag(b.c_m - tol.discretization - c, "c < c_m", i);
      flag(b.rho_m - tol.discretization - rho, "rho < rho_m", i);
    }
  }
  return m;
}

namespace {

std::vector<std::size_t> snapshot_steps(std::span<const double> times, const Grids& grids) {
  std::vector<std::size_t> steps;
  const std::size_t total = grids.steps();
  for (double t : times) {
    const double k = std::round(t / grids.dt);
    if (k < 0.0 || static_cast<std::size_t>(k) > total ||
        std::abs(k * grids.dt - t) > 1e-9 * std::max(1.0, t))
      fail(ErrorKind::Config, "snapshot time " + std::to_string(t) +
                                  " is not a step multiple within [0, T_final]");
    steps.push_back(static_cast<std::size_t>(k));
  }
  return steps;
}

bool initial_data_in_bounds(const InitialProfiles& init, const ModelParams& params) {
  const Bounds& b = params.bounds();
  for (std::size_t i = 0; i < init.rho0.size(); ++i)
    if (init.rho0[i] < b.rho_m || init.rho0[i] > b.rho_M) return false;
  if (params.coupling == Coupling::Parabolic)
    for (double c : init.c0)
      if (c < b.c_m || c > params.c_B) return false;
  return true;
}

}  // namespace

EpsRun run_epsilon(const ModelParams& params, const InitialProfiles& init, const Grids& grids,
                   double eps, std::span<const double> snapshot_times, const EpsOptions& options) {
  grids.check();
  const auto wanted = snapshot_steps(snapshot_times, grids);
  const std::size_t total = grids.steps();
  const bool lower = initial_data_in_bounds(init, params);
  const auto tab = tabulate(params, grids);
  const auto y = y_nodes(grids);
  const double hy = grids.hy();

  EpsRun run;
  run.eps = eps;
  EpsState state = init_state(params, init, grids, eps);
  if (options.forcing) {
    for (std::size_t i = 0; i < state.Ny; ++i) state.c[i] = options.forcing->exact(y[i], 0.0);
  }
  run.initial_max_u.resize(state.Ny);
  for (std::size_t i = 0; i < state.Ny; ++i) {
    const auto col = state.column(i);
    run.initial_max_u[i] = *std::max_element(col.begin(), col.end());
  }

  auto maybe_snapshot = [&](std::size_t k) {
    if (std::find(wanted.begin(), wanted.end(), k) == wanted.end()) return;
    EpsSnapshot snap;
    snap.t = state.t;
    snap.rho = state.rho;
    snap.c = state.c;
    snap.metrics = diagnostics(state, params, grids, lower, options.tolerance);
    if (options.dump_fields) snap.u = state.u;
    if (snap.metrics.bounds.count > 0 && run.bound_violations == 0)
      run.first_violation = snap.metrics.bounds.first;
    run.bound_violations += snap.metrics.bounds.count;
    run.worst_violation = std::max(run.worst_violation, snap.metrics.bounds.worst);
    run.snapshots.push_back(std::move(snap));
  };

  std::vector<double> source;
  try {
    maybe_snapshot(0);
    for (std::size_t k = 1; k <= total; ++k) {
      step_u_impl(state, tab, grids, grids.dt, options.picard);
      state.t = static_cast<double>(k) * grids.dt;
      if (params.coupling == Coupling::Elliptic) {
        state.c = solve_c_elliptic(state.rho, params, hy);
      } else {
        if (options.forcing) {
          source.resize(state.Ny);
          for (std::size_t i = 0; i < state.Ny; ++i)
            source[i] = options.forcing->source(y[i], state.t, state.rho[i]);
        }
        state.c = step_c_parabolic(state.c, state.rho, params, hy, grids.dt, source);
      }
      for (std::size_t i = 0; i < state.Ny; ++i) {
        if (!std::isfinite(state.c[i])) {
          std::ostringstream msg;
          msg << "non-finite nutrient at y = " << y[i] << ", t = " << state.t;
          fail(ErrorKind::NanGuard, msg.str());
        }
      }
      run.last_valid_time = state.t;
      maybe_snapshot(k);
    }
  } catch (const Error& e) {
    run.aborted = true;
    run.abort_reason = e.what();
  }
  run.final_state = std::move(state);
  return run;
}

}  // namespace dirsel
