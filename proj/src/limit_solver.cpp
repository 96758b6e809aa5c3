#include "dirsel/limit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dirsel/error.hpp"
#include "dirsel/nutrient.hpp"

namespace dirsel {

double constraint_rho(double X, double c, const ModelParams& params) {
  return params.r.value(X) * c / params.d.value(X) - 1.0;
}

double uxx_at(double X, double t, double C_acc, double P_acc, double sigma0,
              const ModelParams& params) {
  const double v = -1.0 / sigma0 + params.r.derivative(X, 2) * C_acc -
                   params.d.derivative(X, 2) * (t + P_acc);
  if (!(v < 0.0)) {
    std::ostringstream msg;
    msg << "limit potential lost concavity at X = " << X << ", t = " << t << " (u_xx = " << v
        << ")";
    fail(ErrorKind::ConcavityLoss, msg.str());
  }
  return v;
}

double x_dot(double X, double c, double uxx, const ModelParams& params) {
  const double r = params.r.value(X);
  const double d = params.d.value(X);
  const double gradient = params.r.derivative(X, 1) - params.d.derivative(X, 1) * r / d;
  return gradient * c / (-uxx);
}

double x_dot_with_density(double X, double c, double rho, double uxx, const ModelParams& params) {
  return (params.r.derivative(X, 1) * c - params.d.derivative(X, 1) * (1.0 + rho)) / (-uxx);
}

std::vector<double> elliptic_constraint_nutrient(std::span<const double> X,
                                                 const ModelParams& params, double hy,
                                                 std::span<const double> c_guess,
                                                 const FixedPointOptions& options) {
  const std::size_t n = X.size();
  std::vector<double> c(c_guess.begin(), c_guess.end());
  std::vector<double> rho(n);
  const double w = options.damping;
  for (int it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) rho[i] = constraint_rho(X[i], c[i], params);
    const auto solved = solve_c_elliptic(rho, params, hy);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = (1.0 - w) * c[i] + w * solved[i];
      change = std::max(change, std::abs(next - c[i]) / std::max(1.0, std::abs(next)));
      c[i] = next;
    }
    if (!std::isfinite(change)) break;
    if (change <= options.tolerance) return c;
  }
  fail(ErrorKind::NumericalBreakdown,
       "elliptic nutrient fixed point did not converge in " +
           std::to_string(options.max_iterations) + " iterations");
}

LimitState initial_limit_state(const InitialProfiles& init) {
  LimitState s;
  s.t = 0.0;
  s.X = init.X0;
  s.rho = init.rho0;
  s.c = init.c0;
  s.C_acc.assign(init.X0.size(), 0.0);
  s.P_acc.assign(init.X0.size(), 0.0);
  return s;
}

namespace {

void nan_guard(const LimitState& s) {
  for (std::size_t i = 0; i < s.X.size(); ++i) {
    if (!std::isfinite(s.X[i]) || !std::isfinite(s.c[i]) || !std::isfinite(s.rho[i])) {
      std::ostringstream msg;
      msg << "non-finite limit state at node " << i << ", t = " << s.t;
      fail(ErrorKind::NanGuard, msg.str());
    }
  }
}

}  // namespace

LimitState step_limit(const LimitState& state, const ModelParams& params, const Grids& grids,
                      double sigma0, double dt, const LimitOptions& options, StepStats* stats) {
  const std::size_t n = state.X.size();
  const double hy = grids.hy();
  const double half = 0.5 * dt;
  const bool elliptic = params.coupling == Coupling::Elliptic;
  double mismatch = 0.0;

  auto velocity = [&](double X, double c, double uxx) {
    const double v = x_dot(X, c, uxx, params);
    if (options.cross_check_velocity) {
      const double alt = x_dot_with_density(X, c, constraint_rho(X, c, params), uxx, params);
      mismatch = std::max(mismatch, std::abs(v - alt));
    }
    return v;
  };

  std::vector<double> X_half(n), C_half(n), P_half(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double uxx =
        uxx_at(state.X[i], state.t, state.C_acc[i], state.P_acc[i], sigma0, params);
    X_half[i] = state.X[i] + half * velocity(state.X[i], state.c[i], uxx);
    C_half[i] = state.C_acc[i] + half * state.c[i];
    P_half[i] = state.P_acc[i] + half * state.rho[i];
  }

  const std::vector<double> c_half =
      elliptic ? elliptic_constraint_nutrient(X_half, params, hy, state.c, options.fixed_point)
               : step_c_parabolic(state.c, state.rho, params, hy, half);

  LimitState next;
  next.t = state.t + dt;
  next.X.resize(n);
  std::vector<double> rho_half(n);
  for (std::size_t i = 0; i < n; ++i) {
    rho_half[i] = constraint_rho(X_half[i], c_half[i], params);
    const double uxx = uxx_at(X_half[i], state.t + half, C_half[i], P_half[i], sigma0, params);
    next.X[i] = state.X[i] + dt * velocity(X_half[i], c_half[i], uxx);
  }

  if (elliptic) {
    next.c = elliptic_constraint_nutrient(next.X, params, hy, c_half, options.fixed_point);
  } else {
    // Implicit midpoint: half an implicit-Euler step to the centre, then
    // extrapolate.
    const auto c_mid = step_c_parabolic(state.c, rho_half, params, hy, half);
    next.c.resize(n);
    for (std::size_t i = 0; i < n; ++i) next.c[i] = 2.0 * c_mid[i] - state.c[i];
  }

  next.rho.resize(n);
  next.C_acc.resize(n);
  next.P_acc.resize(n);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    next.rho[i] = constraint_rho(next.X[i], next.c[i], params);
    next.C_acc[i] = state.C_acc[i] + half * (state.c[i] + next.c[i]);
    next.P_acc[i] = state.P_acc[i] + half * (state.rho[i] + next.rho[i]);
    const double gain = params.r.value(next.X[i]) * next.c[i];
    const double res =
        std::abs(gain - params.d.value(next.X[i]) * (1.0 + next.rho[i])) / std::abs(gain);
    residual = std::max(residual, res);
  }
  nan_guard(next);
  if (stats) {
    stats->constraint_residual = residual;
    stats->velocity_mismatch = mismatch;
  }
  return next;
}

std::vector<double> reconstruct_u(const LimitState& state, const InitialProfiles& init,
                                  const ModelParams& params, const Grids& grids) {
  const std::size_t ny = state.X.size();
  const auto x = x_nodes(grids);
  const std::size_t nx = x.size();
  std::vector<double> rx(nx), dx(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    rx[j] = params.r.value(x[j]);
    dx[j] = params.d.value(x[j]);
  }
  std::vector<double> u(ny * nx);
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      const double dev = x[j] - init.X0[i];
      u[i * nx + j] = -dev * dev / (2.0 * init.sigma0) + rx[j] * state.C_acc[i] -
                      dx[j] * (state.t + state.P_acc[i]);
    }
  }
  return u;
}

namespace {

std::vector<std::size_t> snapshot_steps(std::span<const double> times, const Grids& grids) {
  std::vector<std::size_t> steps;
  const std::size_t total = grids.steps();
  for (double t : times) {
    const double k = std::round(t / grids.dt);
    if (k < 0.0 || static_cast<std::size_t>(k) > total || std::abs(k * grids.dt - t) > 1e-9)
      fail(ErrorKind::Config, "snapshot time " + std::to_string(t) +
                                  " is not a step multiple within [0, T_final]");
    steps.push_back(static_cast<std::size_t>(k));
  }
  return steps;
}

LimitSnapshot take_snapshot(const LimitState& s, const InitialProfiles& init,
                            const ModelParams& params, const Grids& grids,
                            const std::vector<double>& lipschitz_t) {
  const std::size_t n = s.X.size();
  const std::size_t nx = grids.Nx;
  const double hy = grids.hy();
  LimitSnapshot snap;
  snap.t = s.t;
  snap.X = s.X;
  snap.rho = s.rho;
  snap.c = s.c;
  snap.uxx_at_X.resize(n);
  snap.maxu_audit.resize(n);
  snap.argmax_offset.resize(n);
  snap.lipschitz_y.resize(n);
  snap.lipschitz_t = lipschitz_t;
  const auto u = reconstruct_u(s, init, params, grids);
  for (std::size_t i = 0; i < n; ++i) {
    snap.uxx_at_X[i] = uxx_at(s.X[i], s.t, s.C_acc[i], s.P_acc[i], init.sigma0, params);
    const auto am = refine_argmax(std::span<const double>(u).subspan(i * nx, nx));
    snap.maxu_audit[i] = am.u_star;
    snap.argmax_offset[i] = std::abs(am.x_star - s.X[i]);
    double q = 0.0;
    if (i > 0) q = std::max(q, std::abs(s.X[i] - s.X[i - 1]) / hy);
    if (i + 1 < n) q = std::max(q, std::abs(s.X[i + 1] - s.X[i]) / hy);
    snap.lipschitz_y[i] = q;
  }
  return snap;
}

}  // namespace

LimitRun run_limit(const ModelParams& params, const InitialProfiles& init, const Grids& grids,
                   std::span<const double> snapshot_times, const LimitOptions& options) {
  grids.check();
  const auto wanted = snapshot_steps(snapshot_times, grids);
  const std::size_t total = grids.steps();

  LimitRun run;
  LimitState state = initial_limit_state(init);
  std::vector<double> lipschitz_t(state.X.size(), 0.0);

  auto maybe_snapshot = [&](std::size_t k) {
    if (std::find(wanted.begin(), wanted.end(), k) != wanted.end())
      run.snapshots.push_back(take_snapshot(state, init, params, grids, lipschitz_t));
  };

  try {
    maybe_snapshot(0);
    for (std::size_t k = 1; k <= total; ++k) {
      StepStats stats;
      LimitState next = step_limit(state, params, grids, init.sigma0, grids.dt, options, &stats);
      next.t = static_cast<double>(k) * grids.dt;
      for (std::size_t i = 0; i < next.X.size(); ++i)
        lipschitz_t[i] = std::max(lipschitz_t[i], std::abs(next.X[i] - state.X[i]) / grids.dt);
      run.max_constraint_residual = std::max(run.max_constraint_residual, stats.constraint_residual);
      run.max_velocity_mismatch = std::max(run.max_velocity_mismatch, stats.velocity_mismatch);
      state = std::move(next);
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
