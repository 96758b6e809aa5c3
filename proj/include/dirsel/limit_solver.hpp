#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dirsel/model.hpp"
#include "dirsel/numerics.hpp"

namespace dirsel {

// Limit state on the y-grid. The accumulators C_acc = int_0^t c ds and
// P_acc = int_0^t rho ds rebuild the limiting potential
//   u(y, x, t) = u0(y, x) + r(x) C_acc - d(x) (t + P_acc).
struct LimitState {
  double t = 0.0;
  std::vector<double> X;
  std::vector<double> rho;
  std::vector<double> c;
  std::vector<double> C_acc;
  std::vector<double> P_acc;
};

// r(X) c / d(X) - 1: the density that gives zero net growth at trait X.
double constraint_rho(double X, double c, const ModelParams& params);

// d_xx u at X: u0''(X) + r''(X) C_acc - d''(X) (t + P_acc), with u0'' = -1/sigma0
// for Gaussian initial data. Throws ConcavityLoss when the result is >= 0.
double uxx_at(double X, double t, double C_acc, double P_acc, double sigma0,
              const ModelParams& params);

// Trait velocity with rho eliminated through the constraint:
//   (-uxx)^-1 (r'(X) - d'(X) r(X)/d(X)) c
double x_dot(double X, double c, double uxx, const ModelParams& params);

// The same velocity written with an explicit density:
//   (-uxx)^-1 (r'(X) c - d'(X)(1 + rho))
double x_dot_with_density(double X, double c, double rho, double uxx, const ModelParams& params);

// Stationary nutrient with rho = constraint_rho(X, c), by damped fixed-point
// iteration c <- (1 - w) c + w solve_c_elliptic(rho(X, c)).
struct FixedPointOptions {
  double damping = 0.5;
  double tolerance = 1e-10;
  int max_iterations = 200;
};

std::vector<double> elliptic_constraint_nutrient(std::span<const double> X,
                                                 const ModelParams& params, double hy,
                                                 std::span<const double> c_guess,
                                                 const FixedPointOptions& options = {});

struct LimitOptions {
  FixedPointOptions fixed_point;
  // Largest |x_dot - x_dot_with_density| seen is tracked when true.
  bool cross_check_velocity = true;
};

struct StepStats {
  double constraint_residual = 0.0;  // max relative |r(X)c - d(X)(1+rho)| at exit
  double velocity_mismatch = 0.0;    // max |x_dot - x_dot_with_density| over both stages
};

LimitState initial_limit_state(const InitialProfiles& init);

// One step of the limit system: midpoint RK2 for X with accumulators and the
// nutrient carried to the half step; the nutrient is then advanced with the
// implicit midpoint rule (parabolic) or re-solved at X_new (elliptic); rho is
// recomputed from the constraint; accumulators use the trapezoid rule.
LimitState step_limit(const LimitState& state, const ModelParams& params, const Grids& grids,
                      double sigma0, double dt, const LimitOptions& options = {},
                      StepStats* stats = nullptr);

// u0(y, x) = -(x - X0(y))^2 / (2 sigma0), rebuilt with the accumulators.
std::vector<double> reconstruct_u(const LimitState& state, const InitialProfiles& init,
                                  const ModelParams& params, const Grids& grids);

struct LimitSnapshot {
  double t = 0.0;
  std::vector<double> X;
  std::vector<double> rho;
  std::vector<double> c;
  std::vector<double> uxx_at_X;
  std::vector<double> maxu_audit;     // max_x of the reconstructed u
  std::vector<double> argmax_offset;  // |argmax of reconstructed u - X|
  std::vector<double> lipschitz_t;    // max |dX/dt| over the steps so far
  std::vector<double> lipschitz_y;    // max one-sided |dX/dy| at each node
};

struct LimitRun {
  std::vector<LimitSnapshot> snapshots;
  double max_constraint_residual = 0.0;
  double max_velocity_mismatch = 0.0;
  bool aborted = false;
  std::string abort_reason;
  double last_valid_time = 0.0;
  LimitState final_state;
};

// Snapshot times are rounded to the nearest step; t = 0 is allowed.
LimitRun run_limit(const ModelParams& params, const InitialProfiles& init, const Grids& grids,
                   std::span<const double> snapshot_times, const LimitOptions& options = {});

}  // namespace dirsel
