#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirsel/model.hpp"
#include "dirsel/nutrient.hpp"
#include "dirsel/numerics.hpp"

namespace dirsel {

// u = eps ln n on the (y, x) grid, row-major with x fastest; c and rho on the
// y-grid. rho is kept equal to the quadrature of exp(u/eps) over x.
struct EpsState {
  double t = 0.0;
  double eps = 0.05;
  std::size_t Ny = 0;
  std::size_t Nx = 0;
  std::vector<double> u;
  std::vector<double> c;
  std::vector<double> rho;

  std::span<const double> column(std::size_t i) const {
    return std::span<const double>(u).subspan(i * Nx, Nx);
  }
  std::span<double> column(std::size_t i) { return std::span<double>(u).subspan(i * Nx, Nx); }
};

// Relative mismatch allowed between rho0 and the quadrature of the initial
// Gaussian before the grid is declared too coarse.
inline constexpr double kInitialMassTolerance = 0.10;

// u(y, x) = -(x - X0)^2 / (2 sigma0) + eps ln(rho0 / sqrt(2 pi eps sigma0)).
// Throws Resolution when the quadrature misses rho0 by more than 10%.
EpsState init_state(const ModelParams& params, const InitialProfiles& init, const Grids& grids,
                    double eps);

// u <- u + dt R(x, c, rho), rho recomputed from u. With picard = 1 the step is
// redone once with rho averaged between the start and the predicted end.
// Throws NanGuard with the offending node.
void step_u(EpsState& state, const ModelParams& params, const Grids& grids, double dt,
            int picard = 0);

// A priori bounds on c and rho.
struct BoundTolerance {
  double solver = 1e-10;         // 0 <= c <= c_B
  double discretization = 1e-3;  // c >= c_m, rho in [rho_m, rho_M]
};

struct BoundViolations {
  std::size_t count = 0;
  double worst = 0.0;  // largest excess beyond the tolerated bound
  std::string first;   // description of the first violation
};

struct EpsMetrics {
  std::vector<double> X_eps;
  std::vector<double> width;  // sqrt(eps / |u_xx at argmax|)
  std::vector<double> max_u;
  std::vector<double> constraint_residual;
  std::vector<double> strongconv_gap;
  std::vector<double> ux_max;       // max_x |u_x|, centred differences
  std::vector<double> uxx_max;      // max interior second difference (< 0)
  std::vector<double> uxxx_max;     // max_x |u_xxx|
  BoundViolations bounds;
};

// `lower_bounds` turns on the checks rho >= rho_m and c >= c_m, which only
// follow when the initial data sits inside the bounds.
EpsMetrics diagnostics(const EpsState& state, const ModelParams& params, const Grids& grids,
                       bool lower_bounds = true, const BoundTolerance& tol = {});

struct EpsOptions {
  int picard = 0;
  bool dump_fields = false;
  std::optional<ManufacturedNutrient> forcing;  // test hook
  BoundTolerance tolerance;
};

struct EpsSnapshot {
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> c;
  EpsMetrics metrics;
  std::vector<double> u;  // filled when dump_fields
};

struct EpsRun {
  double eps = 0.0;
  std::vector<EpsSnapshot> snapshots;
  std::size_t bound_violations = 0;
  double worst_violation = 0.0;
  std::string first_violation;
  bool aborted = false;
  std::string abort_reason;
  double last_valid_time = 0.0;
  std::vector<double> initial_max_u;
  EpsState final_state;
};

// Time-marches step_u and the nutrient update (implicit Euler for parabolic
// coupling, stationary solve for elliptic coupling).
EpsRun run_epsilon(const ModelParams& params, const InitialProfiles& init, const Grids& grids,
                   double eps, std::span<const double> snapshot_times,
                   const EpsOptions& options = {});

}  // namespace dirsel
