#pragma once

#include <span>
#include <vector>

#include "dirsel/model.hpp"
#include "dirsel/numerics.hpp"

namespace dirsel {

// One implicit-Euler step of  c_t - c_yy + (rho + lambda) c = lambda c_B  with
// zero-flux ends:
//   (I/dt - D_h + diag(rho + lambda)) c_new = c_old/dt + lambda c_B + source.
// `source` may be empty.
std::vector<double> step_c_parabolic(std::span<const double> c_old, std::span<const double> rho,
                                     const ModelParams& params, double hy, double dt,
                                     std::span<const double> source = {});

// Stationary  -c_yy + (rho + lambda) c = lambda c_B  with zero-flux ends.
std::vector<double> solve_c_elliptic(std::span<const double> rho, const ModelParams& params,
                                     double hy);

TridiagonalSystem assemble_nutrient_system(std::span<const double> rho, const ModelParams& params,
                                           double hy, double inv_dt);

// Manufactured nutrient c*(y, t) = c_B - A cos(pi y / L) exp(-t); zero-flux at
// y = +-L. `source` is what has to be added to the right-hand side so that c*
// solves the forced equation for the given rho.
struct ManufacturedNutrient {
  double amplitude = 0.5;
  double L = 5.0;
  double c_B = 4.0;
  double lambda = 8.0;

  double exact(double y, double t) const;
  double source(double y, double t, double rho) const;
};

}  // namespace dirsel
