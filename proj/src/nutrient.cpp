#include "dirsel/nutrient.hpp"

#include <cmath>
#include <numbers>

namespace dirsel {

TridiagonalSystem assemble_nutrient_system(std::span<const double> rho, const ModelParams& params,
                                           double hy, double inv_dt) {
  const std::size_t n = rho.size();
  TridiagonalSystem system(n);
  add_neumann_laplacian(system, hy);
  for (std::size_t i = 0; i < n; ++i) {
    system.diag[i] += inv_dt + params.lambda + rho[i];
    system.rhs[i] = params.lambda * params.c_B;
  }
  return system;
}

std::vector<double> step_c_parabolic(std::span<const double> c_old, std::span<const double> rho,
                                     const ModelParams& params, double hy, double dt,
                                     std::span<const double> source) {
  auto system = assemble_nutrient_system(rho, params, hy, 1.0 / dt);
  for (std::size_t i = 0; i < system.size(); ++i) {
    system.rhs[i] += c_old[i] / dt;
    if (!source.empty()) system.rhs[i] += source[i];
  }
  return solve_tridiagonal(system);
}

std::vector<double> solve_c_elliptic(std::span<const double> rho, const ModelParams& params,
                                     double hy) {
  return solve_tridiagonal(assemble_nutrient_system(rho, params, hy, 0.0));
}

double ManufacturedNutrient::exact(double y, double t) const {
  return c_B - amplitude * std::cos(std::numbers::pi * y / L) * std::exp(-t);
}

double ManufacturedNutrient::source(double y, double t, double rho) const {
  const double k = std::numbers::pi / L;
  const double mode = amplitude * std::cos(k * y) * std::exp(-t);
  const double c = c_B - mode;
  const double c_t = mode;
  const double c_yy = k * k * mode;
  return c_t - c_yy + (rho + lambda) * c - lambda * c_B;
}

}  // namespace dirsel
