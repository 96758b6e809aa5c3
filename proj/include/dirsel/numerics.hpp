#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dirsel {

// Uniform grids: y-nodes on [-L, L], x-nodes on [0, 1] with endpoints, fixed
// time step. The trait interval is closed; y is a truncation of the real line.
struct Grids {
  double L = 5.0;
  std::size_t Ny = 201;
  std::size_t Nx = 201;
  double dt = 1e-3;
  double T_final = 1.0;

  double hy() const { return 2.0 * L / static_cast<double>(Ny - 1); }
  double hx() const { return 1.0 / static_cast<double>(Nx - 1); }
  double y(std::size_t i) const { return -L + hy() * static_cast<double>(i); }
  double x(std::size_t j) const { return hx() * static_cast<double>(j); }
  std::size_t steps() const;

  // Throws Config on Ny < 3, Nx < 3, non-positive spacings, or T_final < dt.
  void check() const;
};

std::vector<double> x_nodes(const Grids& g);
std::vector<double> y_nodes(const Grids& g);

// Trapezoid rule over [0, 1]; samples are taken to be uniformly spaced.
double trapezoid_mass(std::span<const double> f);

// Trapezoid integral of exp(u/eps) over [0, 1], evaluated as
// exp(m/eps) * trapezoid(exp((u - m)/eps)) with m = max(u). Terms far below
// the maximum underflow to zero.
double stabilized_exp_mass(std::span<const double> u, double eps);

// Same quantity returned as eps * log(mass); stays finite when the mass itself
// would overflow.
double stabilized_exp_log_mass(std::span<const double> u, double eps);

// Row i reads sub[i]*v[i-1] + diag[i]*v[i] + sup[i]*v[i+1] = rhs[i];
// sub[0] and sup[n-1] are ignored.
struct TridiagonalSystem {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> sup;
  std::vector<double> rhs;

  explicit TridiagonalSystem(std::size_t n = 0)
      : sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0) {}

  std::size_t size() const { return diag.size(); }
  std::vector<double> apply(std::span<const double> v) const;
  bool diagonally_dominant() const;
};

inline constexpr double kPivotFloor = 1e-14;

// Thomas algorithm. Throws NumericalBreakdown when a pivot magnitude falls
// below kPivotFloor.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& system);

// Adds -Laplacian with mirror-ghost (zero-flux) closure on spacing h to the
// matrix part of `system`.
void add_neumann_laplacian(TridiagonalSystem& system, double h);

struct ArgmaxResult {
  double x_star = 0.0;
  double u_star = 0.0;
  double uxx_star = 0.0;
  std::size_t index = 0;
};

// Discrete argmax (ties go to the smaller index) refined by the parabola
// through the maximiser and its neighbours; a one-sided stencil is used at
// the end nodes. The vertex is clamped to [0, 1] and `u_star` is the fitted
// parabola at the clamped location. Throws ConcavityLoss when the fitted
// curvature is not negative.
ArgmaxResult refine_argmax(std::span<const double> u);

// Largest interior second difference (u[j-1] - 2u[j] + u[j+1]) / hx^2.
double max_second_difference(std::span<const double> u);

}  // namespace dirsel
