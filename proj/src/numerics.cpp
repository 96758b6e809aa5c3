#include "dirsel/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dirsel/error.hpp"

namespace dirsel {

std::size_t Grids::steps() const {
  return static_cast<std::size_t>(std::llround(T_final / dt));
}

void Grids::check() const {
  std::ostringstream msg;
  if (Ny < 3) msg << "grids.Ny must be >= 3 (got " << Ny << "); ";
  if (Nx < 3) msg << "grids.Nx must be >= 3 (got " << Nx << "); ";
  if (!(L > 0.0)) msg << "grids.L must be positive; ";
  if (!(dt > 0.0)) msg << "grids.dt must be positive; ";
  if (!(T_final >= dt)) msg << "grids.T_final must be >= grids.dt; ";
  if (dt > 0.0 && T_final >= dt) {
    const double n = T_final / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * n)
      msg << "grids.T_final must be an integer multiple of grids.dt; ";
  }
  const auto text = msg.str();
  if (!text.empty()) fail(ErrorKind::Config, text.substr(0, text.size() - 2));
}

std::vector<double> x_nodes(const Grids& g) {
  std::vector<double> x(g.Nx);
  for (std::size_t j = 0; j < g.Nx; ++j) x[j] = g.x(j);
  x.back() = 1.0;
  return x;
}

std::vector<double> y_nodes(const Grids& g) {
  std::vector<double> y(g.Ny);
  for (std::size_t i = 0; i < g.Ny; ++i) y[i] = g.y(i);
  y.back() = g.L;
  return y;
}

double trapezoid_mass(std::span<const double> f) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  double interior = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) interior += f[j];
  const double h = 1.0 / static_cast<double>(n - 1);
  return h * (0.5 * (f.front() + f.back()) + interior);
}

namespace {

// trapezoid(exp((u - m)/eps)) with m = max(u); the sum is >= h/2.
double shifted_mass(std::span<const double> u, double eps, double& m) {
  m = *std::max_element(u.begin(), u.end());
  const std::size_t n = u.size();
  double interior = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) interior += std::exp((u[j] - m) / eps);
  const double ends = std::exp((u.front() - m) / eps) + std::exp((u.back() - m) / eps);
  const double h = 1.0 / static_cast<double>(n - 1);
  return h * (0.5 * ends + interior);
}

}  // namespace

double stabilized_exp_mass(std::span<const double> u, double eps) {
  if (u.size() < 2) return 0.0;
  double m = 0.0;
  const double s = shifted_mass(u, eps, m);
  return std::exp(m / eps) * s;
}

double stabilized_exp_log_mass(std::span<const double> u, double eps) {
  if (u.size() < 2) return -std::numeric_limits<double>::infinity();
  double m = 0.0;
  const double s = shifted_mass(u, eps, m);
  return m + eps * std::log(s);
}

std::vector<double> TridiagonalSystem::apply(std::span<const double> v) const {
  const std::size_t n = size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * v[i];
    if (i > 0) acc += sub[i] * v[i - 1];
    if (i + 1 < n) acc += sup[i] * v[i + 1];
    out[i] = acc;
  }
  return out;
}

bool TridiagonalSystem::diagonally_dominant() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    if (i > 0) off += std::abs(sub[i]);
    if (i + 1 < n) off += std::abs(sup[i]);
    if (std::abs(diag[i]) < off) return false;
  }
  return true;
}

std::vector<double> solve_tridiagonal(const TridiagonalSystem& system) {
  const std::size_t n = system.size();
  std::vector<double> c_prime(n, 0.0);
  std::vector<double> v(n, 0.0);
  if (n == 0) return v;

  double pivot = system.diag[0];
  for (std::size_t i = 0;; ++i) {
    if (std::abs(pivot) < kPivotFloor || !std::isfinite(pivot)) {
      std::ostringstream msg;
      msg << "tridiagonal pivot " << pivot << " at row " << i << " below " << kPivotFloor;
      fail(ErrorKind::NumericalBreakdown, msg.str());
    }
    const double sup = (i + 1 < n) ? system.sup[i] : 0.0;
    c_prime[i] = sup / pivot;
    v[i] = (system.rhs[i] - (i > 0 ? system.sub[i] * v[i - 1] : 0.0)) / pivot;
    if (i + 1 == n) break;
    pivot = system.diag[i + 1] - system.sub[i + 1] * c_prime[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) v[i] -= c_prime[i] * v[i + 1];
  return v;
}

void add_neumann_laplacian(TridiagonalSystem& system, double h) {
  const std::size_t n = system.size();
  const double k = 1.0 / (h * h);
  for (std::size_t i = 0; i < n; ++i) {
    system.diag[i] += 2.0 * k;
    if (i > 0) system.sub[i] -= k;
    if (i + 1 < n) system.sup[i] -= k;
  }
  // Mirror ghosts: v[-1] = v[1], v[n] = v[n-2].
  system.sup[0] -= k;
  system.sub[n - 1] -= k;
}

ArgmaxResult refine_argmax(std::span<const double> u) {
  const std::size_t n = u.size();
  if (n < 3) fail(ErrorKind::ConcavityLoss, "refine_argmax needs at least 3 samples");
  const double h = 1.0 / static_cast<double>(n - 1);

  std::size_t k = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (u[j] > u[k]) k = j;

  // Parabola through (c-1, c, c+1) in local coordinate s = (x - x_c)/h.
  const std::size_t c = std::clamp<std::size_t>(k, 1, n - 2);
  const double um = u[c - 1], u0 = u[c], up = u[c + 1];
  const double a = 0.5 * (up - 2.0 * u0 + um);
  const double b = 0.5 * (up - um);
  const double uxx = 2.0 * a / (h * h);
  if (!(uxx < 0.0)) {
    std::ostringstream msg;
    msg << "fitted curvature " << uxx << " is not negative near node " << k;
    fail(ErrorKind::ConcavityLoss, msg.str());
  }
  const double xc = h * static_cast<double>(c);
  const double s_vertex = -b / (2.0 * a);
  const double x_star = std::clamp(xc + h * s_vertex, 0.0, 1.0);
  const double s = (x_star - xc) / h;

  ArgmaxResult out;
  out.x_star = x_star;
  out.u_star = u0 + b * s + a * s * s;
  out.uxx_star = uxx;
  out.index = k;
  return out;
}

double max_second_difference(std::span<const double> u) {
  const std::size_t n = u.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j + 1 < n; ++j)
    worst = std::max(worst, (u[j - 1] - 2.0 * u[j] + u[j + 1]) / (h * h));
  return worst;
}

}  // namespace dirsel
