#include "doctest.h"

#include <cmath>

#include "dirsel/error.hpp"
#include "dirsel/limit_solver.hpp"
#include "oracles.hpp"

using namespace dirsel;

namespace {

ModelParams default_params(Coupling coupling = Coupling::Parabolic) {
  return ModelParams(8.0, 4.0, Coefficient({CoefficientKind::QuadraticConcaveR, 3, 1, 0.5, {}}),
                     Coefficient({CoefficientKind::QuadraticConvexD, 1, 1, 0.5, {}}), coupling);
}

Coefficient tabulated(std::vector<double> s) {
  return Coefficient({CoefficientKind::Tabulated, 0, 0, 0.5, std::move(s)});
}

Grids grids(std::size_t ny, double T, double dt = 1e-3, std::size_t nx = 201) {
  Grids g;
  g.Ny = ny;
  g.Nx = nx;
  g.T_final = T;
  g.dt = dt;
  return g;
}

}  // namespace

TEST_CASE("constraint_rho: worked examples") {
  const ModelParams consts(2.0, 3.0, tabulated({2, 2, 2}), tabulated({1, 1, 1}));
  CHECK(constraint_rho(0.4, 1.0, consts) == doctest::Approx(1.0));
  const auto p = default_params();
  const auto& b = p.bounds();
  CHECK(constraint_rho(b.argmin_ratio, b.c_m, p) == doctest::Approx(b.rho_m).epsilon(1e-14));
  CHECK(constraint_rho(0.5, 2.0, p) == doctest::Approx(oracle::r(0.5) * 2.0 / oracle::d(0.5) - 1));
  CHECK(constraint_rho(0.5, 2.0, p) == doctest::Approx(5.0));
}

TEST_CASE("uxx_at: closed formula and concavity guard") {
  const auto p = default_params();
  CHECK(uxx_at(0.3, 0.0, 0.0, 0.0, 0.05, p) == doctest::Approx(-20.0));
  // -1/sigma0 + r'' C - d'' (t + P) = -1 - 2 - 2
  CHECK(uxx_at(0.3, 1.0, 1.0, 0.0, 1.0, p) == doctest::Approx(-5.0));
  try {
    uxx_at(0.3, 0.0, -10.0, 0.0, 1.0, p);
    FAIL("expected concavity loss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConcavityLoss);
  }
}

TEST_CASE("x_dot: worked examples and dual forms") {
  const auto p = default_params();
  // r'(0.5) = d'(0.5) = 0: joint stationary point.
  CHECK(x_dot(0.5, 2.0, -3.0, p) == 0.0);
  // r(x) = 1 + x (r' = 1), d = 2 (d' = 0).
  const ModelParams lin(8.0, 4.0, tabulated({1.0, 1.25, 1.5, 1.75, 2.0}), tabulated({2, 2, 2, 2, 2}));
  CHECK(x_dot(0.37, 1.0, -1.0, lin) == doctest::Approx(1.0).epsilon(1e-12));
  const double rho = constraint_rho(0.3, 2.0, p);
  const double a = x_dot(0.3, 2.0, -5.0, p);
  const double b = x_dot_with_density(0.3, 2.0, rho, -5.0, p);
  CHECK(std::abs(a - b) <= 1e-12);
  CHECK(a == doctest::Approx((oracle::r1(0.3) - oracle::d1(0.3) * oracle::r(0.3) / oracle::d(0.3)) *
                             2.0 / 5.0));
}

TEST_CASE("x_dot: dual forms agree everywhere (property)") {
  oracle::Rng rng(31);
  const auto p = default_params();
  for (int trial = 0; trial < 1000; ++trial) {
    const double X = rng.uniform(), c = rng.uniform(0.1, 4), uxx = -rng.uniform(0.5, 100);
    const double rho = constraint_rho(X, c, p);
    CHECK(std::abs(x_dot(X, c, uxx, p) - x_dot_with_density(X, c, rho, uxx, p)) <= 1e-12);
  }
}

TEST_CASE("step_limit: y-uniform run matches the 0-D reference") {
  for (double dt : {1e-3, 5e-4}) {
    const auto p = default_params();
    auto g = grids(3, 1.0, dt);
    InitialData data;
    data.X0 = {Profile::Kind::Constant, 0.3};
    const auto init = resolve_initial(p, data, g);
    const double T[] = {1.0};
    const auto run = run_limit(p, init, g, T);
    REQUIRE_FALSE(run.aborted);
    const auto ref = oracle::limit_reference(0.3, 0.05, init.c0[0], 1.0, 1e-4);
    const auto& s = run.snapshots.back();
    CHECK(std::abs(s.X[1] - ref.X) < 1e-6);
    CHECK(std::abs(s.c[1] - ref.c) < 1e-6);
    CHECK(std::abs(s.rho[1] - ref.rho) < 1e-6);
  }
}

TEST_CASE("step_limit: stationary scenario is a fixed point") {
  for (Coupling coupling : {Coupling::Parabolic, Coupling::Elliptic}) {
    const auto p = default_params(coupling);
    auto g = grids(5, 0.01, 1e-3);
    InitialData data;
    data.X0 = {Profile::Kind::Constant, 0.5};
    const auto init = resolve_initial(p, data, g);
    auto s = initial_limit_state(init);
    for (int n = 0; n < 10; ++n) s = step_limit(s, p, g, init.sigma0, g.dt);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(s.X[i] == 0.5);
      CHECK(s.c[i] == doctest::Approx(init.c0[i]).epsilon(1e-14));
      CHECK(s.rho[i] == doctest::Approx(init.rho0[i]).epsilon(1e-14));
    }
    const auto u = reconstruct_u(s, init, p, g);
    for (std::size_t i = 0; i < 5; ++i) {
      const std::vector<double> col(u.begin() + i * g.Nx, u.begin() + (i + 1) * g.Nx);
      CHECK(std::abs(*std::max_element(col.begin(), col.end())) < 1e-13);
    }
  }
}

TEST_CASE("step_limit: elliptic nutrient solves the one-node fixed point") {
  const auto p = default_params(Coupling::Elliptic);
  const std::vector<double> X(7, 0.35);
  const auto c = elliptic_constraint_nutrient(X, p, 0.2, std::vector<double>(7, 2.0));
  for (double v : c) CHECK(v == doctest::Approx(oracle::equilibrium_c(0.35)).epsilon(1e-9));

  auto g = grids(41, 0.1, 1e-2);
  const auto init = resolve_initial(p, InitialData{}, g);
  auto s = initial_limit_state(init);
  StepStats stats;
  s = step_limit(s, p, g, init.sigma0, g.dt, {}, &stats);
  CHECK(stats.constraint_residual <= 1e-12);
  for (std::size_t i = 0; i < 41; ++i)
    CHECK(std::abs(oracle::r(s.X[i]) * s.c[i] - oracle::d(s.X[i]) * (1 + s.rho[i])) <= 1e-12);
}

TEST_CASE("reconstruct_u: t = 0 gives the initial Gaussian") {
  const auto p = default_params();
  auto g = grids(11, 1.0);
  const auto init = resolve_initial(p, InitialData{}, g);
  const auto u = reconstruct_u(initial_limit_state(init), init, p, g);
  for (std::size_t i = 0; i < 11; ++i)
    for (std::size_t j = 0; j < g.Nx; ++j) {
      const double dx = g.x(j) - init.X0[i];
      CHECK(u[i * g.Nx + j] == doctest::Approx(-dx * dx / (2 * init.sigma0)).scale(1.0));
    }
}

TEST_CASE("run_limit: default run audits") {
  const auto p = default_params();
  auto g = grids(201, 1.0);
  const auto init = resolve_initial(p, InitialData{}, g);
  const double T[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto run = run_limit(p, init, g, T);
  REQUIRE_FALSE(run.aborted);
  REQUIRE(run.snapshots.size() == 5);
  CHECK(run.max_constraint_residual <= 1e-12);
  CHECK(run.max_velocity_mismatch <= 1e-12);
  const auto& b = p.bounds();
  for (const auto& s : run.snapshots)
    for (std::size_t i = 0; i < g.Ny; ++i) {
      CHECK(s.rho[i] >= b.rho_m);
      CHECK(s.rho[i] <= b.rho_M);
      CHECK(s.c[i] >= b.c_m);
      CHECK(s.c[i] <= p.c_B);
      CHECK(std::abs(s.maxu_audit[i]) <= 5 * g.dt * s.t + 1e-14);
      CHECK(s.argmax_offset[i] <= g.hx());
      CHECK(std::isfinite(s.lipschitz_t[i]));
      CHECK(std::isfinite(s.lipschitz_y[i]));
      CHECK(s.uxx_at_X[i] < 0.0);
    }
  // Curvature at X only grows more negative.
  for (std::size_t k = 1; k < run.snapshots.size(); ++k)
    for (std::size_t i = 0; i < g.Ny; ++i)
      CHECK(run.snapshots[k].uxx_at_X[i] <= run.snapshots[k - 1].uxx_at_X[i]);
}

TEST_CASE("run_limit: uxx at X against finite differences of the reconstructed field") {
  const auto p = default_params();
  std::vector<double> errs;
  for (std::size_t nx : {101, 201, 401}) {
    auto g = grids(21, 0.5, 1e-3, nx);
    const auto init = resolve_initial(p, InitialData{}, g);
    const double T[] = {0.5};
    const auto run = run_limit(p, init, g, T);
    const auto u = reconstruct_u(run.final_state, init, p, g);
    double err = 0.0;
    const double h = g.hx();
    for (std::size_t i = 0; i < g.Ny; ++i) {
      const double X = run.final_state.X[i];
      const auto j = static_cast<std::size_t>(std::llround(X / h));
      const double* col = &u[i * g.Nx];
      const double fd = (col[j - 1] - 2 * col[j] + col[j + 1]) / (h * h);
      err = std::max(err, std::abs(fd - run.snapshots[0].uxx_at_X[i]));
    }
    errs.push_back(err);
  }
  // Quadratic coefficients make the x-profile exactly quadratic: agreement to round-off.
  for (double e : errs) CHECK(e < 1e-6);
}

TEST_CASE("run_limit: even data gives even outputs") {
  for (Coupling coupling : {Coupling::Parabolic, Coupling::Elliptic}) {
    const auto p = default_params(coupling);
    auto g = grids(41, 0.5, 1e-2);
    InitialData data;
    data.X0 = {Profile::Kind::Cosine, 0.5, 0.15, 5.0, 0.0};
    const auto init = resolve_initial(p, data, g);
    const double T[] = {0.5};
    const auto run = run_limit(p, init, g, T);
    REQUIRE_FALSE(run.aborted);
    const auto& s = run.snapshots[0];
    for (std::size_t i = 0; i < 41; ++i) {
      CHECK(s.X[i] == doctest::Approx(s.X[40 - i]).epsilon(1e-12));
      CHECK(s.c[i] == doctest::Approx(s.c[40 - i]).epsilon(1e-12));
      CHECK(s.rho[i] == doctest::Approx(s.rho[40 - i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("run_limit: Lipschitz quotients stay bounded under refinement") {
  const auto p = default_params();
  std::vector<double> lt, ly;
  for (std::size_t ny : {51, 101, 201}) {
    auto g = grids(ny, 1.0, 1e-3);
    const auto init = resolve_initial(p, InitialData{}, g);
    const double T[] = {1.0};
    const auto s = run_limit(p, init, g, T).snapshots[0];
    lt.push_back(*std::max_element(s.lipschitz_t.begin(), s.lipschitz_t.end()));
    ly.push_back(*std::max_element(s.lipschitz_y.begin(), s.lipschitz_y.end()));
  }
  CHECK(lt[2] <= 1.1 * lt[0]);
  CHECK(ly[2] <= 1.1 * ly[0]);
  CHECK(ly[2] <= 0.2 + 1e-12);  // |X0'| <= 0.2 and the drift flattens X
}

TEST_CASE("run_limit: off-grid snapshot times are rejected") {
  const auto p = default_params();
  auto g = grids(5, 1.0, 1e-2);
  const auto init = resolve_initial(p, InitialData{}, g);
  const double T[] = {0.123};
  try {
    run_limit(p, init, g, T);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}
