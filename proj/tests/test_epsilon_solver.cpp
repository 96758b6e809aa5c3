#include "doctest.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "dirsel/epsilon_solver.hpp"
#include "dirsel/error.hpp"
#include "oracles.hpp"

using namespace dirsel;

namespace {

ModelParams default_params(Coupling coupling = Coupling::Parabolic) {
  return ModelParams(8.0, 4.0, Coefficient({CoefficientKind::QuadraticConcaveR, 3, 1, 0.5, {}}),
                     Coefficient({CoefficientKind::QuadraticConvexD, 1, 1, 0.5, {}}), coupling);
}

InitialProfiles flat_profiles(std::size_t ny, double X0, double rho0, double c0, double sigma0) {
  return {std::vector<double>(ny, X0), std::vector<double>(ny, rho0), std::vector<double>(ny, c0),
          sigma0};
}

Grids small_grids(std::size_t ny = 41, std::size_t nx = 201, double T = 1.0) {
  Grids g;
  g.Ny = ny;
  g.Nx = nx;
  g.T_final = T;
  return g;
}

}  // namespace

TEST_CASE("init_state: unit mass Gaussian") {
  const auto p = default_params();
  const auto g = small_grids(5);
  const auto s = init_state(p, flat_profiles(5, 0.5, 1.0, 2.0, 0.05), g, 0.05);
  const double shift = 0.05 * std::log(1.0 / std::sqrt(2 * std::numbers::pi * 0.05 * 0.05));
  const double ref = oracle::simpson(
      [&](double x) { return std::exp((-(x - 0.5) * (x - 0.5) / 0.1 + shift) / 0.05); });
  for (double rho : s.rho) {
    CHECK(std::abs(rho - 1.0) <= 0.05);
    CHECK(rho == doctest::Approx(ref).epsilon(1e-8));
  }
  CHECK(s.c == std::vector<double>(5, 2.0));
}

TEST_CASE("init_state: peak value at X0") {
  const auto p = default_params();
  const auto g = small_grids(3, 101);
  // Wide Gaussians lose mass to the trait boundary; eps = 1 still stays within 10%.
  for (double eps : {0.1, 0.5, 1.0}) {
    const auto s = init_state(p, flat_profiles(3, 0.5, 2.0, 2.0, 0.05), g, eps);
    const auto col = s.column(1);
    const double peak = eps * std::log(2.0 / std::sqrt(2 * std::numbers::pi * eps * 0.05));
    CHECK(col[50] == doctest::Approx(peak).epsilon(1e-14));
    CHECK(*std::max_element(col.begin(), col.end()) == col[50]);
  }
}

TEST_CASE("init_state: y-constant data gives a y-uniform state") {
  const auto p = default_params();
  const auto g = small_grids(9, 51);
  const auto s = init_state(p, flat_profiles(9, 0.4, 3.0, 2.2, 0.05), g, 0.05);
  for (std::size_t i = 1; i < 9; ++i) {
    CHECK(s.rho[i] == s.rho[0]);
    CHECK(s.c[i] == s.c[0]);
    for (std::size_t j = 0; j < 51; ++j) CHECK(s.column(i)[j] == s.column(0)[j]);
  }
}

TEST_CASE("init_state: under-resolved Gaussian is a resolution error") {
  const auto p = default_params();
  const auto g = small_grids(3, 5);
  try {
    init_state(p, flat_profiles(3, 0.37, 1.0, 2.0, 0.05), g, 0.001);
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resolution);
  }
}

TEST_CASE("step_u: frozen c and rho give an exact update") {
  const auto p = default_params();
  const auto g = small_grids(3, 101);
  auto s = init_state(p, flat_profiles(3, 0.4, 3.0, 2.0, 0.05), g, 0.05);
  const auto before = s;
  const double dt = 0.01;
  step_u(s, p, g, dt);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 101; ++j) {
      const double x = g.x(j);
      const double R = oracle::r(x) * before.c[i] - oracle::d(x) * (1 + before.rho[i]);
      CHECK(s.column(i)[j] == doctest::Approx(before.column(i)[j] + dt * R).epsilon(1e-14));
    }
  // rho is refreshed from the new u.
  CHECK(s.rho[1] == doctest::Approx(stabilized_exp_mass(s.column(1), 0.05)).epsilon(1e-15));
}

TEST_CASE("step_u: max u moves at second order from a constraint-satisfying state") {
  const auto p = default_params();
  const auto g = small_grids(3, 201);
  auto base = init_state(p, flat_profiles(3, 0.3, 3.0, 2.0, 0.05), g, 0.05);
  // Put the peak exactly at rest: R(X) = 0 for the quadrature rho.
  const auto peak = refine_argmax(base.column(1));
  const double c = oracle::d(peak.x_star) * (1 + base.rho[1]) / oracle::r(peak.x_star);
  base.c.assign(3, c);
  auto change = [&](double dt) {
    auto s = base;
    step_u(s, p, g, dt);
    return std::abs(refine_argmax(s.column(1)).u_star - peak.u_star);
  };
  const double a = change(0.02), b = change(0.01);
  CHECK(a < 1e-4);
  CHECK(a / b == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("step_u: discrete concavity strengthens") {
  const auto p = default_params();
  const auto g = small_grids(5, 101);
  auto s = init_state(p, flat_profiles(5, 0.6, 3.0, 2.0, 0.05), g, 0.05);
  for (int n = 0; n < 20; ++n) {
    const auto before = s;
    step_u(s, p, g, 0.01);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 1; j + 1 < 101; ++j) {
        const std::span<const double> u0 = before.column(i), u1 = std::as_const(s).column(i);
        CHECK(u1[j - 1] - 2 * u1[j] + u1[j + 1] < u0[j - 1] - 2 * u0[j] + u0[j + 1]);
      }
  }
}

TEST_CASE("step_u: NaN input trips the guard") {
  const auto p = default_params();
  const auto g = small_grids(3, 51);
  auto s = init_state(p, flat_profiles(3, 0.5, 3.0, 2.0, 0.05), g, 0.05);
  s.c[2] = std::numeric_limits<double>::quiet_NaN();
  try {
    step_u(s, p, g, 0.01);
    FAIL("expected NaN guard");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NanGuard);
    CHECK(std::string(e.what()).find("y =") != std::string::npos);
  }
}

TEST_CASE("diagnostics: exact parabola") {
  const auto p = default_params();
  const auto g = small_grids(3, 101);
  EpsState s;
  s.eps = 0.02;
  s.Ny = 3;
  s.Nx = 101;
  s.u.resize(3 * 101);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 101; ++j) s.column(i)[j] = -(g.x(j) - 0.4) * (g.x(j) - 0.4);
  s.c.assign(3, 2.0);
  s.rho.assign(3, 1.0);
  const auto m = diagnostics(s, p, g);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m.X_eps[i] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(m.width[i] == doctest::Approx(std::sqrt(0.02 / 2.0)).epsilon(1e-9));
    CHECK(m.max_u[i] == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("diagnostics: initial constraint residual is quadrature-sized") {
  const auto p = default_params();
  const auto g = small_grids(41, 201);
  const auto init = resolve_initial(p, InitialData{}, g);
  const auto s = init_state(p, init, g, 0.05);
  const auto m = diagnostics(s, p, g);
  for (std::size_t i = 0; i < g.Ny; ++i) {
    const double q = std::abs(s.rho[i] - init.rho0[i]);
    const double X = m.X_eps[i];
    // residual = |r c - d (1 + rho)| with compatible rho0: bounded by d * |rho - rho0| plus the
    // argmax refinement error.
    CHECK(m.constraint_residual[i] <= oracle::d(X) * q + 1e-6);
  }
  CHECK(m.bounds.count == 0);
}

TEST_CASE("run_epsilon: y-homogeneous run matches the 0-D reference") {
  const auto p = default_params();
  auto g = small_grids(3, 201);
  InitialData data;
  data.X0 = {Profile::Kind::Constant, 0.3};
  const auto init = resolve_initial(p, data, g);
  const double T[] = {1.0};
  const auto run = run_epsilon(p, init, g, 0.05, T);
  REQUIRE_FALSE(run.aborted);
  const auto ref =
      oracle::eps_reference(0.3, 0.05, init.rho0[0], init.c0[0], 0.05, 201, 1.0, 1e-4);
  const auto& snap = run.snapshots.back();
  CHECK(std::abs(snap.metrics.X_eps[1] - ref.X) < 1e-4);
  CHECK(std::abs(snap.rho[1] - ref.rho) < 1e-4);
  CHECK(std::abs(snap.c[1] - ref.c) < 1e-4);
}

TEST_CASE("run_epsilon: even data gives even outputs") {
  for (Coupling coupling : {Coupling::Parabolic, Coupling::Elliptic}) {
    const auto p = default_params(coupling);
    auto g = small_grids(41, 101, 0.2);
    g.dt = 0.01;
    InitialData data;
    data.X0 = {Profile::Kind::Cosine, 0.5, 0.15, 5.0, 0.0};
    const auto init = resolve_initial(p, data, g);
    const double T[] = {0.1, 0.2};
    const auto run = run_epsilon(p, init, g, 0.05, T);
    REQUIRE_FALSE(run.aborted);
    for (const auto& snap : run.snapshots)
      for (std::size_t i = 0; i < 41; ++i) {
        const std::size_t k = 40 - i;
        CHECK(snap.rho[i] == doctest::Approx(snap.rho[k]).epsilon(1e-12));
        CHECK(snap.c[i] == doctest::Approx(snap.c[k]).epsilon(1e-12));
        CHECK(snap.metrics.X_eps[i] == doctest::Approx(snap.metrics.X_eps[k]).epsilon(1e-12));
      }
  }
}

TEST_CASE("run_epsilon: strong-convergence gap shrinks with eps") {
  const auto p = default_params();
  auto g = small_grids(21, 201, 1.0);
  const auto init = resolve_initial(p, InitialData{}, g);
  const double T[] = {0.5, 1.0};
  const auto coarse = run_epsilon(p, init, g, 0.1, T);
  const auto fine = run_epsilon(p, init, g, 0.025, T);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& a = coarse.snapshots[k].metrics.strongconv_gap;
    const auto& b = fine.snapshots[k].metrics.strongconv_gap;
    CHECK(*std::max_element(b.begin(), b.end()) < *std::max_element(a.begin(), a.end()));
  }
}

TEST_CASE("run_epsilon: snapshots, bounds and drift band") {
  const auto p = default_params();
  auto g = small_grids(21, 201, 0.5);
  const auto init = resolve_initial(p, InitialData{}, g);
  const double T[] = {0.0, 0.25, 0.5};
  EpsOptions opt;
  opt.dump_fields = true;
  const auto run = run_epsilon(p, init, g, 0.05, T, opt);
  REQUIRE(run.snapshots.size() == 3);
  CHECK(run.snapshots[0].t == 0.0);
  CHECK(run.snapshots[2].t == doctest::Approx(0.5));
  CHECK(run.snapshots[1].u.size() == 21 * 201);
  CHECK(run.bound_violations == 0);
  const double band = 2 * 0.05 * std::abs(std::log(0.05));
  for (const auto& snap : run.snapshots)
    for (std::size_t i = 0; i < 21; ++i)
      CHECK(std::abs(snap.metrics.max_u[i]) <= band + std::abs(run.initial_max_u[i]));
}

TEST_CASE("run_epsilon: picard pass stays close to the lagged step") {
  const auto p = default_params();
  auto g = small_grids(5, 201, 0.2);
  const auto init = resolve_initial(p, InitialData{}, g);
  const double T[] = {0.2};
  EpsOptions opt;
  const auto lag = run_epsilon(p, init, g, 0.05, T, opt);
  opt.picard = 1;
  const auto pic = run_epsilon(p, init, g, 0.05, T, opt);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(std::abs(lag.snapshots[0].rho[i] - pic.snapshots[0].rho[i]) < 1e-3);
}
