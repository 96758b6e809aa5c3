#include "doctest.h"

#include <cmath>

#include "dirsel/error.hpp"
#include "dirsel/model.hpp"
#include "oracles.hpp"

using namespace dirsel;

namespace {

Coefficient tabulated(std::vector<double> samples) {
  return Coefficient({CoefficientKind::Tabulated, 0.0, 0.0, 0.5, std::move(samples)});
}

Coefficient quad_r(double peak = 3.0, double curv = 1.0, double center = 0.5) {
  return Coefficient({CoefficientKind::QuadraticConcaveR, peak, curv, center, {}});
}

Coefficient quad_d(double peak = 1.0, double curv = 1.0, double center = 0.5) {
  return Coefficient({CoefficientKind::QuadraticConvexD, peak, curv, center, {}});
}

ModelParams default_params(Coupling coupling = Coupling::Parabolic) {
  return ModelParams(8.0, 4.0, quad_r(), quad_d(), coupling);
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("coefficients: quadratic values and derivatives") {
  const auto r = quad_r();
  const auto d = quad_d();
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    CHECK(r.value(x) == doctest::Approx(oracle::r(x)));
    CHECK(d.value(x) == doctest::Approx(oracle::d(x)));
    CHECK(r.derivative(x, 1) == doctest::Approx(oracle::r1(x)));
    CHECK(d.derivative(x, 1) == doctest::Approx(oracle::d1(x)));
    CHECK(r.derivative(x, 2) == oracle::r2);
    CHECK(d.derivative(x, 2) == oracle::d2);
    CHECK(r.derivative(x, 3) == 0.0);
  }
}

TEST_CASE("coefficients: tabulated samples of a quadratic") {
  const std::size_t n = 101;
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = oracle::r(static_cast<double>(j) / (n - 1));
  const auto r = tabulated(s);
  CHECK(r.scan_nodes().size() == n);
  for (double x : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    CHECK(r.value(x) == doctest::Approx(oracle::r(x)).epsilon(1e-4));
    CHECK(r.derivative(x, 1) == doctest::Approx(oracle::r1(x)).epsilon(1e-6).scale(1.0));
    CHECK(r.derivative(x, 2) == doctest::Approx(oracle::r2).epsilon(1e-6));
  }
}

TEST_CASE("rho_bounds: constant coefficients") {
  const ModelParams p(2.0, 3.0, tabulated({2, 2, 2, 2, 2}), tabulated({1, 1, 1, 1, 1}));
  const auto b = rho_bounds(p);
  CHECK(b.rho_M == doctest::Approx(5.0));
  CHECK(b.c_m == doctest::Approx(6.0 / 7.0));
  CHECK(b.rho_m == doctest::Approx(5.0 / 7.0));
}

TEST_CASE("rho_bounds: boundary case fails non-extinction") {
  const ModelParams p(1.0, 1.0, tabulated({1, 1, 1}), tabulated({1, 1, 1}));
  CHECK(p.bounds().rho_M == doctest::Approx(0.0).scale(1.0));
  CHECK(p.bounds().c_m == doctest::Approx(1.0));
  CHECK(p.bounds().rho_m == doctest::Approx(0.0).scale(1.0));
  CHECK(kind_of([&] { rho_bounds(p); }) == ErrorKind::NonExtinction);
}

TEST_CASE("rho_bounds: default coefficients match the closed-form extrema") {
  const auto b = rho_bounds(default_params());
  CHECK(b.ratio_max == doctest::Approx(oracle::kRatioMax).epsilon(1e-12));
  CHECK(b.ratio_min == doctest::Approx(oracle::kRatioMin).epsilon(1e-12));
  CHECK(b.argmax_ratio == doctest::Approx(0.5));
  CHECK((b.argmin_ratio == 0.0 || b.argmin_ratio == 1.0));
  CHECK(b.rho_M == doctest::Approx(11.0).epsilon(1e-12));
  CHECK(b.c_m == doctest::Approx(32.0 / 19.0).epsilon(1e-12));
  CHECK(b.rho_m == doctest::Approx(oracle::kRhom).epsilon(1e-12));
  CHECK(b.rho_m == doctest::Approx(2.705263158).epsilon(1e-9));
}

TEST_CASE("growth_rate: worked examples") {
  const ModelParams consts(2.0, 3.0, tabulated({2, 2, 2}), tabulated({1, 1, 1}));
  CHECK(growth_rate(0.3, 1.0, 1.0, consts) == doctest::Approx(0.0).scale(1.0));
  const auto p = default_params();
  for (double x : {0.0, 0.2, 0.5, 0.8, 1.0})
    CHECK(growth_rate(x, 0.0, 0.0, p) == doctest::Approx(-oracle::d(x)));
  // r(0.5) = 3, d(0.5) = 1: 3*2 - 1*(1+3) = 2
  CHECK(growth_rate(0.5, 2.0, 3.0, p) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(growth_rate(0.5, 2.0, 3.0, p) ==
        doctest::Approx(oracle::r(0.5) * 2.0 - oracle::d(0.5) * 4.0));
}

TEST_CASE("growth_rate: monotone in rho and c (property)") {
  oracle::Rng rng(21);
  const auto p = default_params();
  for (int trial = 0; trial < 500; ++trial) {
    const double x = rng.uniform(), c = rng.uniform(0, 4), rho = rng.uniform(-0.9, 12);
    const double dc = rng.uniform(1e-6, 1), dr = rng.uniform(1e-6, 1);
    CHECK(growth_rate(x, c, rho + dr, p) < growth_rate(x, c, rho, p));
    CHECK(growth_rate(x, c + dc, rho, p) > growth_rate(x, c, rho, p));
  }
}

TEST_CASE("growth_rate at rho_M is non-positive for c <= c_B (grid scan)") {
  const auto p = default_params();
  const double rho_M = p.bounds().rho_M;
  for (std::size_t j = 0; j <= 1000; ++j) {
    const double x = static_cast<double>(j) / 1000.0;
    for (double c : {0.0, 1.0, 2.5, p.c_B}) CHECK(growth_rate(x, c, rho_M, p) <= 1e-12);
  }
}

TEST_CASE("valid parameter families have rho_m > 0 and c_m < c_B (property)") {
  oracle::Rng rng(22);
  int valid = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const ModelParams p(rng.uniform(0.5, 20), rng.uniform(0.5, 10),
                        quad_r(rng.uniform(1, 5), rng.uniform(0.1, 2), rng.uniform(0, 1)),
                        quad_d(rng.uniform(0.5, 2), rng.uniform(0.1, 2), rng.uniform(0, 1)));
    InitialData init;
    Grids g;
    g.Ny = 21;
    const auto profiles = resolve_initial(p, init, g);
    const auto report = validate_assumptions(p, profiles, g);
    if (!report.find("non_extinction")->passed) continue;
    ++valid;
    CHECK(p.bounds().rho_m > 0.0);
    CHECK(p.bounds().c_m < p.c_B);
    CHECK(report.find("r.discrete_concave")->passed);
    CHECK(report.find("d.discrete_convex")->passed);
  }
  CHECK(valid > 20);
}

TEST_CASE("validate_assumptions: constant coefficients fail strict concavity") {
  const ModelParams p(2.0, 3.0, tabulated(std::vector<double>(11, 2.0)),
                      tabulated(std::vector<double>(11, 1.0)));
  InitialData init;
  init.X0 = {Profile::Kind::Constant, 0.5};
  Grids g;
  g.Ny = 11;
  const auto report = validate_assumptions(p, resolve_initial(p, init, g), g);
  CHECK_FALSE(report.passed());
  CHECK_FALSE(report.find("r.concave")->passed);
  CHECK_FALSE(report.find("d.convex")->passed);
  CHECK(report.find("non_extinction")->passed);
  CHECK(report.bounds.rho_M == doctest::Approx(5.0));
  CHECK(report.bounds.c_m == doctest::Approx(6.0 / 7.0));
  CHECK(report.bounds.rho_m == doctest::Approx(5.0 / 7.0));
}

TEST_CASE("validate_assumptions: default scenario passes with zero compatibility residual") {
  const auto p = default_params();
  Grids g;
  const auto init = resolve_initial(p, InitialData{}, g);
  const auto report = validate_assumptions(p, init, g);
  CHECK(report.passed());
  for (const auto& item : report.items) CHECK_MESSAGE(item.passed, item.name);
  CHECK(report.find("compatibility")->witness < 1e-14);
  CHECK(report.to_text().find("validation passed") != std::string::npos);
}

TEST_CASE("validate_assumptions: inconsistent rho0 fails compatibility") {
  const auto p = default_params();
  InitialData data;
  data.rho0_from_compatibility = false;
  data.rho0 = {Profile::Kind::Constant, 5.0};
  Grids g;
  g.Ny = 21;
  const auto report = validate_assumptions(p, resolve_initial(p, data, g), g);
  CHECK_FALSE(report.find("compatibility")->passed);
  CHECK(report.find("rho0.lower")->passed);
}

TEST_CASE("validate_assumptions: X0 on the trait boundary is rejected") {
  const auto p = default_params();
  InitialData data;
  data.X0 = {Profile::Kind::Constant, 1.0};
  Grids g;
  g.Ny = 5;
  CHECK_FALSE(validate_assumptions(p, resolve_initial(p, data, g), g).find("X0.interior")->passed);
}

TEST_CASE("initial data: equilibrium nutrient and compatible density") {
  const auto p = default_params();
  for (double x : {0.1, 0.3, 0.5, 0.7}) {
    const double c = local_equilibrium_nutrient(x, p);
    CHECK(c == doctest::Approx(oracle::equilibrium_c(x)).epsilon(1e-13));
    CHECK(c > p.bounds().c_m);
    CHECK(c < p.c_B);
    // At rest: lambda (c_B - c) = (rho + ... ) with rho from the constraint.
    const double rho = oracle::r(x) / oracle::d(x) * c - 1.0;
    CHECK(p.lambda * p.c_B - (rho + p.lambda) * c == doctest::Approx(0.0).scale(1.0));
  }
  Grids g;
  g.Ny = 41;
  const auto init = resolve_initial(p, InitialData{}, g);
  for (std::size_t i = 0; i < g.Ny; ++i) {
    const double X = init.X0[i];
    CHECK(X == doctest::Approx(0.5 + 0.2 * std::tanh(g.y(i))));
    CHECK(oracle::r(X) * init.c0[i] - oracle::d(X) * (1 + init.rho0[i]) ==
          doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("initial data: elliptic coupling solves density and nutrient jointly") {
  const auto p = default_params(Coupling::Elliptic);
  Grids g;
  g.Ny = 41;
  const auto init = resolve_initial(p, InitialData{}, g);
  const double h = g.hy();
  for (std::size_t i = 0; i < g.Ny; ++i) {
    const double X = init.X0[i];
    CHECK(std::abs(oracle::r(X) * init.c0[i] - oracle::d(X) * (1 + init.rho0[i])) < 1e-9);
    const std::size_t l = i == 0 ? 1 : i - 1, r = i == g.Ny - 1 ? g.Ny - 2 : i + 1;
    const double lap = (init.c0[l] - 2 * init.c0[i] + init.c0[r]) / (h * h);
    CHECK(std::abs(-lap + (init.rho0[i] + p.lambda) * init.c0[i] - p.lambda * p.c_B) < 1e-7);
  }
}

TEST_CASE("profiles evaluate their closed forms") {
  const Profile t{Profile::Kind::Tanh, 0.5, 0.2, 2.0, 1.0};
  CHECK(t(3.0) == doctest::Approx(0.5 + 0.2 * std::tanh(1.0)));
  const Profile c{Profile::Kind::Cosine, 1.0, 0.5, 5.0, 0.0};
  CHECK(c(5.0) == doctest::Approx(0.5));
  const Profile k{Profile::Kind::Constant, 0.3};
  CHECK(k(-7.0) == 0.3);
}
