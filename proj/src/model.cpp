#include "dirsel/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dirsel/error.hpp"
#include "dirsel/limit_solver.hpp"
#include "dirsel/nutrient.hpp"

namespace dirsel {

Coefficient::Coefficient(CoefficientSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind != CoefficientKind::Tabulated) return;
  const auto& s = spec_.samples;
  const std::size_t n = s.size();
  if (n < 3) fail(ErrorKind::Config, "tabulated coefficient needs at least 3 samples");
  const double h = 1.0 / static_cast<double>(n - 1);

  // Centred differences inside, second-order one-sided at the ends.
  auto differentiate = [h](const std::vector<double>& f) {
    const std::size_t m = f.size();
    std::vector<double> df(m);
    for (std::size_t j = 1; j + 1 < m; ++j) df[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    df[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
    return df;
  };
  std::vector<double> d2(n);
  for (std::size_t j = 1; j + 1 < n; ++j) d2[j] = (s[j - 1] - 2.0 * s[j] + s[j + 1]) / (h * h);
  d2[0] = d2[1];
  d2[n - 1] = d2[n - 2];

  table_.push_back(s);
  table_.push_back(differentiate(s));
  table_.push_back(d2);
  table_.push_back(differentiate(d2));
}

double Coefficient::derivative(double x, int order) const {
  switch (spec_.kind) {
    case CoefficientKind::QuadraticConcaveR:
    case CoefficientKind::QuadraticConvexD: {
      const double sign = spec_.kind == CoefficientKind::QuadraticConcaveR ? -1.0 : 1.0;
      const double dx = x - spec_.center;
      switch (order) {
        case 0: return spec_.peak + sign * spec_.curvature * dx * dx;
        case 1: return 2.0 * sign * spec_.curvature * dx;
        case 2: return 2.0 * sign * spec_.curvature;
        default: return 0.0;
      }
    }
    case CoefficientKind::Tabulated: {
      const auto& f = table_.at(static_cast<std::size_t>(order));
      const std::size_t n = f.size();
      const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(n - 1);
      const std::size_t j = std::min(static_cast<std::size_t>(pos), n - 2);
      const double w = pos - static_cast<double>(j);
      return (1.0 - w) * f[j] + w * f[j + 1];
    }
  }
  return 0.0;
}

std::vector<double> Coefficient::scan_nodes() const {
  const std::size_t n =
      spec_.kind == CoefficientKind::Tabulated ? spec_.samples.size() : kScanPoints;
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<double>(j) / static_cast<double>(n - 1);
  return x;
}

Bounds compute_bounds(double lambda, double c_B, const Coefficient& r, const Coefficient& d) {
  Bounds b;
  b.ratio_min = std::numeric_limits<double>::infinity();
  b.ratio_max = -std::numeric_limits<double>::infinity();
  auto nodes = r.scan_nodes();
  auto more = d.scan_nodes();
  nodes.insert(nodes.end(), more.begin(), more.end());
  for (double x : nodes) {
    const double q = r.value(x) / d.value(x);
    if (q < b.ratio_min) { b.ratio_min = q; b.argmin_ratio = x; }
    if (q > b.ratio_max) { b.ratio_max = q; b.argmax_ratio = x; }
  }
  b.rho_M = c_B * b.ratio_max - 1.0;
  b.c_m = c_B * lambda / (lambda + b.rho_M);
  b.rho_m = b.c_m * b.ratio_min - 1.0;
  return b;
}

ModelParams::ModelParams(double lambda_, double c_B_, Coefficient r_, Coefficient d_,
                         Coupling coupling_, double K0_)
    : lambda(lambda_), c_B(c_B_), r(std::move(r_)), d(std::move(d_)), coupling(coupling_),
      K0(K0_) {
  bounds_ = compute_bounds(lambda, c_B, r, d);
}

Bounds rho_bounds(const ModelParams& params) {
  const Bounds& b = params.bounds();
  if (!(b.rho_m > 0.0)) {
    std::ostringstream msg;
    msg << "non-extinction condition rho_m > 0 violated: rho_m = " << b.rho_m
        << " (rho_M = " << b.rho_M << ", c_m = " << b.c_m << ", min r/d = " << b.ratio_min
        << ", max r/d = " << b.ratio_max << ")";
    fail(ErrorKind::NonExtinction, msg.str());
  }
  return b;
}

double growth_rate(double x, double c, double rho, const ModelParams& params) {
  return params.r.value(x) * c - params.d.value(x) * (1.0 + rho);
}

double Profile::operator()(double y) const {
  switch (kind) {
    case Kind::Constant: return a;
    case Kind::Tanh: return a + b * std::tanh((y - shift) / scale);
    case Kind::Cosine: return a + b * std::cos(std::numbers::pi * (y - shift) / scale);
  }
  return a;
}

double local_equilibrium_nutrient(double x, const ModelParams& params) {
  const double q = params.r.value(x) / params.d.value(x);
  const double bq = params.lambda - 1.0;
  return (-bq + std::sqrt(bq * bq + 4.0 * q * params.lambda * params.c_B)) / (2.0 * q);
}

InitialProfiles resolve_initial(const ModelParams& params, const InitialData& init,
                                const Grids& grids) {
  InitialProfiles out;
  out.sigma0 = init.sigma0;
  const auto y = y_nodes(grids);
  const std::size_t n = y.size();
  out.X0.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.X0[i] = init.X0(y[i]);

  const bool elliptic = params.coupling == Coupling::Elliptic;
  out.rho0.resize(n);
  out.c0.resize(n);

  if (elliptic) {
    if (init.rho0_from_compatibility) {
      std::vector<double> guess(n);
      for (std::size_t i = 0; i < n; ++i)
        guess[i] = local_equilibrium_nutrient(out.X0[i], params);
      out.c0 = elliptic_constraint_nutrient(out.X0, params, grids.hy(), guess);
      for (std::size_t i = 0; i < n; ++i)
        out.rho0[i] = constraint_rho(out.X0[i], out.c0[i], params);
    } else {
      for (std::size_t i = 0; i < n; ++i) out.rho0[i] = init.rho0(y[i]);
      out.c0 = solve_c_elliptic(out.rho0, params, grids.hy());
    }
    return out;
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.c0[i] = init.c0_equilibrium ? local_equilibrium_nutrient(out.X0[i], params)
                                    : init.c0(y[i]);
    out.rho0[i] = init.rho0_from_compatibility ? constraint_rho(out.X0[i], out.c0[i], params)
                                               : init.rho0(y[i]);
  }
  return out;
}

bool ValidationReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

const CheckItem* ValidationReport::find(const std::string& name) const {
  for (const auto& item : items)
    if (item.name == name) return &item;
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out.precision(10);
  out << "bounds: rho_m = " << bounds.rho_m << ", rho_M = " << bounds.rho_M
      << ", c_m = " << bounds.c_m << "\n";
  for (const auto& item : items) {
    out << (item.passed ? "  PASS  " : "  FAIL  ") << item.name << "  witness = " << item.witness
        << " at " << item.location;
    if (!item.detail.empty()) out << "  (" << item.detail << ")";
    out << "\n";
  }
  for (const auto& w : warnings) out << "  WARN  " << w << "\n";
  out << (passed() ? "validation passed\n" : "validation FAILED\n");
  return out.str();
}

namespace {

struct Extremum {
  double value;
  double at;
};

template <typename F>
Extremum scan_max(const std::vector<double>& nodes, F&& f) {
  Extremum e{-std::numeric_limits<double>::infinity(), 0.0};
  for (double x : nodes) {
    const double v = f(x);
    if (v > e.value || std::isnan(v)) e = {v, x};
  }
  return e;
}

}  // namespace

ValidationReport validate_assumptions(const ModelParams& params, const InitialProfiles& init,
                                      const Grids& grids) {
  ValidationReport report;
  report.bounds = params.bounds();
  const Bounds& b = report.bounds;
  const auto& r = params.r;
  const auto& d = params.d;

  auto nodes = r.scan_nodes();
  {
    auto more = d.scan_nodes();
    nodes.insert(nodes.end(), more.begin(), more.end());
    auto xg = x_nodes(grids);
    nodes.insert(nodes.end(), xg.begin(), xg.end());
  }

  auto add = [&](std::string name, bool ok, double witness, double at, std::string detail = {}) {
    report.items.push_back({std::move(name), ok, witness, at, std::move(detail)});
  };

  add("parameters.positive", params.lambda > 0.0 && params.c_B > 0.0,
      std::min(params.lambda, params.c_B), 0.0, "lambda > 0 and c_B > 0");
  add("non_extinction", b.rho_m > 0.0, b.rho_m, b.argmin_ratio,
      "rho_m = c_m min r/d - 1 > 0");

  const auto r_min = scan_max(nodes, [&](double x) { return -r.value(x); });
  add("r.positive", -r_min.value > 0.0, -r_min.value, r_min.at, "min r");
  const auto d_min = scan_max(nodes, [&](double x) { return -d.value(x); });
  add("d.positive", -d_min.value > 0.0, -d_min.value, d_min.at, "min d");

  const auto r2 = scan_max(nodes, [&](double x) { return r.derivative(x, 2); });
  add("r.concave", r2.value < 0.0, r2.value, r2.at, "max r''");
  const auto d2 = scan_max(nodes, [&](double x) { return -d.derivative(x, 2); });
  add("d.convex", -d2.value > 0.0, -d2.value, d2.at, "min d''");

  // Discrete second differences at the interior x-grid nodes.
  {
    const auto xg = x_nodes(grids);
    const double h = grids.hx();
    Extremum rr{-std::numeric_limits<double>::infinity(), 0.0};
    Extremum dd{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t j = 1; j + 1 < xg.size(); ++j) {
      const double sr = (r.value(xg[j - 1]) - 2.0 * r.value(xg[j]) + r.value(xg[j + 1])) / (h * h);
      const double sd = (d.value(xg[j - 1]) - 2.0 * d.value(xg[j]) + d.value(xg[j + 1])) / (h * h);
      if (sr > rr.value) rr = {sr, xg[j]};
      if (sd < dd.value) dd = {sd, xg[j]};
    }
    add("r.discrete_concave", rr.value < 0.0, rr.value, rr.at, "max second difference of r");
    add("d.discrete_convex", dd.value > 0.0, dd.value, dd.at, "min second difference of d");
  }

  const auto k = scan_max(nodes, [&](double x) {
    double s = 0.0;
    for (int o = 1; o <= 3; ++o) s += std::abs(r.derivative(x, o)) + std::abs(d.derivative(x, o));
    return s;
  });
  add("derivative_bound", k.value <= params.K0, k.value, k.at,
      "|r'|+|d'|+|r''|+|d''|+|r'''|+|d'''| <= K0");

  add("sigma0.positive", init.sigma0 > 0.0, init.sigma0, 0.0, "concavity constant a = 1/sigma0");

  const auto y = y_nodes(grids);
  const std::size_t n = std::min(y.size(), init.X0.size());
  {
    Extremum worst{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double margin = std::min(init.X0[i], 1.0 - init.X0[i]);
      if (margin < worst.value) worst = {margin, y[i]};
    }
    add("X0.interior", worst.value > 0.0, worst.value, worst.at, "min distance of X0 to {0,1}");
  }
  {
    Extremum lo{std::numeric_limits<double>::infinity(), 0.0};
    Extremum hi{-std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      if (init.rho0[i] < lo.value) lo = {init.rho0[i], y[i]};
      if (init.rho0[i] > hi.value) hi = {init.rho0[i], y[i]};
    }
    add("rho0.lower", lo.value >= b.rho_m, lo.value, lo.at, "rho0 >= rho_m");
    add("rho0.upper", hi.value <= b.rho_M, hi.value, hi.at, "rho0 <= rho_M");
  }
  if (params.coupling == Coupling::Parabolic) {
    Extremum lo{std::numeric_limits<double>::infinity(), 0.0};
    Extremum hi{-std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      if (init.c0[i] < lo.value) lo = {init.c0[i], y[i]};
      if (init.c0[i] > hi.value) hi = {init.c0[i], y[i]};
    }
    add("c0.lower", lo.value > b.c_m, lo.value, lo.at, "c0 > c_m");
    add("c0.upper", hi.value < params.c_B, hi.value, hi.at, "c0 < c_B");
  }
  {
    Extremum worst{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double x = init.X0[i];
      const double scale = std::max(std::abs(r.value(x) * init.c0[i]), 1.0);
      const double res = std::abs(growth_rate(x, init.c0[i], init.rho0[i], params)) / scale;
      if (res > worst.value || std::isnan(res)) worst = {res, y[i]};
    }
    add("compatibility", worst.value <= kCompatibilityTolerance, worst.value, worst.at,
        "|r(X0) c0 - d(X0)(1 + rho0)|, relative");
  }
  return report;
}

}  // namespace dirsel
