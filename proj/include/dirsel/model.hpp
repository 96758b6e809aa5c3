#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dirsel/numerics.hpp"

namespace dirsel {

enum class CoefficientKind { QuadraticConcaveR, QuadraticConvexD, Tabulated };

// A trait-dependent rate on [0, 1]. The quadratic families are
//   r(x) = peak - curvature * (x - center)^2   (QuadraticConcaveR)
//   d(x) = peak + curvature * (x - center)^2   (QuadraticConvexD)
// with `peak` playing r_max or d_min. Tabulated coefficients hold uniform
// samples on [0, 1]; derivatives come from finite differences of the samples
// and everything is linearly interpolated between nodes.
struct CoefficientSpec {
  CoefficientKind kind = CoefficientKind::QuadraticConcaveR;
  double peak = 0.0;
  double curvature = 0.0;
  double center = 0.5;
  std::vector<double> samples;
};

class Coefficient {
public:
  Coefficient() = default;
  explicit Coefficient(CoefficientSpec spec);

  const CoefficientSpec& spec() const { return spec_; }

  double value(double x) const { return derivative(x, 0); }
  // order in 0..3
  double derivative(double x, int order) const;

  // Nodes a grid scan of this coefficient should visit: the table nodes for
  // tabulated data, kScanPoints uniform points otherwise.
  std::vector<double> scan_nodes() const;

private:
  CoefficientSpec spec_;
  std::vector<std::vector<double>> table_;  // [order][node]
};

// Dense-scan resolution for analytic coefficients.
inline constexpr std::size_t kScanPoints = 10001;

enum class Coupling { Parabolic, Elliptic };

struct Bounds {
  double rho_m = 0.0;
  double rho_M = 0.0;
  double c_m = 0.0;
  double ratio_min = 0.0;  // min r/d over the scan
  double ratio_max = 0.0;  // max r/d over the scan
  double argmin_ratio = 0.0;
  double argmax_ratio = 0.0;
};

struct ModelParams {
  double lambda = 8.0;
  double c_B = 4.0;
  Coefficient r;
  Coefficient d;
  Coupling coupling = Coupling::Parabolic;
  double K0 = 100.0;

  ModelParams() = default;
  ModelParams(double lambda_, double c_B_, Coefficient r_, Coefficient d_,
              Coupling coupling_ = Coupling::Parabolic, double K0_ = 100.0);

  // Cached at construction.
  const Bounds& bounds() const { return bounds_; }

private:
  Bounds bounds_;
};

Bounds compute_bounds(double lambda, double c_B, const Coefficient& r, const Coefficient& d);

// rho_M = c_B max r/d - 1, c_m = c_B lambda / (lambda + rho_M),
// rho_m = c_m min r/d - 1. Throws NonExtinction when rho_m <= 0.
Bounds rho_bounds(const ModelParams& params);

// r(x) c - d(x) (1 + rho)
double growth_rate(double x, double c, double rho, const ModelParams& params);

// A y-profile for initial data.
//   Constant:  a
//   Tanh:      a + b tanh((y - shift) / scale)
//   Cosine:    a + b cos(pi (y - shift) / scale)
struct Profile {
  enum class Kind { Constant, Tanh, Cosine };
  Kind kind = Kind::Constant;
  double a = 0.0;
  double b = 0.0;
  double scale = 1.0;
  double shift = 0.0;

  double operator()(double y) const;
};

struct InitialData {
  Profile X0{Profile::Kind::Tanh, 0.5, 0.2, 1.0, 0.0};
  double sigma0 = 0.05;
  bool rho0_from_compatibility = true;
  Profile rho0;
  bool c0_equilibrium = true;  // parabolic only
  Profile c0;
};

// Initial data sampled on the y-grid, after resolving derived fields.
struct InitialProfiles {
  std::vector<double> X0;
  std::vector<double> rho0;
  std::vector<double> c0;
  double sigma0 = 0.05;
};

// Nutrient level at which a y-homogeneous population concentrated at trait x
// is at rest: the positive root of q c^2 + (lambda - 1) c - lambda c_B = 0 with
// q = r(x)/d(x).
double local_equilibrium_nutrient(double x, const ModelParams& params);

// Samples X0 and fills rho0/c0. By default rho0 comes from the compatibility
// condition r(X0) c0 = d(X0)(1 + rho0). Under elliptic coupling c0 is the
// stationary nutrient for rho0 (jointly solved when rho0 is derived).
InitialProfiles resolve_initial(const ModelParams& params, const InitialData& init,
                                const Grids& grids);

struct CheckItem {
  std::string name;
  bool passed = true;
  double witness = 0.0;           // extremal value that decides the check
  double location = 0.0;          // x or y at which the witness occurs
  std::string detail;
};

struct ValidationReport {
  Bounds bounds;
  std::vector<CheckItem> items;
  std::vector<std::string> warnings;

  bool passed() const;
  const CheckItem* find(const std::string& name) const;
  std::string to_text() const;
};

inline constexpr double kCompatibilityTolerance = 1e-10;

// Report-returning; never throws for failed assumptions.
ValidationReport validate_assumptions(const ModelParams& params, const InitialProfiles& init,
                                      const Grids& grids);

}  // namespace dirsel
