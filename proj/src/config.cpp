#include "dirsel/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dirsel/error.hpp"

namespace dirsel {

using nlohmann::json;

namespace {

// Collects problems so one pass reports every bad key.
class Reader {
public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  void error(const std::string& key, const std::string& what) {
    errors_.push_back(key + ": " + what);
  }

  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
      error(path, "expected an object");
      return;
    }
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) error(join(path, k), "unknown key");
  }

  double number(const json& obj, const std::string& path, const std::string& key, double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      error(join(path, key), "expected a number");
      return fallback;
    }
    return v.get<double>();
  }

  std::size_t count(const json& obj, const std::string& path, const std::string& key,
                    std::size_t fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) {
      error(join(path, key), "expected a non-negative integer");
      return fallback;
    }
    return v.get<std::size_t>();
  }

  std::string text(const json& obj, const std::string& path, const std::string& key,
                   const std::string& fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      error(join(path, key), "expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& obj, const std::string& path, const std::string& key,
                              const std::vector<double>& fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    std::vector<double> out;
    if (!v.is_array()) {
      error(join(path, key), "expected an array of numbers");
      return fallback;
    }
    for (const auto& e : v) {
      if (!e.is_number()) {
        error(join(path, key), "expected an array of numbers");
        return fallback;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  void finish() const {
    if (errors_.empty()) return;
    std::ostringstream msg;
    msg << origin_ << ": invalid configuration";
    for (const auto& e : errors_) msg << "\n  " << e;
    fail(ErrorKind::Config, msg.str());
  }

private:
  std::string origin_;
  std::vector<std::string> errors_;
};

const char* kind_name(CoefficientKind k) {
  switch (k) {
    case CoefficientKind::QuadraticConcaveR: return "quadratic-concave-r";
    case CoefficientKind::QuadraticConvexD: return "quadratic-convex-d";
    case CoefficientKind::Tabulated: return "tabulated";
  }
  return "?";
}

CoefficientSpec read_coefficient(Reader& rd, const json& node, const std::string& path,
                                 const CoefficientSpec& fallback, bool is_r) {
  if (node.is_null()) return fallback;
  CoefficientSpec spec = fallback;
  const std::string kind = rd.text(node, path, "kind", kind_name(fallback.kind));
  const char* peak = is_r ? "r_max" : "d_min";
  const char* curv = is_r ? "r2" : "d2";
  const char* center = is_r ? "x_r" : "x_d";
  if (kind == "tabulated") {
    rd.check_keys(node, path, {"kind", "samples"});
    spec.kind = CoefficientKind::Tabulated;
    spec.samples = rd.numbers(node, path, "samples", {});
    if (spec.samples.size() < 3) rd.error(Reader::join(path, "samples"), "need at least 3 samples");
    for (double s : spec.samples)
      if (!std::isfinite(s)) rd.error(Reader::join(path, "samples"), "non-finite sample");
    return spec;
  }
  const char* expected = is_r ? "quadratic-concave-r" : "quadratic-convex-d";
  if (kind != expected) {
    rd.error(Reader::join(path, "kind"),
             std::string("expected \"") + expected + "\" or \"tabulated\", got \"" + kind + "\"");
    return fallback;
  }
  rd.check_keys(node, path, {"kind", peak, curv, center});
  spec.kind = is_r ? CoefficientKind::QuadraticConcaveR : CoefficientKind::QuadraticConvexD;
  spec.samples.clear();
  spec.peak = rd.number(node, path, peak, fallback.peak);
  spec.curvature = rd.number(node, path, curv, fallback.curvature);
  spec.center = rd.number(node, path, center, fallback.center);
  if (!(spec.curvature > 0.0)) rd.error(Reader::join(path, curv), "must be > 0");
  if (!(spec.center >= 0.0 && spec.center <= 1.0))
    rd.error(Reader::join(path, center), "must lie in [0, 1]");
  if (!is_r && !(spec.peak > 0.0)) rd.error(Reader::join(path, peak), "must be > 0");
  return spec;
}

json coefficient_json(const CoefficientSpec& s) {
  if (s.kind == CoefficientKind::Tabulated) return {{"kind", "tabulated"}, {"samples", s.samples}};
  const bool is_r = s.kind == CoefficientKind::QuadraticConcaveR;
  return {{"kind", kind_name(s.kind)},
          {is_r ? "r_max" : "d_min", s.peak},
          {is_r ? "r2" : "d2", s.curvature},
          {is_r ? "x_r" : "x_d", s.center}};
}

Profile read_profile(Reader& rd, const json& node, const std::string& path,
                     const Profile& fallback) {
  Profile p = fallback;
  if (node.is_number()) {
    p = {Profile::Kind::Constant, node.get<double>(), 0.0, 1.0, 0.0};
    return p;
  }
  const std::string kind = rd.text(node, path, "kind", "");
  if (kind == "constant") {
    rd.check_keys(node, path, {"kind", "value"});
    p = {Profile::Kind::Constant, rd.number(node, path, "value", fallback.a), 0.0, 1.0, 0.0};
  } else if (kind == "tanh" || kind == "cosine") {
    rd.check_keys(node, path, {"kind", "a", "b", "scale", "shift"});
    p.kind = kind == "tanh" ? Profile::Kind::Tanh : Profile::Kind::Cosine;
    p.a = rd.number(node, path, "a", 0.0);
    p.b = rd.number(node, path, "b", 0.0);
    p.scale = rd.number(node, path, "scale", 1.0);
    p.shift = rd.number(node, path, "shift", 0.0);
    if (p.scale == 0.0) rd.error(Reader::join(path, "scale"), "must be non-zero");
  } else {
    rd.error(Reader::join(path, "kind"), "expected \"constant\", \"tanh\" or \"cosine\"");
  }
  return p;
}

json profile_json(const Profile& p) {
  switch (p.kind) {
    case Profile::Kind::Constant: return {{"kind", "constant"}, {"value", p.a}};
    case Profile::Kind::Tanh:
    case Profile::Kind::Cosine:
      return {{"kind", p.kind == Profile::Kind::Tanh ? "tanh" : "cosine"},
              {"a", p.a},
              {"b", p.b},
              {"scale", p.scale},
              {"shift", p.shift}};
  }
  return {};
}

}  // namespace

std::optional<ManufacturedNutrient> Scenario::forcing() const {
  if (!test_forcing_amplitude) return std::nullopt;
  return ManufacturedNutrient{*test_forcing_amplitude, grids.L, params.c_B, params.lambda};
}

Scenario default_scenario() {
  Scenario s;
  s.params = ModelParams(8.0, 4.0,
                         Coefficient({CoefficientKind::QuadraticConcaveR, 3.0, 1.0, 0.5, {}}),
                         Coefficient({CoefficientKind::QuadraticConvexD, 1.0, 1.0, 0.5, {}}));
  return s;
}

Scenario parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, origin + ": " + e.what());
  }
  Reader rd(origin);
  Scenario s = default_scenario();
  if (!root.is_object()) {
    rd.error("<root>", "expected an object");
    rd.finish();
  }
  rd.check_keys(root, "",
                {"model", "initial", "grids", "solver", "sweep", "outputs", "test_forcing"});

  // model
  {
    const json m = root.value("model", json::object());
    rd.check_keys(m, "model", {"lambda", "c_B", "coupling", "K0", "r", "d"});
    const double lambda = rd.number(m, "model", "lambda", s.params.lambda);
    const double c_B = rd.number(m, "model", "c_B", s.params.c_B);
    const double K0 = rd.number(m, "model", "K0", s.params.K0);
    const std::string coupling = rd.text(m, "model", "coupling", "parabolic");
    Coupling cp = Coupling::Parabolic;
    if (coupling == "elliptic") cp = Coupling::Elliptic;
    else if (coupling != "parabolic")
      rd.error("model.coupling", "expected \"parabolic\" or \"elliptic\"");
    if (!(lambda > 0.0)) rd.error("model.lambda", "must be > 0");
    if (!(c_B > 0.0)) rd.error("model.c_B", "must be > 0");
    const auto r = read_coefficient(rd, m.value("r", json()), "model.r", s.params.r.spec(), true);
    const auto d = read_coefficient(rd, m.value("d", json()), "model.d", s.params.d.spec(), false);
    rd.finish();
    s.params = ModelParams(lambda, c_B, Coefficient(r), Coefficient(d), cp, K0);
  }

  // initial
  {
    const json in = root.value("initial", json::object());
    rd.check_keys(in, "initial", {"X0", "sigma0", "rho0", "c0"});
    if (in.contains("X0")) s.initial.X0 = read_profile(rd, in.at("X0"), "initial.X0", s.initial.X0);
    s.initial.sigma0 = rd.number(in, "initial", "sigma0", s.initial.sigma0);
    if (!(s.initial.sigma0 > 0.0)) rd.error("initial.sigma0", "must be > 0");
    if (in.contains("rho0")) {
      const auto& v = in.at("rho0");
      if (v.is_string()) {
        if (v.get<std::string>() != "compatible")
          rd.error("initial.rho0", "expected \"compatible\" or a profile");
        s.initial.rho0_from_compatibility = true;
      } else {
        s.initial.rho0_from_compatibility = false;
        s.initial.rho0 = read_profile(rd, v, "initial.rho0", s.initial.rho0);
      }
    }
    if (in.contains("c0")) {
      const auto& v = in.at("c0");
      if (v.is_string()) {
        if (v.get<std::string>() != "equilibrium")
          rd.error("initial.c0", "expected \"equilibrium\" or a profile");
        s.initial.c0_equilibrium = true;
      } else {
        s.initial.c0_equilibrium = false;
        s.initial.c0 = read_profile(rd, v, "initial.c0", s.initial.c0);
      }
    }
  }

  // grids
  {
    const json g = root.value("grids", json::object());
    rd.check_keys(g, "grids", {"L", "Ny", "Nx", "dt", "T_final"});
    s.grids.L = rd.number(g, "grids", "L", s.grids.L);
    s.grids.Ny = rd.count(g, "grids", "Ny", s.grids.Ny);
    s.grids.Nx = rd.count(g, "grids", "Nx", s.grids.Nx);
    s.grids.dt = rd.number(g, "grids", "dt", s.grids.dt);
    s.grids.T_final = rd.number(g, "grids", "T_final", s.grids.T_final);
    try {
      s.grids.check();
    } catch (const Error& e) {
      rd.error("grids", e.what());
    }
  }

  // solver
  {
    const json sv = root.value("solver", json::object());
    rd.check_keys(sv, "solver", {"time_convention", "picard"});
    const auto tc = rd.text(sv, "solver", "time_convention", "selection");
    if (tc == "raw") s.time_convention = TimeConvention::Raw;
    else if (tc != "selection")
      rd.error("solver.time_convention", "expected \"selection\" or \"raw\"");
    const auto picard = rd.count(sv, "solver", "picard", 0);
    if (picard > 1) rd.error("solver.picard", "must be 0 or 1");
    s.picard = static_cast<int>(picard);
  }

  // sweep
  {
    const json sw = root.value("sweep", json::object());
    rd.check_keys(sw, "sweep", {"eps_list", "compare_times"});
    s.sweep.eps_list = rd.numbers(sw, "sweep", "eps_list", s.sweep.eps_list);
    s.sweep.compare_times = rd.numbers(sw, "sweep", "compare_times", s.sweep.compare_times);
    const auto& e = s.sweep.eps_list;
    if (e.empty()) rd.error("sweep.eps_list", "must not be empty");
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (!(e[k] > 0.0)) rd.error("sweep.eps_list", "entries must be > 0");
      if (k > 0 && !(e[k] < e[k - 1])) rd.error("sweep.eps_list", "must be strictly decreasing");
    }
    for (double t : s.sweep.compare_times) {
      const double k = std::round(t / s.grids.dt);
      if (t < 0.0 || t > s.grids.T_final + 1e-12 ||
          std::abs(k * s.grids.dt - t) > 1e-9 * std::max(1.0, t))
        rd.error("sweep.compare_times", "entries must be step multiples in [0, T_final]");
    }
  }

  // outputs
  {
    const json o = root.value("outputs", json::object());
    rd.check_keys(o, "outputs", {"dir", "plots"});
    s.output_dir = rd.text(o, "outputs", "dir", s.output_dir);
    if (o.contains("plots")) {
      if (o.at("plots").is_boolean()) s.plots = o.at("plots").get<bool>();
      else rd.error("outputs.plots", "expected a boolean");
    }
  }

  if (root.contains("test_forcing")) {
    const json f = root.at("test_forcing");
    rd.check_keys(f, "test_forcing", {"amplitude"});
    s.test_forcing_amplitude = rd.number(f, "test_forcing", "amplitude", 0.5);
  }

  rd.finish();
  return s;
}

void require_valid(const Scenario& scenario) {
  const auto init = resolve_initial(scenario.params, scenario.initial, scenario.grids);
  const auto report = validate_assumptions(scenario.params, init, scenario.grids);
  if (report.passed()) return;
  const auto* ne = report.find("non_extinction");
  std::ostringstream msg;
  msg << "model assumptions not satisfied:";
  for (const auto& item : report.items)
    if (!item.passed)
      msg << "\n  " << item.name << ": " << item.detail << " (witness " << item.witness << " at "
          << item.location << ")";
  fail(ne && !ne->passed ? ErrorKind::NonExtinction : ErrorKind::Validation, msg.str());
}

Scenario read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

Scenario load_config(const std::string& path) {
  Scenario s = read_config(path);
  require_valid(s);
  return s;
}

json to_json(const Scenario& s) {
  json j;
  j["model"] = {{"lambda", s.params.lambda},
                {"c_B", s.params.c_B},
                {"coupling", s.params.coupling == Coupling::Elliptic ? "elliptic" : "parabolic"},
                {"K0", s.params.K0},
                {"r", coefficient_json(s.params.r.spec())},
                {"d", coefficient_json(s.params.d.spec())}};
  j["initial"] = {{"X0", profile_json(s.initial.X0)},
                  {"sigma0", s.initial.sigma0},
                  {"rho0", s.initial.rho0_from_compatibility ? json("compatible")
                                                             : profile_json(s.initial.rho0)},
                  {"c0", s.initial.c0_equilibrium ? json("equilibrium")
                                                  : profile_json(s.initial.c0)}};
  j["grids"] = {{"L", s.grids.L},
                {"Ny", s.grids.Ny},
                {"Nx", s.grids.Nx},
                {"dt", s.grids.dt},
                {"T_final", s.grids.T_final}};
  j["solver"] = {
      {"time_convention", s.time_convention == TimeConvention::Raw ? "raw" : "selection"},
      {"picard", s.picard}};
  j["sweep"] = {{"eps_list", s.sweep.eps_list}, {"compare_times", s.sweep.compare_times}};
  j["outputs"] = {{"dir", s.output_dir}, {"plots", s.plots}};
  if (s.test_forcing_amplitude) j["test_forcing"] = {{"amplitude", *s.test_forcing_amplitude}};
  return j;
}

std::string echo_config(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

std::string symbol_table(const Scenario& s) {
  std::ostringstream out;
  out.precision(10);
  const Bounds& b = s.params.bounds();
  out << "config key                 symbol      value / meaning\n";
  out << "model.lambda               λ           " << s.params.lambda
      << "  nutrient exchange rate\n";
  out << "model.c_B                  c_B         " << s.params.c_B
      << "  reservoir nutrient concentration\n";
  out << "model.r                    r(x)        proliferation rate ("
      << kind_name(s.params.r.spec().kind) << ")\n";
  out << "model.d                    d(x)        death rate (" << kind_name(s.params.d.spec().kind)
      << ")\n";
  out << "model.K0                   K0          " << s.params.K0
      << "  bound on |r'|+|d'|+|r''|+|d''|+|r'''|+|d'''|\n";
  out << "model.coupling             -           "
      << (s.params.coupling == Coupling::Elliptic ? "elliptic" : "parabolic")
      << " nutrient equation\n";
  out << "initial.X0                 X0(y)       initial dominant trait\n";
  out << "initial.sigma0             1/a         " << s.initial.sigma0
      << "  initial trait variance scale, u0_xx = -1/sigma0\n";
  out << "initial.rho0               ρ0(y)       "
      << (s.initial.rho0_from_compatibility ? "from r(X0) c0 = d(X0)(1 + ρ0)" : "profile") << "\n";
  out << "initial.c0                 c0(y)       "
      << (s.initial.c0_equilibrium ? "local equilibrium nutrient" : "profile") << "\n";
  out << "(derived)                  ρ_M         " << b.rho_M << "  c_B max r/d - 1\n";
  out << "(derived)                  c_m         " << b.c_m << "  c_B λ/(λ + ρ_M)\n";
  out << "(derived)                  ρ_m         " << b.rho_m << "  c_m min r/d - 1\n";
  out << "sweep.eps_list             ε           scale-separation parameters\n";
  out << "grids.{L,Ny,Nx,dt,T_final} -           y in [-L, L], x in [0, 1], time step, horizon\n";
  return out.str();
}

std::vector<std::string> config_warnings(const Scenario& s) {
  std::vector<std::string> w;
  const double hx = s.grids.hx();
  for (double eps : s.sweep.eps_list) {
    const double width = std::sqrt(s.initial.sigma0 * eps);
    if (width < 4.0 * hx) {
      std::ostringstream msg;
      msg << "initial trait width sqrt(sigma0 eps) = " << width << " for eps = " << eps
          << " is under 4 x-spacings (hx = " << hx << ")";
      w.push_back(msg.str());
    }
  }
  return w;
}

}  // namespace dirsel
