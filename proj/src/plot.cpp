#include "dirsel/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "dirsel/error.hpp"

namespace dirsel {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 80;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v, double p0, double p1) const {
    const double a = log ? std::log10(v) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    return p0 + (a - l) / (h - l) * (p1 - p0);
  }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
      }
      if (t.size() < 3) {
        std::vector<double> fine;
        for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0)
          for (double m : {1.0, 2.0, 5.0}) {
            const double v = m * std::pow(10.0, e);
            if (v >= lo && v <= hi) fine.push_back(v);
          }
        if (fine.size() >= 2) t = fine;
      }
      if (t.size() < 2) t = {lo, hi};
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
      t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
  }
};

Axis fit_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* v : data)
    for (double a : *v) {
      if (!std::isfinite(a) || (log && a <= 0.0)) continue;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  if (!std::isfinite(lo)) {
    lo = log ? 1e-3 : 0.0;
    hi = 1.0;
  }
  Axis ax;
  ax.log = log;
  if (log) {
    if (hi <= lo) hi = lo * 10.0;
    ax.lo = lo / 1.5;
    ax.hi = hi * 1.5;
  } else {
    if (hi <= lo) {
      const double pad = std::max(std::abs(lo) * 0.1, 1e-6);
      lo -= pad;
      hi += pad;
    }
    const double pad = 0.05 * (hi - lo);
    ax.lo = lo - pad;
    ax.hi = hi + pad;
  }
  return ax;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : plot.series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const Axis ax = fit_axis(xs, plot.logx);
  const Axis ay = fit_axis(ys, plot.logy);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << escape(plot.title) << "</text>\n";

  for (double t : ax.ticks()) {
    const double px = ax.map(t, x0, x1);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(y1) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double py = ay.map(t, y0, y1);
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(py) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y0 + 36)
      << "\" text-anchor=\"middle\">" << escape(plot.xlabel) << "</text>\n";
  out << "<text transform=\"translate(18," << num((y0 + y1) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.ylabel) << "</text>\n";

  double legend_y = y1 + 10;
  for (const auto& s : plot.series) {
    std::ostringstream pts;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if ((plot.logx && s.x[k] <= 0) || (plot.logy && s.y[k] <= 0)) continue;
      pts << num(ax.map(s.x[k], x0, x1)) << ',' << num(ay.map(s.y[k], y0, y1)) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str()
        << "\"/>\n";
    if (s.markers) {
      for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
        if ((plot.logx && s.x[k] <= 0) || (plot.logy && s.y[k] <= 0)) continue;
        out << "<circle cx=\"" << num(ax.map(s.x[k], x0, x1)) << "\" cy=\""
            << num(ay.map(s.y[k], y0, y1)) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    out << "<line x1=\"" << num(x1 + 12) << "\" y1=\"" << num(legend_y) << "\" x2=\""
        << num(x1 + 36) << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    out << "<text x=\"" << num(x1 + 42) << "\" y=\"" << num(legend_y + 4) << "\">"
        << escape(s.label) << "</text>\n";
    legend_y += 18;
  }
  if (!plot.caption.empty())
    out << "<text x=\"" << num(x0) << "\" y=\"" << num(kHeight - 14) << "\">"
        << escape(plot.caption) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

PlotData plot_data(const SweepResult& result, const Grids& grids) {
  PlotData data;
  data.rows = result.report.rows;
  const auto y = y_nodes(grids);
  for (const auto& s : result.limit.snapshots)
    data.trajectories.push_back({0.0, s.t, y, s.X, s.c});
  for (const auto& run : result.runs)
    for (const auto& s : run.snapshots)
      data.trajectories.push_back({run.eps, s.t, y, s.metrics.X_eps, s.c});
  return data;
}

namespace {

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          const std::vector<std::string>& want) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::size_t> idx;
  for (const auto& w : want) {
    const auto it = std::find(header.begin(), header.end(), w);
    if (it == header.end()) fail(ErrorKind::Io, path.string() + " lacks column " + w);
    idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<double>> cols(want.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::strtod(cell.c_str(), nullptr));
    for (std::size_t k = 0; k < idx.size(); ++k)
      cols[k].push_back(idx[k] < cells.size() ? cells[idx[k]]
                                              : std::numeric_limits<double>::quiet_NaN());
  }
  return cols;
}

void append_trajectories(PlotData& data, double eps, const std::vector<std::vector<double>>& cols) {
  // cols: t, y, X, c; rows grouped by t.
  std::map<double, Trajectory> by_time;
  for (std::size_t k = 0; k < cols[0].size(); ++k) {
    auto& tr = by_time[cols[0][k]];
    tr.eps = eps;
    tr.t = cols[0][k];
    tr.y.push_back(cols[1][k]);
    tr.X.push_back(cols[2][k]);
    tr.c.push_back(cols[3][k]);
  }
  for (auto& [t, tr] : by_time) data.trajectories.push_back(std::move(tr));
}

}  // namespace

PlotData load_plot_data(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  if (!fs::is_directory(base)) fail(ErrorKind::Io, dir + " is not a directory");
  PlotData data;
  if (fs::exists(base / "report.csv")) {
    const auto cols = read_csv(base / "report.csv", {"eps", "t", "err_X", "err_rho", "err_c",
                                                     "width_ratio", "maxu_drift"});
    for (std::size_t k = 0; k < cols[0].size(); ++k) {
      ReportRow row;
      row.eps = cols[0][k];
      row.t = cols[1][k];
      row.err_X = cols[2][k];
      row.err_rho = cols[3][k];
      row.err_c = cols[4][k];
      row.width_ratio = cols[5][k];
      row.maxu_drift = cols[6][k];
      data.rows.push_back(row);
    }
  }
  if (fs::exists(base / "limit.csv"))
    append_trajectories(data, 0.0, read_csv(base / "limit.csv", {"t", "y", "X", "c"}));

  // eps_<eps>.csv only; field dumps (eps_<eps>_fields.csv) are skipped.
  std::vector<std::pair<fs::path, double>> eps_files;
  for (const auto& entry : fs::directory_iterator(base)) {
    const auto stem = entry.path().stem().string();
    if (stem.rfind("eps_", 0) != 0 || entry.path().extension() != ".csv") continue;
    char* end = nullptr;
    const double eps = std::strtod(stem.c_str() + 4, &end);
    if (end != stem.c_str() + 4 && *end == '\0' && eps > 0.0)
      eps_files.emplace_back(entry.path(), eps);
  }
  std::sort(eps_files.begin(), eps_files.end());
  for (const auto& [p, eps] : eps_files)
    append_trajectories(data, eps, read_csv(p, {"t", "y", "X_eps", "c"}));
  return data;
}

PlotOutcome emit_plots(const PlotData& data, const std::string& dir) {
  PlotOutcome outcome;
  if (data.trajectories.empty()) {
    outcome.notices.push_back("no trajectories to plot; no figures written");
    return outcome;
  }
  namespace fs = std::filesystem;
  const fs::path base(dir);

  std::vector<double> eps_values;
  double t_last = 0.0;
  for (const auto& tr : data.trajectories) {
    if (tr.eps > 0.0 && std::find(eps_values.begin(), eps_values.end(), tr.eps) == eps_values.end())
      eps_values.push_back(tr.eps);
    t_last = std::max(t_last, tr.t);
  }
  std::sort(eps_values.rbegin(), eps_values.rend());
  auto color_of = [&](double eps) -> std::string {
    if (eps == 0.0) return "#000000";
    const auto it = std::find(eps_values.begin(), eps_values.end(), eps);
    return kPalette[static_cast<std::size_t>(it - eps_values.begin()) % 8];
  };
  auto label_of = [](double eps, double t) {
    char buf[64];
    if (eps == 0.0) std::snprintf(buf, sizeof buf, "limit t=%g", t);
    else std::snprintf(buf, sizeof buf, "eps=%g t=%g", eps, t);
    return std::string(buf);
  };

  {
    LinePlot p;
    p.title = "Dominant trait X(y)";
    p.xlabel = "y";
    p.ylabel = "X";
    for (const auto& tr : data.trajectories) {
      if (tr.eps == 0.0 && tr.t == 0.0)
        p.series.push_back({label_of(0.0, 0.0), tr.y, tr.X, "#888888", true, false});
      else if (tr.t == t_last)
        p.series.push_back({label_of(tr.eps, tr.t), tr.y, tr.X, color_of(tr.eps), false, false});
    }
    p.caption = "eps-runs at t = " + tick_label(t_last) + " against the limit solver";
    write_text_file((base / kPlotFiles[0]).string(), render_svg(p));
    outcome.files.push_back((base / kPlotFiles[0]).string());
  }

  std::vector<double> err_eps, err_x, wr;
  for (const auto& row : data.rows)
    if (row.t == t_last || (std::abs(row.t - t_last) < 1e-12)) {
      err_eps.push_back(row.eps);
      err_x.push_back(row.err_X);
      wr.push_back(row.width_ratio);
    }
  {
    LinePlot p;
    p.title = "Trait error against the limit";
    p.xlabel = "eps";
    p.ylabel = "max_y |X_eps - X|";
    p.logx = p.logy = true;
    p.series.push_back({"err_X", err_eps, err_x, kPalette[3], false, true});
    char buf[128];
    std::snprintf(buf, sizeof buf, "t = %g, least-squares log-log slope %.3f", t_last,
                  loglog_slope(err_eps, err_x));
    p.caption = buf;
    if (err_eps.empty()) outcome.notices.push_back("report.csv missing; error plot is empty");
    write_text_file((base / kPlotFiles[1]).string(), render_svg(p));
    outcome.files.push_back((base / kPlotFiles[1]).string());
  }
  {
    LinePlot p;
    p.title = "Concentration width scaling";
    p.xlabel = "eps";
    p.ylabel = "max_y width / sqrt(eps)";
    p.logx = true;
    p.series.push_back({"width/sqrt(eps)", err_eps, wr, kPalette[2], false, true});
    p.caption = "t = " + tick_label(t_last);
    write_text_file((base / kPlotFiles[2]).string(), render_svg(p));
    outcome.files.push_back((base / kPlotFiles[2]).string());
  }
  {
    LinePlot p;
    p.title = "Nutrient c(y)";
    p.xlabel = "y";
    p.ylabel = "c";
    for (const auto& tr : data.trajectories)
      if (tr.t == t_last) p.series.push_back({label_of(tr.eps, tr.t), tr.y, tr.c, color_of(tr.eps), false, false});
    p.caption = "t = " + tick_label(t_last);
    write_text_file((base / kPlotFiles[3]).string(), render_svg(p));
    outcome.files.push_back((base / kPlotFiles[3]).string());
  }
  return outcome;
}

}  // namespace dirsel
