#include "nsadm/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nsadm/errors.hpp"

namespace nsadm {
namespace {

const char *const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string &s) {
  std::string o;
  for (char c : s) {
    switch (c) {
    case '<': o += "&lt;"; break;
    case '>': o += "&gt;"; break;
    case '&': o += "&amp;"; break;
    case '"': o += "&quot;"; break;
    default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Step of roughly `target` ticks, rounded to 1, 2 or 5 times a decade.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

} // namespace

std::string render_svg(const PlotPanel &p, int W, int H) {
  const double L = 70, R = 20, T = 34, B = 48;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto &s : p.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) {
    x0 = 0, x1 = 1, y0 = -1, y1 = 1;
  }
  if (x1 - x0 <= 0)
    x1 = x0 + 1;
  if (y1 - y0 <= 1e-12 * std::max(1.0, std::abs(y0))) {
    y0 -= 0.5 * std::max(1.0, std::abs(y0));
    y1 += 0.5 * std::max(1.0, std::abs(y1));
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = W - L - R, ph = H - T - B;
  const auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  const auto Y = [&](double y) { return T + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << esc(p.title) << "</text>\n";

  const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
  for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs) {
    o << "<line x1=\"" << X(v) << "\" y1=\"" << T << "\" x2=\"" << X(v) << "\" y2=\""
      << T + ph << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << X(v) << "\" y=\"" << T + ph + 16
      << "\" text-anchor=\"middle\">" << num(std::abs(v) < 1e-12 * xs ? 0.0 : v) << "</text>\n";
  }
  for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys) {
    o << "<line x1=\"" << L << "\" y1=\"" << Y(v) << "\" x2=\"" << L + pw << "\" y2=\""
      << Y(v) << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">"
      << num(std::abs(v) < 1e-12 * ys ? 0.0 : v) << "</text>\n";
  }
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
    << esc(p.xlabel) << "</text>\n";
  o << "<text transform=\"translate(16," << T + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << esc(p.ylabel) << "</text>\n";

  for (const auto &s : p.series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    char buf[48];
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(s.x[i]), Y(s.y[i]));
      o << buf;
    }
    o << "\"/>\n";
  }

  double ly = T + 14;
  for (const auto &s : p.series) {
    if (s.label.empty())
      continue;
    o << "<line x1=\"" << L + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << L + pw - 126
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    o << "<text x=\"" << L + pw - 120 << "\" y=\"" << ly << "\">" << esc(s.label) << "</text>\n";
    ly += 16;
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<PlotPanel>
run_panels(const std::vector<std::pair<std::string, const Trace *>> &traces,
           const Scenario &sc) {
  PlotPanel pos{"Joint position", "t [s]", "q, q_x", {}};
  PlotPanel force{"Contact force", "t [s]", "f [N]", {}};
  PlotPanel torque{"Joint torque", "t [s]", "tau", {}};
  const bool multi = traces.size() > 1;
  std::size_t color = 0;
  const auto pick = [&] { return kPalette[color++ % std::size(kPalette)]; };
  int dof = 0;
  for (const auto &[name, tr] : traces) {
    dof = std::max(dof, tr->dof);
    const std::string pre = multi ? name + " " : "";
    std::vector<double> t;
    t.reserve(tr->rows.size());
    for (const auto &r : tr->rows)
      t.push_back(r.t);
    const auto column = [&](auto get) {
      std::vector<double> y;
      y.reserve(tr->rows.size());
      for (const auto &r : tr->rows)
        y.push_back(get(r));
      return y;
    };
    for (int i = 0; i < tr->dof; ++i) {
      const std::string j = tr->dof > 1 ? std::to_string(i + 1) : "";
      const std::string c = pick();
      pos.series.push_back({pre + "q" + j, t, column([i](const TraceRow &r) { return r.q[i]; }), c, false});
      pos.series.push_back({pre + "q_x" + j, t, column([i](const TraceRow &r) { return r.qx[i]; }), c, true});
      torque.series.push_back({pre + "tau" + j, t, column([i](const TraceRow &r) { return r.tau[i]; }), c, false});
    }
    force.series.push_back({pre + "f_c,y", t, column([](const TraceRow &r) { return r.fc_cart.y(); }), pick(), false});
    if (sc.env.mu_fric > 0)
      force.series.push_back({pre + "f_c,x", t, column([](const TraceRow &r) { return r.fc_cart.x(); }), pick(), false});
  }
  if (!traces.empty()) {
    const auto *tr = traces.front().second;
    std::vector<double> t, fd;
    for (const auto &r : tr->rows) {
      t.push_back(r.t);
      fd.push_back(-r.fd_cart.y());
    }
    force.series.push_back({"-f_d,y", t, fd, "#000000", true});
    const Eigen::VectorXd F = sc.plant.build().torque_limits.limits;
    if (!t.empty())
      for (int i = 0; i < dof; ++i)
        for (double sgn : {1.0, -1.0})
          torque.series.push_back({sgn > 0 ? "F" + (dof > 1 ? std::to_string(i + 1) : std::string()) : "",
                                   {t.front(), t.back()},
                                   {sgn * F[i], sgn * F[i]},
                                   "#888888", true});
  }
  return {pos, force, torque};
}

std::vector<std::string>
write_run_plots(const std::string &dir,
                const std::vector<std::pair<std::string, const Trace *>> &traces,
                const Scenario &sc) {
  const auto panels = run_panels(traces, sc);
  const char *const names[] = {"position.svg", "force.svg", "torque.svg"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const std::string path = (std::filesystem::path(dir) / names[i]).string();
    std::ofstream os(path);
    if (!os)
      throw ConfigError("cannot write '" + path + "'");
    os << render_svg(panels[i]);
    out.push_back(path);
  }
  return out;
}

} // namespace nsadm
