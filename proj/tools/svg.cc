#include "svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "containment/hull.h"

namespace containment::cli {
namespace {

constexpr double kPanel = 420.0;
constexpr double kMargin = 50.0;
constexpr double kFloor = 1e-16;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad() {
    if (!(x1 > x0)) {
      x0 -= 1.0;
      x1 += 1.0;
    }
    if (!(y1 > y0)) {
      y0 -= 1.0;
      y1 += 1.0;
    }
    const double dx = 0.05 * (x1 - x0);
    const double dy = 0.05 * (y1 - y0);
    x0 -= dx;
    x1 += dx;
    y0 -= dy;
    y1 += dy;
  }
};

// Maps data coordinates into a panel whose top-left corner is (ox, oy).
struct Frame {
  Box box;
  double ox = 0.0;
  double oy = 0.0;

  double x(double v) const { return ox + kMargin + (v - box.x0) / (box.x1 - box.x0) * (kPanel - 2 * kMargin); }
  double y(double v) const {
    return oy + kPanel - kMargin - (v - box.y0) / (box.y1 - box.y0) * (kPanel - 2 * kMargin);
  }
};

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts,
                     const std::string& style) {
  std::string out = "<polyline fill=\"none\" " + style + " points=\"";
  for (const auto& [a, b] : pts) out += num(f.x(a)) + "," + num(f.y(b)) + " ";
  out += "\"/>\n";
  return out;
}

std::string axes(const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  std::string out;
  const double left = f.ox + kMargin;
  const double right = f.ox + kPanel - kMargin;
  const double top = f.oy + kMargin;
  const double bottom = f.oy + kPanel - kMargin;
  out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) +
         "\" height=\"" + num(bottom - top) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  out += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(top - 12) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  out += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(bottom + 36) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + xlabel + "</text>\n";
  out += "<text x=\"" + num(left - 36) + "\" y=\"" + num((top + bottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " + num(left - 36) + " " +
         num((top + bottom) / 2) + ")\">" + ylabel + "</text>\n";
  char buf[32];
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.box.x0 + (f.box.x1 - f.box.x0) * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", xv);
    out += "<text x=\"" + num(f.x(xv)) + "\" y=\"" + num(bottom + 16) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + buf + "</text>\n";
  }
  return out;
}

std::string semilog_panel(double ox, const std::string& title, const std::vector<double>& times,
                          const std::vector<double>& values) {
  Frame f;
  f.ox = ox;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double ly = std::log10(std::max(values[k], kFloor));
    f.box.add(times[k], ly);
    pts.emplace_back(times[k], ly);
  }
  f.box.y0 = std::floor(f.box.y0);
  f.box.y1 = std::ceil(f.box.y1);
  if (!(f.box.y1 > f.box.y0)) f.box.y1 = f.box.y0 + 1.0;
  if (!(f.box.x1 > f.box.x0)) f.box.x1 = f.box.x0 + 1.0;
  std::string out = axes(f, title, "t [s]", "log10 error");
  const int step = std::max(1, static_cast<int>((f.box.y1 - f.box.y0) / 8.0));
  for (int d = static_cast<int>(f.box.y0); d <= static_cast<int>(f.box.y1); d += step) {
    out += "<line x1=\"" + num(f.x(f.box.x0)) + "\" x2=\"" + num(f.x(f.box.x1)) + "\" y1=\"" +
           num(f.y(d)) + "\" y2=\"" + num(f.y(d)) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(f.x(f.box.x0) - 4) + "\" y=\"" + num(f.y(d) + 3) +
           "\" text-anchor=\"end\" font-size=\"10\">1e" + std::to_string(d) + "</text>\n";
  }
  out += polyline(f, pts, "stroke=\"#c0392b\" stroke-width=\"1.5\"");
  return out;
}

std::string header(double width) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(kPanel) + "\" viewBox=\"0 0 " + num(width) + " " + num(kPanel) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string trajectory_svg(const Trace& trace, const std::vector<double>& snapshot_times) {
  const int n = trace.agents;
  const int m = trace.followers;
  const bool planar = trace.dim >= 2;
  auto coords = [&](const TraceSample& s, int i) {
    const Vec& p = s.p[static_cast<std::size_t>(i)];
    return planar ? std::make_pair(p[0], p[1]) : std::make_pair(s.t, p[0]);
  };

  Frame f;
  for (const auto& s : trace.samples) {
    for (int i = 0; i < n; ++i) {
      const auto [a, b] = coords(s, i);
      f.box.add(a, b);
    }
  }
  f.box.pad();

  std::string out = header(2 * kPanel);
  out += axes(f, "trajectories", planar ? "p_1" : "t [s]", planar ? "p_2" : "p_1");

  if (planar) {
    for (double ts : snapshot_times) {
      const TraceSample* s = nullptr;
      for (const auto& c : trace.samples) {
        if (std::abs(c.t - ts) <= 0.5 * trace.dt) s = &c;
      }
      if (!s) continue;
      std::vector<Eigen::Vector2d> leaders;
      for (int i = m; i < n; ++i) leaders.emplace_back(s->p[static_cast<std::size_t>(i)][0], s->p[static_cast<std::size_t>(i)][1]);
      const auto hull = convex_hull_2d(leaders);
      std::string pts;
      for (const auto& v : hull) pts += num(f.x(v[0])) + "," + num(f.y(v[1])) + " ";
      out += "<polygon points=\"" + pts +
             "\" fill=\"#f5b041\" fill-opacity=\"0.15\" stroke=\"#d68910\" stroke-dasharray=\"4 3\"/>\n";
      for (int i = 0; i < m; ++i) {
        const auto [a, b] = coords(*s, i);
        out += "<circle cx=\"" + num(f.x(a)) + "\" cy=\"" + num(f.y(b)) + "\" r=\"2.5\" fill=\"#2e86c1\"/>\n";
      }
      char label[32];
      std::snprintf(label, sizeof label, "t=%g", s->t);
      const auto [lx, ly] = coords(*s, m);
      out += "<text x=\"" + num(f.x(lx) + 4) + "\" y=\"" + num(f.y(ly) - 4) +
             "\" font-size=\"9\" fill=\"#935116\">" + label + "</text>\n";
    }
  }

  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : trace.samples) pts.push_back(coords(s, i));
    const bool leader = i >= m;
    out += polyline(f, pts,
                    leader ? "stroke=\"#c0392b\" stroke-width=\"1.2\""
                           : "stroke=\"#2e86c1\" stroke-width=\"1\" stroke-dasharray=\"3 2\"");
  }

  std::vector<double> times;
  std::vector<double> errors;
  for (const auto& s : trace.samples) {
    times.push_back(s.t);
    errors.push_back(s.pos_error.norm());
  }
  out += semilog_panel(kPanel, "containment error", times, errors);
  out += "</svg>\n";
  return out;
}

std::string error_svg(const std::string& title, const std::vector<double>& times,
                      const std::vector<double>& values) {
  std::string out = header(kPanel);
  out += semilog_panel(0.0, title, times, values);
  out += "</svg>\n";
  return out;
}

}  // namespace containment::cli
