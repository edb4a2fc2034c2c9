#include "foldopt/cli.hpp"
#include "foldopt/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace foldopt::cli {

namespace {

constexpr double kPanelWidth = 360.0;
constexpr double kPanelHeight = 280.0;
constexpr double kPad = 36.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity(), y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad_degenerate() {
    if (!(x1 > x0)) {
      x0 -= 0.5;
      x1 += 0.5;
    }
    if (!(y1 > y0)) {
      y0 -= 0.5;
      y1 += 0.5;
    }
  }
};

// Maps data coordinates into a panel at (left, top); `equal` keeps the aspect.
struct Frame {
  double left, top, sx, sy, ox, oy;

  Frame(Box b, double left_, double top_, bool equal) : left(left_), top(top_) {
    b.pad_degenerate();
    sx = (kPanelWidth - 2 * kPad) / (b.x1 - b.x0);
    sy = (kPanelHeight - 2 * kPad) / (b.y1 - b.y0);
    if (equal) sx = sy = std::min(sx, sy);
    ox = b.x0;
    oy = b.y0;
  }
  double X(double x) const { return left + kPad + (x - ox) * sx; }
  double Y(double y) const { return top + kPanelHeight - kPad - (y - oy) * sy; }
};

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string panel(const Frame& f, const Box& b, const std::string& title, const std::string& xl, const std::string& yl) {
  std::string s;
  s += "<rect x=\"" + fmt(f.left + kPad) + "\" y=\"" + fmt(f.top + kPad) + "\" width=\"" + fmt(kPanelWidth - 2 * kPad) +
       "\" height=\"" + fmt(kPanelHeight - 2 * kPad) + "\" fill=\"none\" stroke=\"#999\"/>\n";
  s += "<text x=\"" + fmt(f.left + kPanelWidth / 2) + "\" y=\"" + fmt(f.top + 20) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + title + "</text>\n";
  s += "<text x=\"" + fmt(f.left + kPanelWidth / 2) + "\" y=\"" + fmt(f.top + kPanelHeight - 8) +
       "\" text-anchor=\"middle\" font-size=\"11\">" + xl + " [" + num(b.x0) + ", " + num(b.x1) + "]</text>\n";
  s += "<text x=\"" + fmt(f.left + 12) + "\" y=\"" + fmt(f.top + kPanelHeight / 2) +
       "\" font-size=\"11\" transform=\"rotate(-90 " + fmt(f.left + 12) + " " + fmt(f.top + kPanelHeight / 2) +
       ")\" text-anchor=\"middle\">" + yl + " [" + num(b.y0) + ", " + num(b.y1) + "]</text>\n";
  return s;
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const Frame& f, const std::string& color,
                     const std::string& cls) {
  std::string s = "<polyline class=\"" + cls + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += fmt(f.X(pts[i].first)) + "," + fmt(f.Y(pts[i].second));
  }
  return s + "\"/>\n";
}

std::string marker(double x, double y, const Frame& f, const std::string& color, const std::string& cls) {
  return "<circle class=\"" + cls + "\" cx=\"" + fmt(f.X(x)) + "\" cy=\"" + fmt(f.Y(y)) + "\" r=\"2.5\" fill=\"" +
         color + "\"/>\n";
}

std::vector<Vec3> samples_of(const BezierTrajectory& t, int n) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(evaluate(t, n == 1 ? 0.0 : double(i) / (n - 1)));
  return out;
}

}  // namespace

std::vector<RunLogRow> runlog_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RunLogRow> rows;
  std::size_t line_no = 0;
  auto number = [](const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RunLogRow r;
      r.step = j.at("step").get<int>();
      r.evaluation = j.at("evaluation").get<int>();
      r.cost = number(j, "cost");
      r.squared_cost = number(j, "squared_cost");
      r.length = number(j, "length");
      r.dissimilarity = number(j, "dissimilarity");
      r.diverged = j.value("diverged", false);
      rows.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("run log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<double> accepted_costs(const std::vector<TraceRow>& rows) {
  std::vector<double> out;
  for (const TraceRow& r : rows)
    if (r.accepted) out.push_back(r.squared_cost);
  return out;
}

std::string trajectory_svg(const std::vector<TrajectorySet>& steps, int samples) {
  if (steps.empty()) throw InputError("plot: no trajectories");
  if (samples < 2) throw InputError("plot: need at least 2 samples");
  Box top, side;
  for (const auto& s : steps)
    for (const auto& t : s.arms) {
      for (const Vec3& p : samples_of(t, samples)) {
        top.add(p.x(), p.y());
        side.add(p.x(), p.z());
      }
      for (const Vec3& p : t.control_points) {
        top.add(p.x(), p.y());
        side.add(p.x(), p.z());
      }
    }
  const Frame ft(top, 0.0, 0.0, true), fs(side, kPanelWidth, 0.0, true);
  std::string svg = header(2 * kPanelWidth, kPanelHeight);
  svg += panel(ft, top, "top view", "x", "y");
  svg += panel(fs, side, "side view", "x", "z");
  int series = 0;
  for (std::size_t k = 0; k < steps.size(); ++k)
    for (const auto& t : steps[k].arms) {
      const std::string color = kColors[series++ % 6];
      const auto pts = samples_of(t, samples);
      std::vector<std::pair<double, double>> a, b;
      for (const Vec3& p : pts) {
        a.emplace_back(p.x(), p.y());
        b.emplace_back(p.x(), p.z());
      }
      svg += polyline(a, ft, color, "trajectory");
      svg += polyline(b, fs, color, "trajectory");
      for (const Vec3& p : t.control_points) {
        svg += marker(p.x(), p.y(), ft, color, "control");
        svg += marker(p.x(), p.z(), fs, color, "control");
      }
    }
  return svg + "</svg>\n";
}

std::string trace_svg(const std::vector<TraceRow>& rows) {
  if (rows.empty()) throw InputError("plot: empty trace");
  Box b;
  for (const TraceRow& r : rows)
    if (std::isfinite(r.squared_cost)) b.add(r.iteration, r.squared_cost);
  if (!std::isfinite(b.x0)) throw InputError("plot: trace has no finite cost");
  const Frame f(b, 0.0, 0.0, false);
  std::string svg = header(kPanelWidth, kPanelHeight);
  svg += panel(f, b, "LM trace", "iteration", "squared cost");
  std::vector<std::pair<double, double>> acc;
  for (const TraceRow& r : rows)
    if (r.accepted) acc.emplace_back(r.iteration, r.squared_cost);
  svg += polyline(acc, f, kColors[0], "accepted");
  for (const TraceRow& r : rows)
    if (!r.accepted && std::isfinite(r.squared_cost)) svg += marker(r.iteration, r.squared_cost, f, "#bbbbbb", "rejected");
  return svg + "</svg>\n";
}

std::string runlog_svg(const std::vector<RunLogRow>& rows) {
  if (rows.empty()) throw InputError("plot: empty run log");
  Box b;
  for (const RunLogRow& r : rows)
    if (std::isfinite(r.cost)) b.add(r.evaluation, r.cost);
  if (!std::isfinite(b.x0)) throw InputError("plot: run log has no finite cost");
  const Frame f(b, 0.0, 0.0, false);
  std::string svg = header(kPanelWidth, kPanelHeight);
  svg += panel(f, b, "objective evaluations", "evaluation", "cost");
  std::vector<int> steps;
  for (const RunLogRow& r : rows)
    if (std::find(steps.begin(), steps.end(), r.step) == steps.end()) steps.push_back(r.step);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (const RunLogRow& r : rows)
      if (r.step == steps[k] && std::isfinite(r.cost)) pts.emplace_back(r.evaluation, r.cost);
    svg += polyline(pts, f, kColors[k % 6], "step");
  }
  return svg + "</svg>\n";
}

std::string trajectory_csv(const std::vector<TrajectorySet>& steps, int samples) {
  if (steps.empty()) throw InputError("plot: no trajectories");
  std::string out = "step,arm,u,x,y,z\n";
  char buf[200];
  for (std::size_t k = 0; k < steps.size(); ++k)
    for (std::size_t a = 0; a < steps[k].arms.size(); ++a)
      for (int i = 0; i < samples; ++i) {
        const double u = double(i) / (samples - 1);
        const Vec3 p = evaluate(steps[k].arms[a], u);
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g,%.17g\n", k + 1, a, u, p.x(), p.y(), p.z());
        out += buf;
      }
  return out;
}

std::string trace_plot_csv(const std::vector<TraceRow>& rows) {
  if (rows.empty()) throw InputError("plot: empty trace");
  std::string out = "iteration,squared_cost\n";
  char buf[80];
  for (const TraceRow& r : rows)
    if (r.accepted) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g\n", r.iteration, r.squared_cost);
      out += buf;
    }
  return out;
}

std::string runlog_csv(const std::vector<RunLogRow>& rows) {
  if (rows.empty()) throw InputError("plot: empty run log");
  std::string out = "step,evaluation,cost,length,dissimilarity\n";
  char buf[200];
  for (const RunLogRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", r.step, r.evaluation, r.cost, r.length,
                  r.dissimilarity);
    out += buf;
  }
  return out;
}

}  // namespace foldopt::cli
