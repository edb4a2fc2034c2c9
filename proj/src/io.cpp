#include "foldopt/io.hpp"

#include "foldopt/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace foldopt {

using nlohmann::json;

namespace {

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(what + ": invalid JSON: " + e.what());
  }
}

json vec(const Vec2& p) { return json::array({p.x(), p.y()}); }
json vec(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }

Vec2 vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("expected an [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected an [x, y, z] triple");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json contour_fields(const Contour& c) {
  json j;
  j["vertices"] = json::array();
  for (const Vec2& p : c.points) j["vertices"].push_back(vec(p));
  j["feature_flags"] = c.feature_flags();
  j["feature_ids"] = c.feature_ids;
  return j;
}

json arms_json(const TrajectorySet& set) {
  json arms = json::array();
  for (const BezierTrajectory& t : set.arms) {
    json cps = json::array();
    for (const Vec3& p : t.control_points) cps.push_back(vec(p));
    arms.push_back({{"control_points", cps}});
  }
  return arms;
}

TrajectorySet set_from(const json& j) {
  TrajectorySet set;
  for (const auto& a : j.at("arms")) {
    const auto& cps = a.at("control_points");
    if (cps.size() != 4) throw InputError("trajectory: every arm needs 4 control points");
    BezierTrajectory t;
    for (int i = 0; i < 4; ++i) t.control_points[i] = vec3(cps[i]);
    for (const Vec3& p : t.control_points)
      if (!p.allFinite()) throw InputError("trajectory: non-finite control point");
    set.arms.push_back(t);
  }
  if (set.arms.empty()) throw InputError("trajectory: no arms");
  set.duration = j.value("duration_s", 4.0);
  if (!(set.duration > 0.0)) throw InputError("trajectory: duration_s must be positive");
  return set;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string contour_to_json(const Polygon2D& contour) {
  json j = json::array();
  for (const Vec2& p : contour.points) j.push_back(vec(p));
  return j.dump() + "\n";
}

Polygon2D contour_from_json(const std::string& text) {
  const json j = parse(text, "contour");
  Polygon2D c;
  try {
    for (const auto& p : j) c.points.push_back(vec2(p));
  } catch (const json::exception& e) {
    throw InputError(std::string("contour: ") + e.what());
  }
  if (c.points.size() < 3) throw InputError("contour: needs at least 3 vertices");
  for (const Vec2& p : c.points)
    if (!p.allFinite()) throw InputError("contour: non-finite vertex");
  if (!c.is_simple()) throw InputError("contour: polygon is not simple");
  return c;
}

std::string template_to_json(const Contour& contour) { return contour_fields(contour).dump(2) + "\n"; }

Contour template_from_json(const std::string& text) {
  const json j = parse(text, "template");
  Contour c;
  try {
    for (const auto& p : j.at("vertices")) c.points.push_back(vec2(p));
    c.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    if (c.feature_ids.size() != c.points.size()) throw InputError("template: one id per vertex");
    if (j.contains("feature_flags")) {
      const auto flags = j.at("feature_flags").get<std::vector<bool>>();
      if (flags.size() != c.points.size()) throw InputError("template: one flag per vertex");
      for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i] != c.is_feature(i)) throw InputError("template: feature flag and id disagree at vertex " + std::to_string(i));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("template: ") + e.what());
  }
  c.validate();
  return c;
}

std::string fitted_to_json(const FittedContour& fit) {
  json j = contour_fields(fit.contour);
  j["reference"] = json::array();
  for (const Vec2& p : fit.reference.points) j["reference"].push_back(vec(p));
  j["features"] = json::object();
  for (const auto& [id, p] : fit.features) j["features"][id] = vec(p);
  j["energies"] = {{"fit", fit.energies.fit}, {"stretch", fit.energies.stretch}, {"bend", fit.energies.bend}};
  j["outer_iterations"] = fit.outer_iterations;
  j["converged"] = fit.converged;
  j["warning"] = fit.warning;
  return j.dump(2) + "\n";
}

std::string keypoints_to_json(const Keypoints& keypoints) {
  json j;
  j["keypoints"] = json::object();
  for (const auto& [id, p] : keypoints) j["keypoints"][id] = vec(p);
  return j.dump(2) + "\n";
}

Keypoints keypoints_from_json(const std::string& text) {
  const json j = parse(text, "keypoints");
  Keypoints out;
  try {
    const json& k = j.contains("keypoints") ? j.at("keypoints") : j.at("features");
    for (const auto& [id, p] : k.items()) out[id] = vec2(p);
  } catch (const json::exception& e) {
    throw InputError(std::string("keypoints: ") + e.what());
  }
  if (out.empty()) throw InputError("keypoints: none given");
  for (const auto& [id, p] : out)
    if (!p.allFinite()) throw InputError("keypoints: '" + id + "' is not finite");
  return out;
}

std::string trajectory_to_json(const TrajectorySet& set) {
  json j;
  j["arms"] = arms_json(set);
  j["duration_s"] = set.duration;
  return j.dump(2) + "\n";
}

TrajectorySet trajectory_from_json(const std::string& text) {
  const json j = parse(text, "trajectory");
  try {
    return set_from(j);
  } catch (const json::exception& e) {
    throw InputError(std::string("trajectory: ") + e.what());
  }
}

std::string trajectories_to_json(const std::vector<TrajectorySet>& steps) {
  json j;
  j["steps"] = json::array();
  for (std::size_t k = 0; k < steps.size(); ++k)
    j["steps"].push_back({{"step", k + 1}, {"arms", arms_json(steps[k])}, {"duration_s", steps[k].duration}});
  return j.dump(2) + "\n";
}

std::vector<TrajectorySet> trajectories_from_json(const std::string& text) {
  const json j = parse(text, "trajectories");
  std::vector<TrajectorySet> out;
  try {
    if (!j.contains("steps")) return {set_from(j)};
    for (const auto& s : j.at("steps")) out.push_back(set_from(s));
  } catch (const json::exception& e) {
    throw InputError(std::string("trajectories: ") + e.what());
  }
  if (out.empty()) throw InputError("trajectories: no steps");
  return out;
}

std::string trace_to_csv(const LmTrace& trace) {
  std::string out = "iteration,squared_cost,damping,step_norm,accepted\n";
  char buf[160];
  for (const LmRecord& r : trace.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d\n", r.iteration, r.squared_cost, r.damping, r.step_norm,
                  r.accepted ? 1 : 0);
    out += buf;
  }
  return out;
}

std::vector<TraceRow> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<TraceRow> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("iteration", 0) == 0) continue;
    TraceRow r;
    int accepted = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%d%c", &r.iteration, &r.squared_cost, &r.damping, &r.step_norm,
                    &accepted, &tail) != 5)
      throw InputError("trace line " + std::to_string(line_no) + ": expected 5 comma-separated fields");
    r.accepted = accepted != 0;
    rows.push_back(r);
  }
  return rows;
}

std::string cost_record_json(int step, int evaluation, const CostReport& report) {
  json j;
  j["step"] = step;
  j["evaluation"] = evaluation;
  j["length"] = report.length;
  j["dissimilarity"] = report.dissimilarity;
  j["cost"] = report.cost;
  j["squared_cost"] = report.squared_cost;
  j["alpha"] = report.alpha;
  j["diverged"] = report.diverged;
  return j.dump();
}

}  // namespace foldopt
