#include "foldopt/plan.hpp"

#include "foldopt/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace foldopt {

std::string to_string(GarmentCategory c) {
  switch (c) {
    case GarmentCategory::Towel:
      return "towel";
    case GarmentCategory::Shirt:
      return "shirt";
    case GarmentCategory::Pants:
      return "pants";
  }
  return "towel";
}

GarmentCategory parse_category(const std::string& name) {
  if (name == "towel") return GarmentCategory::Towel;
  if (name == "shirt") return GarmentCategory::Shirt;
  if (name == "pants") return GarmentCategory::Pants;
  throw InputError("unknown garment category '" + name + "'");
}

void FoldPlan::validate() const {
  if (steps.empty()) throw InputError("plan: no steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const FoldStepSpec& s = steps[i];
    const std::string where = "plan step " + std::to_string(i + 1);
    if (s.arms() < 1 || s.arms() > 2) throw InputError(where + ": needs 1 or 2 grasp keypoints");
    if (s.targets.size() != s.grasp_keypoints.size()) throw InputError(where + ": one target per grasp keypoint");
    if (s.arms() == 2 && s.grasp_keypoints[0] == s.grasp_keypoints[1])
      throw InputError(where + ": the two arms grasp the same keypoint");
    for (const std::string& t : s.targets) expression_references(t);
  }
}

FoldPlan builtin_plan(GarmentCategory c) {
  FoldPlan p;
  p.category = c;
  switch (c) {
    case GarmentCategory::Towel:
      p.steps = {
          {{"corner_top_left", "corner_top_right"}, {"corner_bottom_left", "corner_bottom_right"}},
          {{"corner_bottom_left", "corner_bottom_right"},
           {"midpoint(corner_bottom_left, corner_top_left)", "midpoint(corner_bottom_right, corner_top_right)"}},
      };
      break;
    case GarmentCategory::Shirt: {
      const std::string left_line = "collar_left, lerp(hem_left, hem_right, 0.333333333333)";
      const std::string right_line = "collar_right, lerp(hem_left, hem_right, 0.666666666667)";
      p.steps = {
          {{"sleeve_left_end_top", "hem_left"},
           {"reflect(sleeve_left_end_top, " + left_line + ")", "reflect(hem_left, " + left_line + ")"}},
          {{"sleeve_right_end_top", "hem_right"},
           {"reflect(sleeve_right_end_top, " + right_line + ")", "reflect(hem_right, " + right_line + ")"}},
          {{"hem_left", "hem_right"},
           {"reflect(armpit_left, " + left_line + ")", "reflect(armpit_right, " + right_line + ")"}},
      };
      break;
    }
    case GarmentCategory::Pants: {
      const std::string waist_line = "midpoint(hem_right_outer, waist_right), midpoint(hem_left_outer, waist_left)";
      p.steps = {
          {{"waist_left", "hem_left_outer"}, {"waist_right", "hem_right_outer"}},
          {{"hem_right_outer", "hem_right_inner"},
           {"reflect(hem_right_outer, " + waist_line + ")", "reflect(hem_right_inner, " + waist_line + ")"}},
      };
      break;
    }
  }
  return p;
}

FoldPlan plan_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("plan: invalid JSON: ") + e.what());
  }
  FoldPlan p;
  try {
    p.category = parse_category(j.at("category").get<std::string>());
    for (const auto& s : j.at("steps")) {
      FoldStepSpec step;
      step.grasp_keypoints = s.at("grasp_keypoints").get<std::vector<std::string>>();
      step.targets = s.at("target").get<std::vector<std::string>>();
      if (s.contains("arms") && s.at("arms").get<int>() != step.arms())
        throw InputError("plan: arms does not match the grasp keypoint count");
      p.steps.push_back(std::move(step));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("plan: ") + e.what());
  }
  p.validate();
  return p;
}

std::string plan_to_json(const FoldPlan& plan) {
  nlohmann::json j;
  j["category"] = to_string(plan.category);
  j["steps"] = nlohmann::json::array();
  for (const FoldStepSpec& s : plan.steps)
    j["steps"].push_back({{"grasp_keypoints", s.grasp_keypoints}, {"target", s.targets}, {"arms", s.arms()}});
  return j.dump(2);
}

FoldPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return plan_from_json(ss.str());
}

namespace {

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, const Keypoints* keypoints) : s_(text), kp_(keypoints) {}

  Vec2 parse_all(std::vector<std::string>* refs) {
    refs_ = refs;
    const Vec2 v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("target expression '" + s_ + "': " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string identifier() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (b == pos_) fail("expected an identifier");
    return s_.substr(b, pos_ - b);
  }

  double number() {
    skip();
    const char* b = s_.c_str() + pos_;
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (e == b || !std::isfinite(v)) fail("expected a number");
    pos_ += static_cast<std::size_t>(e - b);
    return v;
  }

  Vec2 expr() {
    const std::string name = identifier();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      if (name == "midpoint") {
        const Vec2 a = expr();
        expect(',');
        const Vec2 b = expr();
        expect(')');
        return 0.5 * (a + b);
      }
      if (name == "lerp") {
        const Vec2 a = expr();
        expect(',');
        const Vec2 b = expr();
        expect(',');
        const double t = number();
        expect(')');
        return a + t * (b - a);
      }
      if (name == "reflect") {
        const Vec2 p = expr();
        expect(',');
        const Vec2 a = expr();
        expect(',');
        const Vec2 b = expr();
        expect(')');
        if (!kp_) return Vec2::Zero();
        if (!((b - a).norm() > 0.0)) fail("reflection line is degenerate");
        return Line2D{a, b - a}.reflect(p);
      }
      fail("unknown function '" + name + "'");
    }
    if (refs_) refs_->push_back(name);
    if (!kp_) return Vec2::Zero();
    const auto it = kp_->find(name);
    if (it == kp_->end()) throw InputError("unresolved keypoint '" + name + "'");
    return it->second;
  }

  std::string s_;
  const Keypoints* kp_;
  std::vector<std::string>* refs_ = nullptr;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::string> expression_references(const std::string& expr) {
  std::vector<std::string> refs;
  ExpressionParser(expr, nullptr).parse_all(&refs);
  return refs;
}

Vec2 evaluate_target(const std::string& expr, const Keypoints& keypoints) {
  return ExpressionParser(expr, &keypoints).parse_all(nullptr);
}

Line2D fold_line_for(const std::vector<Vec2>& grasp, const std::vector<Vec2>& targets) {
  if (grasp.empty() || grasp.size() != targets.size()) throw InputError("fold line: grasp/target mismatch");
  Vec2 g = Vec2::Zero(), t = Vec2::Zero();
  for (std::size_t i = 0; i < grasp.size(); ++i) {
    g += grasp[i];
    t += targets[i];
  }
  g /= double(grasp.size());
  t /= double(grasp.size());
  const Vec2 u = g - t;
  if (!(u.norm() > 1e-9)) throw InputError("fold line: grasp points already at their targets");
  const Vec2 n = u.normalized();
  return Line2D{0.5 * (g + t), Vec2(n.y(), -n.x())};
}

std::size_t pick_grasp_vertex(const TriangleMesh& mesh, const Vec2& p) {
  if (mesh.vertices.empty()) throw InputError("pick_grasp_vertex: empty mesh");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& v : mesh.vertices) best = std::min(best, (xy(v) - p).norm());
  std::size_t pick = mesh.vertices.size();
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if ((xy(mesh.vertices[i]) - p).norm() > best + 2e-3) continue;
    if (pick == mesh.vertices.size() || mesh.vertices[i].z() > mesh.vertices[pick].z()) pick = i;
  }
  return pick;
}

Keypoints fold_keypoints(const Keypoints& keypoints, const Line2D& line, FoldSide side) {
  const double sign = side == FoldSide::Left ? 1.0 : -1.0;
  Keypoints out = keypoints;
  for (auto& [id, p] : out)
    if (sign * line.signed_distance(p) > 0.0) p = line.reflect(p);
  return out;
}

std::vector<PlanStep> instantiate(const FoldPlan& plan, const Keypoints& keypoints, const TriangleMesh& mesh,
                                  double layer_gap) {
  plan.validate();
  mesh.validate();
  for (const FoldStepSpec& s : plan.steps) {
    for (const std::string& id : s.grasp_keypoints)
      if (!keypoints.count(id)) throw InputError("unresolved keypoint '" + id + "'");
    for (const std::string& t : s.targets)
      for (const std::string& id : expression_references(t))
        if (!keypoints.count(id)) throw InputError("unresolved keypoint '" + id + "'");
  }

  std::vector<PlanStep> out;
  TriangleMesh state = mesh;
  Keypoints current = keypoints;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const FoldStepSpec& spec = plan.steps[k];
    const std::string where = "plan step " + std::to_string(k + 1);
    PlanStep step;
    step.index = k;
    step.grasp_keypoints = spec.grasp_keypoints;
    for (std::size_t a = 0; a < spec.grasp_keypoints.size(); ++a) {
      step.grasp_points.push_back(current.at(spec.grasp_keypoints[a]));
      step.target_points.push_back(evaluate_target(spec.targets[a], keypoints));
    }
    step.fold_line = fold_line_for(step.grasp_points, step.target_points);
    step.side = FoldSide::Left;
    for (std::size_t a = 0; a < step.grasp_points.size(); ++a)
      if ((step.fold_line.reflect(step.grasp_points[a]) - step.target_points[a]).norm() > kPlanReflectionTolerance)
        throw InputError(where + ": target of '" + spec.grasp_keypoints[a] + "' is not its mirror image across the fold line");

    const FoldTarget target = make_fold_target(state, step.fold_line, step.side, layer_gap);
    if (target.identity) throw InputError(where + ": fold line misses the garment");
    for (const Vec2& g : step.grasp_points) {
      const std::size_t v = pick_grasp_vertex(state, g);
      if (std::find(step.grasp_vertices.begin(), step.grasp_vertices.end(), v) != step.grasp_vertices.end())
        throw InputError(where + ": both arms grasp the same vertex");
      step.grasp_vertices.push_back(v);
      step.start.push_back(state.vertices[v]);
      step.end.push_back(target.target_mesh.vertices[v]);
      if ((step.end.back() - step.start.back()).norm() < 1e-9)
        throw InputError(where + ": grasp point does not move with the fold");
    }
    out.push_back(std::move(step));
    current = fold_keypoints(current, out.back().fold_line, out.back().side);
    state = target.target_mesh;
  }
  return out;
}

BezierTrajectory scale_trajectory(const BezierTrajectory& traj, const Vec3& new_p0, const Vec3& new_p3) {
  const Vec3 d_old = traj.end() - traj.start();
  const Vec3 d_new = new_p3 - new_p0;
  if (!(d_old.norm() > 0.0)) throw InputError("scale_trajectory: degenerate trajectory chord");
  if (!(d_new.norm() > 0.0)) throw InputError("scale_trajectory: new endpoints coincide");
  const double s = d_new.norm() / d_old.norm();
  const Vec2 h_old = xy(d_old), h_new = xy(d_new);
  double angle = 0.0;
  if (h_old.norm() > 1e-12 && h_new.norm() > 1e-12)
    angle = std::atan2(h_new.y(), h_new.x()) - std::atan2(h_old.y(), h_old.x());
  const Eigen::AngleAxisd rot(angle, Vec3::UnitZ());
  BezierTrajectory out;
  for (int i = 0; i < 4; ++i) out.control_points[i] = new_p0 + s * (rot * (traj.control_points[i] - traj.start()));
  out.control_points[0] = new_p0;
  out.control_points[3] = new_p3;
  return out;
}

}  // namespace foldopt
