#pragma once

#include "foldopt/cost.hpp"
#include "foldopt/mesh.hpp"
#include "foldopt/trajectory.hpp"

#include <map>
#include <string>
#include <vector>

namespace foldopt {

enum class GarmentCategory { Towel, Shirt, Pants };

std::string to_string(GarmentCategory c);
GarmentCategory parse_category(const std::string& name);

using Keypoints = std::map<std::string, Vec2>;

/// One fold. Each grasp keypoint is carried to the point given by the target
/// expression at the same index. Expressions:
///   id | midpoint(e, e) | lerp(e, e, t) | reflect(e, a, b)
/// where reflect mirrors e across the line through a and b. Expressions are
/// evaluated on the keypoints of the unfolded garment.
struct FoldStepSpec {
  std::vector<std::string> grasp_keypoints;
  std::vector<std::string> targets;

  int arms() const { return static_cast<int>(grasp_keypoints.size()); }
};

struct FoldPlan {
  GarmentCategory category = GarmentCategory::Towel;
  std::vector<FoldStepSpec> steps;

  /// Structure only; keypoint references are checked by instantiate.
  void validate() const;
};

FoldPlan builtin_plan(GarmentCategory c);

FoldPlan plan_from_json(const std::string& text);
std::string plan_to_json(const FoldPlan& plan);
FoldPlan load_plan(const std::string& path);

/// Identifiers referenced by a target expression.
std::vector<std::string> expression_references(const std::string& expr);
Vec2 evaluate_target(const std::string& expr, const Keypoints& keypoints);

/// Tolerance of the reflection consistency check.
constexpr double kPlanReflectionTolerance = 1e-2;

/// A step bound to a garment: geometry on the state predicted by folding the
/// previous steps onto their targets.
struct PlanStep {
  std::size_t index = 0;
  std::vector<std::string> grasp_keypoints;
  std::vector<Vec2> grasp_points;
  std::vector<Vec2> target_points;
  Line2D fold_line;
  FoldSide side = FoldSide::Left;
  std::vector<std::size_t> grasp_vertices;
  std::vector<Vec3> start;
  std::vector<Vec3> end;

  int arms() const { return static_cast<int>(grasp_keypoints.size()); }
};

/// Perpendicular bisector of the mean grasp point and mean target, directed
/// so the grasp side has positive signed distance.
Line2D fold_line_for(const std::vector<Vec2>& grasp, const std::vector<Vec2>& targets);

/// Vertex nearest to `p` in the table plane; among vertices within 2 mm of
/// the nearest distance the highest one wins.
std::size_t pick_grasp_vertex(const TriangleMesh& mesh, const Vec2& p);

std::vector<PlanStep> instantiate(const FoldPlan& plan, const Keypoints& keypoints, const TriangleMesh& mesh,
                                  double layer_gap = kDefaultLayerGap);

/// Keypoints after folding `side` of `line` over.
Keypoints fold_keypoints(const Keypoints& keypoints, const Line2D& line, FoldSide side);

/// Maps old (P0, P3) onto the new endpoints by a rotation about the vertical,
/// a uniform scale and a translation, and carries P1, P2 along.
BezierTrajectory scale_trajectory(const BezierTrajectory& traj, const Vec3& new_p0, const Vec3& new_p3);

}  // namespace foldopt
