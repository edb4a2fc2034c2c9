#pragma once

#include "foldopt/clothsim.hpp"
#include "foldopt/cost.hpp"

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace foldopt {

/// One arm of a fold step: the grasped vertex set is carried rigidly with the
/// trajectory from `start` (the grasp vertex) to `end`.
struct ArmSpec {
  std::size_t grasp_vertex = 0;
  std::vector<std::size_t> grasp_vertices;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
};

/// Everything the objective needs to score a set of trajectories.
struct FoldScene {
  TriangleMesh mesh;
  SimParams params;
  FoldTarget target;
  std::vector<ArmSpec> arms;
  double duration = 4.0;
  double settle_time = 1.0;
  double alpha = kDefaultAlpha;
  double arc_tolerance = kDefaultArcTolerance;

  std::vector<std::pair<Vec3, Vec3>> endpoints() const;
  double diagonal() const { return bounding_diagonal(mesh); }
  void validate() const;
};

struct SceneOptions {
  double duration = 4.0;
  double settle_time = 1.0;
  double alpha = kDefaultAlpha;
  double grasp_radius = kDefaultGraspRadius;
  double layer_gap = kDefaultLayerGap;
};

/// Mesh positions as the simulator sees them (welded pairs collapsed).
TriangleMesh canonical_mesh(const TriangleMesh& mesh, const SimParams& params);

/// Builds a fold scene on the current garment state. Each arm grasps the
/// neighborhood of its vertex and carries it to that vertex's place in the
/// folded target.
FoldScene make_fold_scene(const TriangleMesh& state, const SimParams& params, const Line2D& fold_line,
                          FoldSide side, std::span<const std::size_t> grasp_vertices,
                          const SceneOptions& opts = {});

std::vector<GraspConstraint> grasp_constraints(const FoldScene& scene, std::span<const BezierTrajectory> arms);

/// Simulates the step. `final_mesh` receives the settled garment when given.
CostReport evaluate_trajectories(const FoldScene& scene, std::span<const BezierTrajectory> arms,
                                 TriangleMesh* final_mesh = nullptr);

/// C(x) for the stacked interior control points x.
CostReport objective(const Eigen::VectorXd& x, const FoldScene& scene);

/// Lifted default arc of height h for every arm.
std::vector<BezierTrajectory> initial_trajectories(const FoldScene& scene, double h = kDefaultLift);

/// Uniform scale of every length in the scene about the origin. Physics
/// parameters are left alone.
FoldScene scaled_scene(const FoldScene& scene, double s);

}  // namespace foldopt
