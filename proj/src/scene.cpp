#include "foldopt/scene.hpp"

#include "foldopt/error.hpp"

namespace foldopt {

std::vector<std::pair<Vec3, Vec3>> FoldScene::endpoints() const {
  std::vector<std::pair<Vec3, Vec3>> out;
  for (const ArmSpec& a : arms) out.emplace_back(a.start, a.end);
  return out;
}

void FoldScene::validate() const {
  mesh.validate();
  params.validate();
  if (arms.empty()) throw InputError("fold scene: no arms");
  if (!(duration > 0.0)) throw InputError("fold scene: duration must be positive");
  if (!(settle_time >= 0.0)) throw InputError("fold scene: negative settle time");
  if (!(alpha >= 0.0)) throw InputError("fold scene: alpha must be non-negative");
  if (target.target_mesh.triangles.size() != mesh.triangles.size())
    throw InputError("fold scene: target does not correspond to the garment");
  for (const ArmSpec& a : arms) {
    if (a.grasp_vertex >= mesh.vertices.size()) throw InputError("fold scene: invalid grasp vertex");
    for (std::size_t v : a.grasp_vertices)
      if (v >= mesh.vertices.size()) throw InputError("fold scene: invalid grasp vertex");
  }
}

TriangleMesh canonical_mesh(const TriangleMesh& mesh, const SimParams& params) {
  return ClothSimulator(mesh, params).mesh();
}

FoldScene make_fold_scene(const TriangleMesh& state, const SimParams& params, const Line2D& fold_line,
                          FoldSide side, std::span<const std::size_t> grasp_vertices, const SceneOptions& opts) {
  if (grasp_vertices.empty()) throw InputError("make_fold_scene: no grasp vertices");
  FoldScene scene;
  scene.mesh = canonical_mesh(state, params);
  scene.params = params;
  scene.target = make_fold_target(scene.mesh, fold_line, side, opts.layer_gap);
  scene.duration = opts.duration;
  scene.settle_time = opts.settle_time;
  scene.alpha = opts.alpha;
  for (std::size_t g : grasp_vertices) {
    if (g >= scene.mesh.vertices.size()) throw InputError("make_fold_scene: invalid grasp vertex");
    ArmSpec arm;
    arm.grasp_vertex = g;
    arm.grasp_vertices = grasp_neighborhood(scene.mesh, g, opts.grasp_radius);
    arm.start = scene.mesh.vertices[g];
    arm.end = scene.target.target_mesh.vertices[g];
    if ((arm.end - arm.start).norm() < 1e-9)
      throw InputError("make_fold_scene: grasp vertex " + std::to_string(g) + " is not on the folded side");
    scene.arms.push_back(std::move(arm));
  }
  scene.validate();
  return scene;
}

std::vector<GraspConstraint> grasp_constraints(const FoldScene& scene, std::span<const BezierTrajectory> arms) {
  if (arms.size() != scene.arms.size()) throw InputError("grasp_constraints: arm count mismatch");
  std::vector<GraspConstraint> out;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const ArmSpec& spec = scene.arms[a];
    GraspConstraint c;
    c.vertex_ids = spec.grasp_vertices;
    c.trajectory = arms[a];
    c.start_time = 0.0;
    c.duration = scene.duration;
    for (std::size_t v : spec.grasp_vertices) c.offsets.push_back(scene.mesh.vertices[v] - spec.start);
    out.push_back(std::move(c));
  }
  return out;
}

CostReport evaluate_trajectories(const FoldScene& scene, std::span<const BezierTrajectory> arms,
                                 TriangleMesh* final_mesh) {
  const auto constraints = grasp_constraints(scene, arms);
  TriangleMesh result;
  try {
    result = simulate_fold(scene.mesh, scene.params, constraints, scene.settle_time);
  } catch (const SimulationDiverged&) {
    return diverged_report(scene.alpha);
  }
  const CostReport r = cost_report(scene.target, result, arms, scene.alpha, scene.arc_tolerance);
  if (final_mesh) *final_mesh = std::move(result);
  return r;
}

CostReport objective(const Eigen::VectorXd& x, const FoldScene& scene) {
  if (!x.allFinite()) return diverged_report(scene.alpha);
  const auto ends = scene.endpoints();
  const auto arms = unpack(x, ends);
  return evaluate_trajectories(scene, arms);
}

std::vector<BezierTrajectory> initial_trajectories(const FoldScene& scene, double h) {
  std::vector<BezierTrajectory> out;
  for (const ArmSpec& a : scene.arms) out.push_back(initialize(a.start, a.end, h));
  return out;
}

FoldScene scaled_scene(const FoldScene& scene, double s) {
  if (!(s > 0.0)) throw InputError("scaled_scene: scale must be positive");
  FoldScene out = scene;
  out.mesh = transformed(scene.mesh, s, Vec3::Zero());
  out.target.target_mesh = transformed(scene.target.target_mesh, s, Vec3::Zero());
  out.target.total_area = total_area(out.target.target_mesh);
  for (ArmSpec& a : out.arms) {
    a.start *= s;
    a.end *= s;
  }
  out.arc_tolerance = scene.arc_tolerance * s;
  return out;
}

}  // namespace foldopt
