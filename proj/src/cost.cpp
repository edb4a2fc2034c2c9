#include "foldopt/cost.hpp"

#include "foldopt/error.hpp"

#include <algorithm>
#include <limits>

namespace foldopt {

FoldTarget make_target(const TriangleMesh& mesh) {
  mesh.validate();
  return {mesh, total_area(mesh), false};
}

double dissimilarity(const FoldTarget& target, const TriangleMesh& simulated) {
  const TriangleMesh& t = target.target_mesh;
  if (t.triangles.size() != simulated.triangles.size())
    throw InputError("dissimilarity: triangle counts differ (" + std::to_string(t.triangles.size()) + " vs " +
                     std::to_string(simulated.triangles.size()) + ")");
  if (!(target.total_area > 0.0)) throw InputError("dissimilarity: target has zero area");
  // Weighted by target triangle areas.
  const auto y = triangle_metrics(t);
  const auto q = triangle_metrics(simulated);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (q[i].barycenter - y[i].barycenter).norm() * y[i].area;
  return sum / target.total_area;
}

FoldTarget make_fold_target(const TriangleMesh& mesh, const Line2D& fold_line, FoldSide side, double layer_gap) {
  mesh.validate();
  if (!(fold_line.direction.norm() > 0.0)) throw InputError("make_fold_target: degenerate fold line");
  if (!(layer_gap >= 0.0)) throw InputError("make_fold_target: negative layer gap");

  const double sign = side == FoldSide::Left ? 1.0 : -1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double z_top = -lo;
  for (const Vec3& p : mesh.vertices) {
    const double d = sign * fold_line.signed_distance(xy(p));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    z_top = std::max(z_top, p.z());
  }
  FoldTarget out;
  out.target_mesh = mesh;
  if (!(hi > 0.0) || !(lo < 0.0)) {
    out.identity = true;
    out.total_area = total_area(mesh);
    return out;
  }
  for (Vec3& p : out.target_mesh.vertices) {
    if (sign * fold_line.signed_distance(xy(p)) <= 0.0) continue;
    const Vec2 r = fold_line.reflect(xy(p));
    p = Vec3(r.x(), r.y(), 2.0 * z_top - p.z() + layer_gap);
  }
  out.total_area = total_area(out.target_mesh);
  return out;
}

CostReport cost_report(const FoldTarget& target, const TriangleMesh& simulated,
                       std::span<const BezierTrajectory> arms, double alpha, double arc_tolerance) {
  if (!(alpha >= 0.0)) throw InputError("cost: alpha must be non-negative");
  CostReport r;
  r.alpha = alpha;
  for (const BezierTrajectory& a : arms) r.length += arc_length(a, arc_tolerance);
  r.dissimilarity = dissimilarity(target, simulated);
  r.cost = r.length + alpha * r.dissimilarity;
  r.squared_cost = r.cost * r.cost;
  return r;
}

CostReport diverged_report(double alpha) {
  const double inf = std::numeric_limits<double>::infinity();
  return {inf, inf, inf, inf, alpha, true};
}

}  // namespace foldopt
