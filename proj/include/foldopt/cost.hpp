#pragma once

#include "foldopt/mesh.hpp"
#include "foldopt/trajectory.hpp"

#include <span>

namespace foldopt {

constexpr double kDefaultAlpha = 1e3;
constexpr double kDefaultLayerGap = 2e-3;

/// Desired folded shape S_t. Triangles correspond by index to the simulated
/// garment.
struct FoldTarget {
  TriangleMesh target_mesh;
  /// Sum of current triangle areas of target_mesh, both sides.
  double total_area = 0.0;
  /// Set when the fold line missed the garment and the target is the input.
  bool identity = false;
};

struct CostReport {
  double length = 0.0;
  double dissimilarity = 0.0;
  double cost = 0.0;
  double squared_cost = 0.0;
  double alpha = kDefaultAlpha;
  /// The simulation blew up; cost fields are infinite.
  bool diverged = false;
};

FoldTarget make_target(const TriangleMesh& mesh);

/// Area-weighted mean distance between corresponding triangle barycenters.
double dissimilarity(const FoldTarget& target, const TriangleMesh& simulated);

/// Which half-plane of the fold line is lifted over: Left means positive
/// signed distance.
enum class FoldSide { Left, Right };

/// Reflects the selected half across `fold_line` and stacks it upside down on
/// top of the rest, `layer_gap` above the highest vertex.
FoldTarget make_fold_target(const TriangleMesh& mesh, const Line2D& fold_line, FoldSide side,
                            double layer_gap = kDefaultLayerGap);

/// l_x (summed per-arm arc length) + alpha * D for an already simulated mesh.
CostReport cost_report(const FoldTarget& target, const TriangleMesh& simulated,
                       std::span<const BezierTrajectory> arms, double alpha,
                       double arc_tolerance = kDefaultArcTolerance);

CostReport diverged_report(double alpha);

}  // namespace foldopt
