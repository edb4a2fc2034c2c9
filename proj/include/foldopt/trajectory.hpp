#pragma once

#include "foldopt/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace foldopt {

/// Cubic Bezier arm trajectory. P0 and P3 are the grasp start and target.
struct BezierTrajectory {
  std::array<Vec3, 4> control_points;

  const Vec3& start() const { return control_points[0]; }
  const Vec3& end() const { return control_points[3]; }
};

constexpr double kDefaultLift = 1.0 / 3.0;
constexpr double kDefaultArcTolerance = 1e-6;

/// Bernstein-weighted sum; u must lie in [0, 1].
Vec3 evaluate(const BezierTrajectory& traj, double u);
/// dT/du.
Vec3 derivative(const BezierTrajectory& traj, double u);

/// Interior control points at thirds of P0P3 lifted by h * |P0 - P3| along +z.
BezierTrajectory initialize(const Vec3& p0, const Vec3& p3, double h = kDefaultLift);

/// De Casteljau split at u in (0, 1).
std::pair<BezierTrajectory, BezierTrajectory> split(const BezierTrajectory& traj, double u);

/// Recursive halving until each piece's control polygon exceeds its chord by
/// less than its share of `tol` (tol times its parameter width); each piece
/// contributes (2 chord + polygon) / 3.
double arc_length(const BezierTrajectory& traj, double tol = kDefaultArcTolerance);

/// Height of the curve above the chord P0P3, maximized over a uniform sample.
double apex_height(const BezierTrajectory& traj, int samples = 101);

// Optimization variable: (P1, P2) of every arm stacked into one vector of
// length 6 * arms.
Eigen::VectorXd pack(std::span<const BezierTrajectory> arms);
std::vector<BezierTrajectory> unpack(const Eigen::VectorXd& x, std::span<const std::pair<Vec3, Vec3>> endpoints);

}  // namespace foldopt
