#include "foldopt/trajectory.hpp"

#include "foldopt/error.hpp"

#include <algorithm>

namespace foldopt {

Vec3 evaluate(const BezierTrajectory& traj, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw InputError("evaluate: curve parameter outside [0, 1]");
  if (u == 0.0) return traj.control_points[0];
  if (u == 1.0) return traj.control_points[3];
  const double v = 1.0 - u;
  const auto& p = traj.control_points;
  return v * v * v * p[0] + 3.0 * v * v * u * p[1] + 3.0 * v * u * u * p[2] + u * u * u * p[3];
}

Vec3 derivative(const BezierTrajectory& traj, double u) {
  const double v = 1.0 - u;
  const auto& p = traj.control_points;
  return 3.0 * v * v * (p[1] - p[0]) + 6.0 * v * u * (p[2] - p[1]) + 3.0 * u * u * (p[3] - p[2]);
}

BezierTrajectory initialize(const Vec3& p0, const Vec3& p3, double h) {
  const double span = (p0 - p3).norm();
  if (!(span > 0.0)) throw InputError("initialize: coincident endpoints");
  const Vec3 lift = h * span * Vec3::UnitZ();
  return {{p0, (2.0 / 3.0) * p0 + (1.0 / 3.0) * p3 + lift, (1.0 / 3.0) * p0 + (2.0 / 3.0) * p3 + lift, p3}};
}

std::pair<BezierTrajectory, BezierTrajectory> split(const BezierTrajectory& traj, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InputError("split: parameter must lie in (0, 1)");
  const auto& p = traj.control_points;
  const Vec3 p01 = p[0] + u * (p[1] - p[0]);
  const Vec3 p12 = p[1] + u * (p[2] - p[1]);
  const Vec3 p23 = p[2] + u * (p[3] - p[2]);
  const Vec3 p012 = p01 + u * (p12 - p01);
  const Vec3 p123 = p12 + u * (p23 - p12);
  const Vec3 mid = p012 + u * (p123 - p012);
  return {BezierTrajectory{{p[0], p01, p012, mid}}, BezierTrajectory{{mid, p123, p23, p[3]}}};
}

namespace {

double arc_length_rec(const BezierTrajectory& t, double tol, int depth) {
  const auto& p = t.control_points;
  const double chord = (p[3] - p[0]).norm();
  const double poly = (p[1] - p[0]).norm() + (p[2] - p[1]).norm() + (p[3] - p[2]).norm();
  // Each piece gets its share of tol by parameter width.
  if (poly - chord < tol || depth >= 48) return (2.0 * chord + poly) / 3.0;
  const auto [left, right] = split(t, 0.5);
  return arc_length_rec(left, 0.5 * tol, depth + 1) + arc_length_rec(right, 0.5 * tol, depth + 1);
}

}  // namespace

double arc_length(const BezierTrajectory& traj, double tol) {
  if (!(tol > 0.0)) throw InputError("arc_length: tolerance must be positive");
  return arc_length_rec(traj, tol, 0);
}

double apex_height(const BezierTrajectory& traj, int samples) {
  const Vec3& a = traj.start();
  const Vec3& b = traj.end();
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = static_cast<double>(i) / (samples - 1);
    const Vec3 p = evaluate(traj, u);
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::max(best, (p - (a + s * ab)).norm());
  }
  return best;
}

Eigen::VectorXd pack(std::span<const BezierTrajectory> arms) {
  Eigen::VectorXd x(6 * arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    x.segment<3>(6 * a) = arms[a].control_points[1];
    x.segment<3>(6 * a + 3) = arms[a].control_points[2];
  }
  return x;
}

std::vector<BezierTrajectory> unpack(const Eigen::VectorXd& x, std::span<const std::pair<Vec3, Vec3>> endpoints) {
  if (x.size() % 6 != 0) throw InputError("unpack: variable length must be divisible by 6");
  if (static_cast<std::size_t>(x.size()) != 6 * endpoints.size())
    throw InputError("unpack: variable length does not match the arm count");
  std::vector<BezierTrajectory> out;
  for (std::size_t a = 0; a < endpoints.size(); ++a)
    out.push_back({{endpoints[a].first, x.segment<3>(6 * a), x.segment<3>(6 * a + 3), endpoints[a].second}});
  return out;
}

}  // namespace foldopt
