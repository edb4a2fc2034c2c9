#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace foldopt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Vec2 xy(const Vec3& p) { return {p.x(), p.y()}; }

/// A directed line in the table plane. Points with positive signed distance
/// lie to the left of `direction`.
struct Line2D {
  Vec2 point = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();

  Vec2 unit_direction() const { return direction.normalized(); }
  Vec2 left_normal() const {
    const Vec2 d = unit_direction();
    return {-d.y(), d.x()};
  }
  double signed_distance(const Vec2& p) const { return left_normal().dot(p - point); }
  Vec2 reflect(const Vec2& p) const { return p - 2.0 * signed_distance(p) * left_normal(); }
};

}  // namespace foldopt
