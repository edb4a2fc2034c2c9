#pragma once

#include "foldopt/calibrate.hpp"
#include "foldopt/cost.hpp"
#include "foldopt/fixtures.hpp"
#include "foldopt/pipeline.hpp"
#include "foldopt/mesh.hpp"
#include "foldopt/trajectory.hpp"

#include <array>
#include <cmath>
#include <string>

#include <random>

namespace foldopt::test {

inline std::string fixture_path(const std::string& rel) { return std::string(FOLDOPT_FIXTURE_DIR) + "/" + rel; }

inline SimParams card_params(const std::string& garment) {
  return load_card(fixture_path("cards/" + garment + ".card.json")).apply(SimParams{});
}

// Scene of the first fold of a fixture on its flat desk mesh.
inline FoldScene first_step_scene(GarmentCategory c, const SimParams& params) {
  const Fixture f = make_fixture(c);
  const TriangleMesh mesh = desk_mesh(c);
  const SceneOptions opts{kDeskDuration, kDeskSettleTime};
  const auto steps = instantiate(f.plan, f.keypoints, mesh, opts.layer_gap);
  return plan_step_scene(mesh, params, steps.front(), opts);
}

inline Polygon2D square(double side, const Vec2& lo = Vec2::Zero()) {
  return Polygon2D{{lo, lo + Vec2(side, 0), lo + Vec2(side, side), lo + Vec2(0, side)}};
}

// Random soup of n triangles with positive area, single-sided.
inline TriangleMesh random_mesh(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TriangleMesh m;
  for (int k = 0; k < n; ++k) {
    Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    while ((b - a).cross(c - a).norm() < 1e-3) c = Vec3(u(rng), u(rng), u(rng));
    const std::size_t i = m.vertices.size();
    m.vertices.insert(m.vertices.end(), {a, b, c});
    m.triangles.push_back({i, i + 1, i + 2});
  }
  m.rest_vertices = m.vertices;
  return m;
}

inline BezierTrajectory random_curve(std::mt19937_64& rng, double extent = 1.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  BezierTrajectory t;
  for (Vec3& p : t.control_points) p = Vec3(u(rng), u(rng), u(rng));
  return t;
}

// Speed |T'(u)| straight from the Bernstein derivative.
inline double bezier_speed(const BezierTrajectory& t, double u) {
  const auto& P = t.control_points;
  const double v = 1.0 - u;
  return (3.0 * v * v * (P[1] - P[0]) + 6.0 * v * u * (P[2] - P[1]) + 3.0 * u * u * (P[3] - P[2])).norm();
}

inline double gauss_legendre5(const BezierTrajectory& t, double a, double b) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                           0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                           0.2369268850561891, 0.2369268850561891};
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * bezier_speed(t, m + h * x[i]);
  return s * h;
}

// Adaptive Gauss-Legendre quadrature of the speed.
inline double quadrature_length(const BezierTrajectory& t, double a = 0.0, double b = 1.0, double whole = -1.0,
                                int depth = 0) {
  if (whole < 0.0) whole = gauss_legendre5(t, a, b);
  const double m = 0.5 * (a + b);
  const double l = gauss_legendre5(t, a, m), r = gauss_legendre5(t, m, b);
  if (depth > 40 || std::abs(l + r - whole) < 1e-13) return l + r;
  return quadrature_length(t, a, m, l, depth + 1) + quadrature_length(t, m, b, r, depth + 1);
}

// Area-weighted barycenter distance written out per vertex.
inline double loop_dissimilarity(const TriangleMesh& target, const TriangleMesh& sim) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < target.triangles.size(); ++k) {
    const auto& t = target.triangles[k];
    const Vec3 &a = target.vertices[t[0]], &b = target.vertices[t[1]], &c = target.vertices[t[2]];
    const auto& s = sim.triangles[k];
    const Vec3 yc = (a + b + c) / 3.0;
    const Vec3 qc = (sim.vertices[s[0]] + sim.vertices[s[1]] + sim.vertices[s[2]]) / 3.0;
    const double area = 0.5 * (b - a).cross(c - a).norm();
    num += area * (qc - yc).norm();
    den += area;
  }
  return num / den;
}

}  // namespace foldopt::test
