#include "foldopt/trajectory.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace foldopt;

namespace {

BezierTrajectory curve(Vec3 a, Vec3 b, Vec3 c, Vec3 d) { return BezierTrajectory{{a, b, c, d}}; }

}  // namespace

TEST(Bezier, EndpointsExact) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const BezierTrajectory t = test::random_curve(rng);
    EXPECT_EQ(evaluate(t, 0.0), t.start());
    EXPECT_EQ(evaluate(t, 1.0), t.end());
  }
}

TEST(Bezier, HandBernsteinSum) {
  const auto t = curve({0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0});
  EXPECT_NEAR((evaluate(t, 0.5) - Vec3(0.5, 0.75, 0.0)).norm(), 0.0, 1e-15);
}

TEST(Bezier, PointCurve) {
  const Vec3 p(0.2, -0.4, 1.5);
  const auto t = curve(p, p, p, p);
  for (double u : {0.0, 0.1, 0.5, 0.77, 1.0}) EXPECT_NEAR((evaluate(t, u) - p).norm(), 0.0, 1e-15);
  EXPECT_EQ(arc_length(t), 0.0);
}

TEST(Bezier, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(2);
  const BezierTrajectory t = test::random_curve(rng);
  for (double u : {0.1, 0.4, 0.9}) {
    const Vec3 fd = (evaluate(t, u + 1e-6) - evaluate(t, u - 1e-6)) / 2e-6;
    EXPECT_NEAR((derivative(t, u) - fd).norm(), 0.0, 1e-7);
  }
}

TEST(Initialize, ThirdsLiftedByH) {
  const auto t = initialize({0, 0, 0}, {3, 0, 0}, 1.0 / 3.0);
  EXPECT_NEAR((t.control_points[1] - Vec3(1, 0, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((t.control_points[2] - Vec3(2, 0, 1)).norm(), 0.0, 1e-15);
  const auto v = initialize({0, 0, 0}, {0, 4, 0}, 0.5);
  EXPECT_NEAR((v.control_points[1] - Vec3(0, 4.0 / 3, 2)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((v.control_points[2] - Vec3(0, 8.0 / 3, 2)).norm(), 0.0, 1e-15);
}

TEST(Initialize, ZeroLiftIsCollinear) {
  const Vec3 a(0.1, 0.2, 0.0), b(-0.5, 0.4, 0.3);
  const auto t = initialize(a, b, 0.0);
  for (int i : {1, 2}) EXPECT_NEAR((t.control_points[i] - a).cross(b - a).norm(), 0.0, 1e-15);
}

TEST(Initialize, ApexIsThreeQuartersOfLift) {
  const Vec3 a(0, 0, 0), b(0.3, 0.1, 0);
  const auto t = initialize(a, b, kDefaultLift);
  EXPECT_NEAR(apex_height(t), 0.75 * kDefaultLift * (b - a).norm(), 1e-12);
}

TEST(Split, EndpointsAndContinuity) {
  std::mt19937_64 rng(3);
  const BezierTrajectory t = test::random_curve(rng);
  const auto [l, r] = split(t, 0.5);
  EXPECT_EQ(l.start(), t.start());
  EXPECT_EQ(r.end(), t.end());
  EXPECT_EQ(l.end(), r.start());
  EXPECT_NEAR((l.end() - evaluate(t, 0.5)).norm(), 0.0, 1e-15);
}

TEST(Split, PiecesReproduceCurve) {
  std::mt19937_64 rng(4);
  for (double s : {0.5, 0.3, 0.81}) {
    const BezierTrajectory t = test::random_curve(rng);
    const auto [l, r] = split(t, s);
    for (int i = 0; i <= 100; ++i) {
      const double u = i / 100.0;
      const Vec3 p = u <= s ? evaluate(l, u / s) : evaluate(r, (u - s) / (1 - s));
      EXPECT_LE((p - evaluate(t, u)).norm(), 1e-12) << "u = " << u;
    }
  }
}

TEST(Split, RejectsParametersOutsideOpenInterval) {
  const auto t = initialize({0, 0, 0}, {1, 0, 0});
  EXPECT_ANY_THROW(split(t, 0.0));
  EXPECT_ANY_THROW(split(t, 1.0));
}

TEST(ArcLength, StraightLine) {
  const auto t = curve({0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0});
  EXPECT_NEAR(arc_length(t), 3.0, 1e-9);
}

TEST(ArcLength, InitialArcMatchesQuadrature) {
  const auto t = initialize({0, 0, 0}, {3, 0, 0}, 1.0 / 3.0);
  EXPECT_NEAR(arc_length(t), test::quadrature_length(t), 1e-6);
}

TEST(ArcLength, RandomCurvesMatchQuadrature) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const BezierTrajectory t = test::random_curve(rng);
    EXPECT_NEAR(arc_length(t), test::quadrature_length(t), 1e-6) << "curve " << k;
  }
}

TEST(ArcLength, BoundedByChordAndControlPolygon) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const BezierTrajectory t = test::random_curve(rng);
    const auto& P = t.control_points;
    const double polygon = (P[1] - P[0]).norm() + (P[2] - P[1]).norm() + (P[3] - P[2]).norm();
    const double l = arc_length(t);
    EXPECT_GE(l, (P[3] - P[0]).norm() - 1e-12);
    EXPECT_LE(l, polygon + 1e-12);
  }
}

TEST(Bezier, InsideConvexHullBox) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const BezierTrajectory t = test::random_curve(rng);
    Vec3 lo = t.control_points[0], hi = lo;
    for (const Vec3& p : t.control_points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    for (int i = 0; i <= 50; ++i) {
      const Vec3 p = evaluate(t, i / 50.0);
      EXPECT_TRUE((p.array() >= lo.array() - 1e-12).all() && (p.array() <= hi.array() + 1e-12).all());
    }
  }
}

TEST(Pack, RoundTrip) {
  std::mt19937_64 rng(8);
  const std::vector<BezierTrajectory> arms{test::random_curve(rng), test::random_curve(rng)};
  const Eigen::VectorXd x = pack(arms);
  ASSERT_EQ(x.size(), 12);
  std::vector<std::pair<Vec3, Vec3>> ends;
  for (const auto& a : arms) ends.emplace_back(a.start(), a.end());
  const auto back = unpack(x, ends);
  for (std::size_t a = 0; a < arms.size(); ++a)
    for (int i = 0; i < 4; ++i) EXPECT_EQ(back[a].control_points[i], arms[a].control_points[i]);
}
