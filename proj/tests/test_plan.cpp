#include "foldopt/error.hpp"
#include "foldopt/fixtures.hpp"
#include "foldopt/plan.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace foldopt;

namespace {

const GarmentCategory kAll[] = {GarmentCategory::Towel, GarmentCategory::Shirt, GarmentCategory::Pants};

std::vector<PlanStep> builtin_steps(GarmentCategory c) {
  const Fixture f = make_fixture(c);
  return instantiate(f.plan, f.keypoints, desk_mesh(c));
}

}  // namespace

TEST(BuiltinPlan, StepCounts) {
  EXPECT_EQ(builtin_plan(GarmentCategory::Towel).steps.size(), 2u);
  EXPECT_EQ(builtin_plan(GarmentCategory::Shirt).steps.size(), 3u);
  EXPECT_EQ(builtin_plan(GarmentCategory::Pants).steps.size(), 2u);
  for (GarmentCategory c : kAll) {
    const FoldPlan p = builtin_plan(c);
    EXPECT_EQ(p.category, c);
    for (const FoldStepSpec& s : p.steps) {
      EXPECT_GE(s.arms(), 1);
      EXPECT_LE(s.arms(), 2);
      EXPECT_EQ(s.targets.size(), s.grasp_keypoints.size());
    }
  }
}

TEST(BuiltinPlan, ReferencesExistInTemplates) {
  for (GarmentCategory c : kAll) {
    const auto features = garment_template(c).features();
    for (const FoldStepSpec& s : builtin_plan(c).steps) {
      for (const auto& id : s.grasp_keypoints) EXPECT_EQ(features.count(id), 1u) << id;
      for (const auto& e : s.targets)
        for (const auto& id : expression_references(e)) EXPECT_EQ(features.count(id), 1u) << id;
    }
  }
}

TEST(Instantiate, TowelFirstStepCarriesTopCornersToBottomCorners) {
  const Fixture f = make_fixture(GarmentCategory::Towel);
  const TriangleMesh mesh = desk_mesh(GarmentCategory::Towel);
  const auto steps = instantiate(f.plan, f.keypoints, mesh);
  ASSERT_EQ(steps.size(), 2u);
  const PlanStep& s = steps[0];
  ASSERT_EQ(s.arms(), 2);
  EXPECT_LE((s.grasp_points[0] - f.keypoints.at("corner_top_left")).norm(), 1e-12);
  EXPECT_LE((s.grasp_points[1] - f.keypoints.at("corner_top_right")).norm(), 1e-12);
  EXPECT_LE((s.target_points[0] - f.keypoints.at("corner_bottom_left")).norm(), 1e-12);
  EXPECT_LE((s.target_points[1] - f.keypoints.at("corner_bottom_right")).norm(), 1e-12);
  for (int a = 0; a < 2; ++a) {
    EXPECT_LE((xy(s.start[a]) - s.grasp_points[a]).norm(), 0.03);
    EXPECT_LE((xy(s.end[a]) - s.target_points[a]).norm(), 0.03);
    EXPECT_GT(s.end[a].z(), s.start[a].z() - 1e-12);
    EXPECT_LT(s.grasp_vertices[a], mesh.vertex_count());
  }
}

TEST(Instantiate, ReflectionConsistency) {
  for (GarmentCategory c : kAll)
    for (const PlanStep& s : builtin_steps(c))
      for (int a = 0; a < s.arms(); ++a) {
        EXPECT_GT(s.fold_line.signed_distance(s.grasp_points[a]) * (s.side == FoldSide::Left ? 1 : -1), 0.0);
        EXPECT_LE((s.fold_line.reflect(s.grasp_points[a]) - s.target_points[a]).norm(), kPlanReflectionTolerance)
            << to_string(c) << " step " << s.index + 1 << " arm " << a;
      }
}

TEST(Instantiate, Deterministic) {
  const auto a = builtin_steps(GarmentCategory::Shirt), b = builtin_steps(GarmentCategory::Shirt);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].index, k);
    EXPECT_EQ(a[k].grasp_vertices, b[k].grasp_vertices);
    EXPECT_EQ(a[k].end, b[k].end);
  }
}

TEST(Instantiate, UnresolvedKeypointNamed) {
  const Fixture f = make_fixture(GarmentCategory::Towel);
  FoldPlan p = f.plan;
  p.steps[0].targets[0] = "midpoint(corner_bottom_left, no_such_corner)";
  try {
    instantiate(p, f.keypoints, desk_mesh(GarmentCategory::Towel));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("no_such_corner"), std::string::npos);
  }
}

TEST(Expressions, Evaluate) {
  const Keypoints k{{"a", {0, 0}}, {"b", {2, 0}}, {"c", {1, 1}}};
  EXPECT_EQ(evaluate_target("c", k), Vec2(1, 1));
  EXPECT_EQ(evaluate_target("midpoint(a, b)", k), Vec2(1, 0));
  EXPECT_EQ(evaluate_target("lerp(a, b, 0.25)", k), Vec2(0.5, 0));
  EXPECT_NEAR((evaluate_target("reflect(c, a, b)", k) - Vec2(1, -1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((evaluate_target("midpoint(reflect(c, a, b), c)", k) - Vec2(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(expression_references("lerp(a, midpoint(b, c), 0.5)"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_THROW(evaluate_target("midpoint(a)", k), InputError);
  EXPECT_THROW(evaluate_target("lerp(a, b", k), InputError);
}

TEST(PlanJson, RoundTrip) {
  for (GarmentCategory c : kAll) {
    const FoldPlan p = builtin_plan(c);
    const FoldPlan q = plan_from_json(plan_to_json(p));
    EXPECT_EQ(q.category, p.category);
    ASSERT_EQ(q.steps.size(), p.steps.size());
    for (std::size_t k = 0; k < p.steps.size(); ++k) {
      EXPECT_EQ(q.steps[k].grasp_keypoints, p.steps[k].grasp_keypoints);
      EXPECT_EQ(q.steps[k].targets, p.steps[k].targets);
    }
  }
  EXPECT_THROW(plan_from_json(R"({"category": "towel", "steps": []})"), InputError);
  EXPECT_THROW(plan_from_json(R"({"category": "sock", "steps": [{"grasp_keypoints": ["a"], "target": ["b"]}]})"),
               InputError);
}

TEST(FoldLine, PerpendicularBisector) {
  const Line2D l = fold_line_for({{0, 1}}, {{0, -1}});
  EXPECT_NEAR(l.signed_distance({0, 0}), 0.0, 1e-15);
  EXPECT_GT(l.signed_distance({0, 1}), 0.0);
  EXPECT_NEAR((l.reflect({0, 1}) - Vec2(0, -1)).norm(), 0.0, 1e-15);
}

TEST(GraspVertex, HighestAmongNearest) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {0.001, 0, 0.01}, {0.5, 0, 0}};
  m.rest_vertices = m.vertices;
  m.triangles = {{0, 2, 1}};
  EXPECT_EQ(pick_grasp_vertex(m, {0, 0}), 1u);
  EXPECT_EQ(pick_grasp_vertex(m, {0.45, 0}), 2u);
}

TEST(FoldKeypoints, ReflectsTheLiftedSide) {
  const Keypoints k{{"a", {0, 1}}, {"b", {0, -1}}};
  const Keypoints f = fold_keypoints(k, Line2D{{0, 0}, {1, 0}}, FoldSide::Left);
  EXPECT_NEAR((f.at("a") - Vec2(0, -1)).norm(), 0.0, 1e-15);
  EXPECT_EQ(f.at("b"), Vec2(0, -1));
}

TEST(ScaleTrajectory, Identity) {
  const BezierTrajectory t = initialize({0.1, 0.2, 0.0}, {-0.3, 0.4, 0.01}, 0.3);
  const BezierTrajectory s = scale_trajectory(t, t.start(), t.end());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR((s.control_points[i] - t.control_points[i]).norm(), 0.0, 1e-15);
}

TEST(ScaleTrajectory, DoubledGarmentDoublesLength) {
  const BezierTrajectory t = initialize({0.1, 0.2, 0.0}, {-0.3, 0.4, 0.0}, 0.3);
  const BezierTrajectory s = scale_trajectory(t, 2.0 * t.start(), 2.0 * t.end());
  EXPECT_NEAR(arc_length(s, 2.0 * kDefaultArcTolerance), 2.0 * arc_length(t), 1e-12);
  EXPECT_NEAR(apex_height(s) / (s.end() - s.start()).norm(), apex_height(t) / (t.end() - t.start()).norm(), 1e-12);
}

TEST(ScaleTrajectory, RotatesAboutVertical) {
  const BezierTrajectory t = initialize({0, 0, 0}, {1, 0, 0}, 0.25);
  const BezierTrajectory s = scale_trajectory(t, {0, 0, 0}, {0, 2, 0});
  EXPECT_NEAR((s.control_points[1] - Vec3(0, 2.0 / 3, 0.5)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((s.control_points[2] - Vec3(0, 4.0 / 3, 0.5)).norm(), 0.0, 1e-12);
}

TEST(ScaleTrajectory, Composes) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    BezierTrajectory t;
    for (Vec3& p : t.control_points) p = Vec3(u(rng), u(rng), 0.2 * u(rng));
    t.control_points[3].z() = t.control_points[0].z();
    const double s1 = 1.0 + 0.5 * u(rng), s2 = 1.0 + 0.5 * u(rng);
    const Vec3 b0(u(rng), u(rng), 0.0), c0(u(rng), u(rng), 0.0);
    const Eigen::AngleAxisd r1(u(rng), Vec3::UnitZ()), r2(u(rng), Vec3::UnitZ());
    const Vec3 b3 = b0 + s1 * (r1 * (t.end() - t.start()));
    const Vec3 c3 = c0 + s2 * (r2 * (b3 - b0));
    const BezierTrajectory ab = scale_trajectory(t, b0, b3);
    const BezierTrajectory abc = scale_trajectory(ab, c0, c3);
    const BezierTrajectory ac = scale_trajectory(t, c0, c3);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR((abc.control_points[i] - ac.control_points[i]).norm(), 0.0, 1e-9);
  }
}

TEST(ScaleTrajectory, RejectsDegenerateEndpoints) {
  const BezierTrajectory t = initialize({0, 0, 0}, {1, 0, 0});
  EXPECT_THROW(scale_trajectory(t, {1, 1, 0}, {1, 1, 0}), InputError);
}
