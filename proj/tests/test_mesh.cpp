#include "foldopt/error.hpp"
#include "foldopt/mesh.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace foldopt;

namespace {

double max_edge(const TriangleMesh& m) {
  double e = 0.0;
  for (const Triangle& t : m.triangles)
    for (int k = 0; k < 3; ++k) e = std::max(e, (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm());
  return e;
}

}  // namespace

TEST(Polygon, OrientationAndSimplicity) {
  const Polygon2D sq = test::square(1.0);
  EXPECT_DOUBLE_EQ(sq.signed_area(), 1.0);
  EXPECT_TRUE(sq.is_simple());
  const Polygon2D bow{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
  EXPECT_FALSE(bow.is_simple());
  Polygon2D cw{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  EXPECT_LT(cw.signed_area(), 0.0);
  EXPECT_GT(cw.counterclockwise().signed_area(), 0.0);
}

TEST(Triangulate, UnitSquareAreaConserved) {
  const TriangleMesh m = triangulate_contour(test::square(1.0), 1.0);
  EXPECT_NEAR(total_area(m), 1.0, 0.005);
  m.validate();
}

TEST(Triangulate, EdgesBoundedByTwiceTarget) {
  const TriangleMesh m = triangulate_contour(test::square(1.0), 0.1);
  EXPECT_LE(max_edge(m), 0.2);
  for (const Vec3& v : m.vertices) EXPECT_EQ(v.z(), 0.0);
}

TEST(Triangulate, LShapeMatchesShoelace) {
  const Polygon2D l{{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}};
  ASSERT_NEAR(l.signed_area(), 0.75, 1e-15);
  const TriangleMesh m = triangulate_contour(l, 0.1);
  EXPECT_NEAR(total_area(m), 0.75, 0.004);
}

TEST(Triangulate, BoundaryVerticesOnPolygon) {
  const Polygon2D l{{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}};
  const double edge = 0.07;
  const TriangleMesh m = triangulate_contour(l, edge);
  const auto b = boundary_vertices(m);
  ASSERT_FALSE(b.empty());
  for (std::size_t v : b) EXPECT_LE(l.boundary_distance(xy(m.vertices[v])), edge / 2);
}

TEST(Triangulate, Deterministic) {
  const Polygon2D l{{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}};
  const TriangleMesh a = triangulate_contour(l, 0.05), b = triangulate_contour(l, 0.05);
  ASSERT_EQ(a.vertices.size(), b.vertices.size());
  for (std::size_t i = 0; i < a.vertices.size(); ++i) EXPECT_EQ(a.vertices[i], b.vertices[i]);
  EXPECT_EQ(a.triangles, b.triangles);
}

TEST(Triangulate, CounterclockwiseTriangles) {
  const TriangleMesh m = triangulate_contour(test::square(1.0), 0.2);
  for (const Triangle& t : m.triangles) {
    const Vec3 n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
    EXPECT_GT(n.z(), 0.0);
  }
}

TEST(Triangulate, RejectsSelfIntersectingContour) {
  const Polygon2D bow{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
  EXPECT_THROW(triangulate_contour(bow, 0.1), InputError);
  EXPECT_THROW(triangulate_contour(test::square(1.0), 0.0), InputError);
}

TEST(Mirror, DoublesCounts) {
  const TriangleMesh m = triangulate_contour(test::square(1.0), 0.25);
  const TriangleMesh two = mirror_two_sided(m);
  EXPECT_EQ(two.triangle_count(), 2 * m.triangle_count());
  EXPECT_EQ(two.vertex_count(), 2 * m.vertex_count());
  EXPECT_TRUE(two.two_sided);
  EXPECT_TRUE(has_two_sided_layout(two.vertices, two.triangles));
}

TEST(Mirror, HundredTrianglesBecomeTwoHundred) {
  std::mt19937_64 rng(3);
  TriangleMesh m = triangulate_contour(test::square(1.0), 0.1);
  m.triangles.resize(100);
  std::set<std::size_t> used;
  for (const Triangle& t : m.triangles) used.insert(t.begin(), t.end());
  EXPECT_EQ(mirror_two_sided(m).triangle_count(), 200u);
}

TEST(Mirror, ZeroOffsetDoublesArea) {
  const TriangleMesh m = triangulate_contour(test::square(1.0), 0.25);
  EXPECT_NEAR(total_area(mirror_two_sided(m, 0.0)), 2.0 * total_area(m), 1e-12);
}

TEST(Mirror, LayerCentroidsSeparatedByOffset) {
  const TriangleMesh two = mirror_two_sided(triangulate_contour(test::square(1.0), 0.25), 2e-3);
  const std::size_t n = two.layer_vertex_count();
  const std::vector<Vec3> top(two.vertices.begin(), two.vertices.begin() + n);
  const std::vector<Vec3> bottom(two.vertices.begin() + n, two.vertices.end());
  EXPECT_NEAR(centroid(top).z() - centroid(bottom).z(), 2e-3, 1e-15);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(two.mirror_of(i), i + n);
}

TEST(Mirror, RejectsTwoSidedInput) {
  const TriangleMesh two = mirror_two_sided(triangulate_contour(test::square(1.0), 0.25));
  EXPECT_THROW(mirror_two_sided(two), InputError);
}

TEST(Metrics, RightTriangle) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.rest_vertices = m.vertices;
  m.triangles = {{0, 1, 2}};
  const auto t = triangle_metrics(m);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR((t[0].barycenter - Vec3(1.0 / 3, 1.0 / 3, 0)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(t[0].area, 0.5);
}

TEST(Metrics, TranslationMovesBarycenters) {
  std::mt19937_64 rng(11);
  const TriangleMesh m = test::random_mesh(rng, 10);
  const Vec3 d(0.3, -1.2, 2.0);
  const auto a = triangle_metrics(m), b = triangle_metrics(transformed(m, 1.0, d));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR((b[i].barycenter - a[i].barycenter - d).norm(), 0.0, 1e-12);
    EXPECT_NEAR(b[i].area, a[i].area, 1e-12);
  }
}

TEST(Metrics, AreasMatchCrossProductOracle) {
  std::mt19937_64 rng(12);
  const TriangleMesh m = test::random_mesh(rng, 10);
  double oracle = 0.0;
  for (const Triangle& t : m.triangles)
    oracle += 0.5 * (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).norm();
  double sum = 0.0;
  for (const auto& t : triangle_metrics(m)) sum += t.area;
  EXPECT_NEAR(sum, oracle, 1e-12);
}

TEST(Metrics, RigidMotionKeepsAreas) {
  std::mt19937_64 rng(13);
  TriangleMesh m = test::random_mesh(rng, 20);
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  TriangleMesh r = m;
  for (Vec3& v : r.vertices) v = R * v + Vec3(0.5, 0.1, -2);
  const auto a = triangle_metrics(m), b = triangle_metrics(r);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].area, b[i].area, 1e-12);
}

TEST(Validate, RejectsBrokenMeshes) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.rest_vertices = m.vertices;
  m.triangles = {{0, 1, 3}};
  EXPECT_THROW(m.validate(), InputError);
  m.triangles = {{0, 1, 1}};
  EXPECT_THROW(m.validate(), InputError);
  m.triangles = {{0, 1, 2}};
  m.rest_vertices.pop_back();
  EXPECT_THROW(m.validate(), InputError);
  m.rest_vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  EXPECT_THROW(m.validate(), InputError);
}

TEST(Obj, RoundTrip) {
  const TriangleMesh two = mirror_two_sided(triangulate_contour(test::square(0.3), 0.05));
  std::stringstream ss;
  write_obj(ss, two);
  const TriangleMesh back = read_obj(ss);
  EXPECT_EQ(back.triangles, two.triangles);
  ASSERT_EQ(back.vertices.size(), two.vertices.size());
  for (std::size_t i = 0; i < back.vertices.size(); ++i) EXPECT_EQ(back.vertices[i], two.vertices[i]);
  EXPECT_TRUE(back.two_sided);
}

TEST(Obj, RejectsUnsupportedRecords) {
  std::stringstream a("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3\n");
  EXPECT_THROW(read_obj(a), InputError);
  std::stringstream b("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n");
  EXPECT_THROW(read_obj(b), InputError);
  std::stringstream c("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  EXPECT_THROW(read_obj(c), InputError);
}
