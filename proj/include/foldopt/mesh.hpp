#pragma once

#include "foldopt/geometry.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace foldopt {

/// Closed loop of 2D points in meters. The closing edge is implicit.
struct Polygon2D {
  std::vector<Vec2> points;

  double signed_area() const;
  double perimeter() const;
  bool is_simple() const;
  bool contains(const Vec2& p) const;
  /// Distance from p to the nearest polygon edge.
  double boundary_distance(const Vec2& p) const;
  /// Copy with counterclockwise orientation.
  Polygon2D counterclockwise() const;
};

using Triangle = std::array<std::size_t, 3>;

/// Triangulated garment. A two-sided mesh stores the top layer in the first
/// half of `vertices`/`triangles` and its mirror in the second half, so that
/// vertex i and vertex i + n/2 are opposing copies and triangle k + T/2 is
/// triangle k with reversed winding.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> rest_vertices;
  bool two_sided = false;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  /// Vertices per layer (all vertices for a single-sided mesh).
  std::size_t layer_vertex_count() const { return two_sided ? vertices.size() / 2 : vertices.size(); }
  std::size_t layer_triangle_count() const { return two_sided ? triangles.size() / 2 : triangles.size(); }
  /// The opposing copy of vertex v on a two-sided mesh; v itself otherwise.
  std::size_t mirror_of(std::size_t v) const;

  /// Throws InputError when an invariant is violated.
  void validate() const;
};

struct TriangleMetric {
  Vec3 barycenter;
  double area;
};

constexpr double kDefaultLayerOffset = 1e-3;

/// Planar mesh at z = 0 covering the polygon: the boundary is resampled at
/// spacing <= target_edge, a regular interior grid is added, and the point set
/// is triangulated with a conforming Delaunay triangulation.
TriangleMesh triangulate_contour(const Polygon2D& contour, double target_edge);

/// Adds a mirrored, reversed layer displaced by `offset` below the mesh.
TriangleMesh mirror_two_sided(const TriangleMesh& mesh, double offset = kDefaultLayerOffset);

std::vector<TriangleMetric> triangle_metrics(const TriangleMesh& mesh);
double total_area(const TriangleMesh& mesh);
double rest_area(const TriangleMesh& mesh, std::size_t triangle);

/// Top-layer vertices lying on the open boundary of the layer, sorted.
std::vector<std::size_t> boundary_vertices(const TriangleMesh& mesh);

/// Structural test for the two-sided layout described on TriangleMesh.
bool has_two_sided_layout(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles);

Vec3 centroid(const std::vector<Vec3>& points);
/// Axis-aligned bounding box diagonal of the current vertex positions.
double bounding_diagonal(const TriangleMesh& mesh);

/// Applies p -> scale * p + translation to current and rest positions.
TriangleMesh transformed(const TriangleMesh& mesh, double scale, const Vec3& translation);

// OBJ subset: `v x y z` and `f i j k` lines, 1-based indices.
void write_obj(std::ostream& out, const TriangleMesh& mesh);
TriangleMesh read_obj(std::istream& in);
void save_obj(const std::string& path, const TriangleMesh& mesh);
TriangleMesh load_obj(const std::string& path);

}  // namespace foldopt
