#include "foldopt/mesh.hpp"

#include "foldopt/delaunay.hpp"
#include "foldopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace foldopt {

namespace {

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) &&
           std::min(p.y(), q.y()) <= r.y() && r.y() <= std::max(p.y(), q.y());
  };
  if (d1 == 0 && on_segment(a, b, c)) return true;
  if (d2 == 0 && on_segment(a, b, d)) return true;
  if (d3 == 0 && on_segment(c, d, a)) return true;
  if (d4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

double Polygon2D::signed_area() const {
  double a = 0.0;
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(points[i], points[(i + 1) % n]);
  return 0.5 * a;
}

double Polygon2D::perimeter() const {
  double len = 0.0;
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) len += (points[(i + 1) % n] - points[i]).norm();
  return len;
}

bool Polygon2D::is_simple() const {
  const std::size_t n = points.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if ((points[(i + 1) % n] - points[i]).norm() == 0.0) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]))
        return false;
    }
  }
  return std::abs(signed_area()) > 0.0;
}

bool Polygon2D::contains(const Vec2& p) const {
  bool inside = false;
  const std::size_t n = points.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = points[i];
    const Vec2& b = points[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

double Polygon2D::boundary_distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, segment_distance(p, points[i], points[(i + 1) % n]));
  return best;
}

Polygon2D Polygon2D::counterclockwise() const {
  Polygon2D out = *this;
  if (out.signed_area() < 0.0) std::reverse(out.points.begin(), out.points.end());
  return out;
}

std::size_t TriangleMesh::mirror_of(std::size_t v) const {
  if (!two_sided) return v;
  const std::size_t half = vertices.size() / 2;
  return v < half ? v + half : v - half;
}

void TriangleMesh::validate() const {
  if (rest_vertices.size() != vertices.size())
    throw InputError("mesh: rest_vertices and vertices differ in length");
  const std::size_t n = vertices.size();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    for (std::size_t v : tri)
      if (v >= n) throw InputError("mesh: triangle " + std::to_string(t) + " has an invalid index");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw InputError("mesh: triangle " + std::to_string(t) + " repeats a vertex");
    if (!(rest_area(*this, t) > 0.0))
      throw InputError("mesh: triangle " + std::to_string(t) + " has zero rest area");
  }
  for (const Vec3& p : vertices)
    if (!p.allFinite()) throw InputError("mesh: non-finite vertex");
}

TriangleMesh triangulate_contour(const Polygon2D& contour, double target_edge) {
  if (!(target_edge > 0.0)) throw InputError("triangulate_contour: target_edge must be positive");
  if (!contour.is_simple()) throw InputError("triangulate_contour: contour is not a simple polygon");
  const Polygon2D poly = contour.counterclockwise();

  std::vector<Vec2> loop;
  const std::size_t n = poly.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.points[i];
    const Vec2& b = poly.points[(i + 1) % n];
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a).norm() / target_edge - 1e-9)));
    for (std::size_t k = 0; k < pieces; ++k)
      loop.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(pieces)));
  }

  Vec2 lo = poly.points.front();
  Vec2 hi = poly.points.front();
  for (const Vec2& p : poly.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::vector<Vec2> interior;
  const double keep_out = 0.5 * target_edge;
  for (double y = lo.y() + target_edge; y < hi.y() - 0.25 * target_edge; y += target_edge) {
    for (double x = lo.x() + target_edge; x < hi.x() - 0.25 * target_edge; x += target_edge) {
      const Vec2 p(x, y);
      if (poly.contains(p) && poly.boundary_distance(p) >= keep_out) interior.push_back(p);
    }
  }

  delaunay::ConformingResult tri = delaunay::triangulate_conforming(loop, interior);
  Polygon2D dense;
  for (std::size_t idx : tri.loop) dense.points.push_back(tri.points[idx]);

  TriangleMesh mesh;
  mesh.vertices.reserve(tri.points.size());
  for (const Vec2& p : tri.points) mesh.vertices.emplace_back(p.x(), p.y(), 0.0);
  for (const auto& t : tri.triangles) {
    const Vec2 c = (tri.points[t[0]] + tri.points[t[1]] + tri.points[t[2]]) / 3.0;
    if (!dense.contains(c)) continue;
    if (delaunay::orient(tri.points[t[0]], tri.points[t[1]], tri.points[t[2]]) <= 0.0) continue;
    mesh.triangles.push_back({t[0], t[1], t[2]});
  }

  // Drop points that ended up unreferenced and compact indices.
  std::vector<std::size_t> remap(mesh.vertices.size(), static_cast<std::size_t>(-1));
  std::vector<Vec3> used;
  for (auto& t : mesh.triangles)
    for (auto& v : t) {
      if (remap[v] == static_cast<std::size_t>(-1)) {
        remap[v] = used.size();
        used.push_back(mesh.vertices[v]);
      }
    }
  // Keep the original point order so output stays independent of triangle order.
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < remap.size(); ++v)
    if (remap[v] != static_cast<std::size_t>(-1)) order.push_back(v);
  std::vector<std::size_t> final_index(remap.size(), 0);
  std::vector<Vec3> verts;
  for (std::size_t k = 0; k < order.size(); ++k) {
    final_index[order[k]] = k;
    verts.push_back(mesh.vertices[order[k]]);
  }
  for (auto& t : mesh.triangles)
    for (auto& v : t) v = final_index[v];
  mesh.vertices = std::move(verts);
  mesh.rest_vertices = mesh.vertices;
  mesh.validate();
  return mesh;
}

TriangleMesh mirror_two_sided(const TriangleMesh& mesh, double offset) {
  if (mesh.two_sided) throw InputError("mirror_two_sided: mesh is already two-sided");
  if (offset < 0.0) throw InputError("mirror_two_sided: negative offset");
  for (const Vec3& p : mesh.vertices)
    if (p.z() != mesh.vertices.front().z()) throw InputError("mirror_two_sided: mesh is not planar");

  TriangleMesh out = mesh;
  const std::size_t n = mesh.vertices.size();
  const Vec3 shift(0.0, 0.0, -offset);
  for (std::size_t i = 0; i < n; ++i) {
    out.vertices.push_back(mesh.vertices[i] + shift);
    out.rest_vertices.push_back(mesh.rest_vertices[i] + shift);
  }
  for (const Triangle& t : mesh.triangles) out.triangles.push_back({t[0] + n, t[2] + n, t[1] + n});
  out.two_sided = true;
  return out;
}

std::vector<TriangleMetric> triangle_metrics(const TriangleMesh& mesh) {
  std::vector<TriangleMetric> out;
  out.reserve(mesh.triangles.size());
  for (const Triangle& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    out.push_back({(a + b + c) / 3.0, 0.5 * (b - a).cross(c - a).norm()});
  }
  return out;
}

double total_area(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (const TriangleMetric& m : triangle_metrics(mesh)) sum += m.area;
  return sum;
}

double rest_area(const TriangleMesh& mesh, std::size_t triangle) {
  const Triangle& t = mesh.triangles[triangle];
  const Vec3& a = mesh.rest_vertices[t[0]];
  const Vec3& b = mesh.rest_vertices[t[1]];
  const Vec3& c = mesh.rest_vertices[t[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

std::vector<std::size_t> boundary_vertices(const TriangleMesh& mesh) {
  std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
  const std::size_t tris = mesh.layer_triangle_count();
  for (std::size_t k = 0; k < tris; ++k) {
    const Triangle& t = mesh.triangles[k];
    for (int e = 0; e < 3; ++e) {
      std::size_t a = t[e];
      std::size_t b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  std::set<std::size_t> out;
  for (const auto& [edge, count] : edge_count)
    if (count == 1) {
      out.insert(edge.first);
      out.insert(edge.second);
    }
  return {out.begin(), out.end()};
}

bool has_two_sided_layout(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles) {
  if (vertices.empty() || vertices.size() % 2 != 0 || triangles.empty() || triangles.size() % 2 != 0)
    return false;
  const std::size_t n = vertices.size() / 2;
  const std::size_t t = triangles.size() / 2;
  for (std::size_t k = 0; k < t; ++k) {
    const Triangle& a = triangles[k];
    const Triangle& b = triangles[k + t];
    if (a[0] >= n || a[1] >= n || a[2] >= n) return false;
    if (b[0] != a[0] + n || b[1] != a[2] + n || b[2] != a[1] + n) return false;
  }
  return true;
}

Vec3 centroid(const std::vector<Vec3>& points) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  return points.empty() ? c : Vec3(c / static_cast<double>(points.size()));
}

double bounding_diagonal(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = mesh.vertices.front();
  for (const Vec3& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

TriangleMesh transformed(const TriangleMesh& mesh, double scale, const Vec3& translation) {
  TriangleMesh out = mesh;
  for (Vec3& p : out.vertices) p = scale * p + translation;
  for (Vec3& p : out.rest_vertices) p = scale * p + translation;
  return out;
}

}  // namespace foldopt
