#pragma once

#include "foldopt/geometry.hpp"

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace foldopt::delaunay {

using Triangle = std::array<std::size_t, 3>;

/// Incremental Bowyer-Watson triangulation. Output triangles are
/// counterclockwise and index into `points`.
std::vector<Triangle> triangulate(const std::vector<Vec2>& points);

/// Delaunay triangulation of `points` that contains every segment of the closed
/// loop formed by the first `loop_size` points. Missing loop segments are split
/// at their midpoints, so `points` may grow; the loop then occupies a prefix
/// whose order is returned in `loop`.
struct ConformingResult {
  std::vector<Vec2> points;
  std::vector<std::size_t> loop;
  std::vector<Triangle> triangles;
};

ConformingResult triangulate_conforming(std::vector<Vec2> loop_points,
                                        const std::vector<Vec2>& interior_points);

double orient(const Vec2& a, const Vec2& b, const Vec2& c);
/// Positive when d lies strictly inside the circumcircle of ccw triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace foldopt::delaunay
