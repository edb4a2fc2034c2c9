#pragma once

#include "foldopt/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace foldopt {

/// Binary raster on the table plane. Cell (i, j) covers
/// [origin + (i, j) * resolution, origin + (i + 1, j + 1) * resolution]; j grows
/// with y.
struct Mask {
  int width = 0;
  int height = 0;
  double resolution = 1e-3;
  Vec2 origin = Vec2::Zero();
  std::vector<std::uint8_t> cells;

  Mask() = default;
  Mask(int w, int h, double res, const Vec2& org);

  bool at(int i, int j) const { return cells[static_cast<std::size_t>(j) * width + i] != 0; }
  void set(int i, int j, bool v) { cells[static_cast<std::size_t>(j) * width + i] = v ? 1 : 0; }
  Vec2 cell_center(int i, int j) const { return origin + resolution * Vec2(i + 0.5, j + 0.5); }
  std::size_t count() const;
  void validate() const;
};

/// Binary PGM (P5, maxval 255). Rows are written top (largest y) first; the
/// resolution and origin travel in a header comment.
void write_pgm(std::ostream& out, const Mask& mask);
Mask read_pgm(std::istream& in);
void save_pgm(const std::string& path, const Mask& mask);
Mask load_pgm(const std::string& path);

/// Number of 4-connected foreground components.
int connected_components(const Mask& mask);

/// Signed Euclidean distance to the mask boundary in meters, negative inside.
struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = 1e-3;
  Vec2 origin = Vec2::Zero();
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * width + i]; }
  bool contains(const Vec2& p) const;
  /// Bilinear interpolation between cell centers; throws outside the grid.
  double sample(const Vec2& p) const;
  /// Value and gradient of the bilinear interpolant.
  double sample(const Vec2& p, Vec2& gradient) const;
};

/// Exact two-pass squared distance transform of a 0/inf grid (lower envelope
/// of parabolas per row, then per column).
std::vector<double> squared_distance_transform(const std::vector<double>& f, int width, int height);

/// For a foreground cell, its distance to the nearest background cell center
/// minus half a cell; background cells mirror this with a positive sign.
DistanceField distance_field(const Mask& mask);

}  // namespace foldopt
