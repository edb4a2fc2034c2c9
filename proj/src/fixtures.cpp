#include "foldopt/fixtures.hpp"

#include "foldopt/clothsim.hpp"
#include "foldopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace foldopt {

namespace {

struct Outline {
  std::vector<Vec2> points;
  std::vector<std::string> ids;
};

Outline outline(GarmentCategory c) {
  switch (c) {
    case GarmentCategory::Towel:
      return {{{-0.15, -0.15}, {0.15, -0.15}, {0.15, 0.15}, {-0.15, 0.15}},
              {"corner_bottom_left", "corner_bottom_right", "corner_top_right", "corner_top_left"}};
    case GarmentCategory::Shirt:
      return {{{-0.12, -0.15},
               {0.12, -0.15},
               {0.12, 0.07},
               {0.32, 0.07},
               {0.32, 0.14},
               {0.10, 0.16},
               {0.04, 0.17},
               {0.0, 0.15},
               {-0.04, 0.17},
               {-0.10, 0.16},
               {-0.32, 0.14},
               {-0.32, 0.07},
               {-0.12, 0.07}},
              {"hem_left", "hem_right", "armpit_right", "sleeve_right_end_bottom", "sleeve_right_end_top",
               "shoulder_right", "collar_right", "neck", "collar_left", "shoulder_left", "sleeve_left_end_top",
               "sleeve_left_end_bottom", "armpit_left"}};
    case GarmentCategory::Pants:
      return {{{-0.13, 0.2}, {-0.15, -0.2}, {-0.07, -0.2}, {0.0, 0.0}, {0.07, -0.2}, {0.15, -0.2}, {0.13, 0.2}},
              {"waist_left", "hem_left_outer", "hem_left_inner", "crotch", "hem_right_inner", "hem_right_outer",
               "waist_right"}};
  }
  throw InputError("unknown garment category");
}

}  // namespace

Polygon2D garment_contour(GarmentCategory c) { return Polygon2D{outline(c).points}; }

ContourTemplate garment_template(GarmentCategory c) {
  Outline o = outline(c);
  return make_template(std::move(o.points), std::move(o.ids));
}

double desk_edge_length(GarmentCategory c) { return c == GarmentCategory::Towel ? 0.3 / 14.0 : 0.022; }

TriangleMesh desk_mesh(GarmentCategory c) {
  return place_on_table(mirror_two_sided(triangulate_contour(garment_contour(c), desk_edge_length(c))), 0.0);
}

TriangleMesh calibration_mesh() {
  const Polygon2D square{{{0.0, 0.0}, {0.3, 0.0}, {0.3, 0.3}, {0.0, 0.3}}};
  return place_on_table(mirror_two_sided(triangulate_contour(square, 0.3 / 9.0)), 0.0);
}

std::size_t calibration_pick_vertex(const TriangleMesh& mesh) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < mesh.layer_vertex_count(); ++i)
    if (xy(mesh.vertices[i]).norm() < xy(mesh.vertices[best]).norm()) best = i;
  return best;
}

Mask render_mask(const Polygon2D& contour, double resolution, int margin_cells) {
  if (contour.points.size() < 3) throw InputError("render_mask: contour needs at least 3 vertices");
  if (!(resolution > 0.0)) throw InputError("render_mask: resolution must be positive");
  if (margin_cells < 1) throw InputError("render_mask: margin must be at least one cell");
  Vec2 lo = contour.points[0], hi = contour.points[0];
  for (const Vec2& p : contour.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 extent = hi - lo;
  if (extent.maxCoeff() / resolution < 32.0) throw InputError("render_mask: resolution too coarse (under 32 cells across)");
  const int w = static_cast<int>(std::ceil(extent.x() / resolution)) + 2 * margin_cells;
  const int h = static_cast<int>(std::ceil(extent.y() / resolution)) + 2 * margin_cells;
  Mask m(w, h, resolution, lo - Vec2::Constant(margin_cells * resolution));

  const auto& pts = contour.points;
  std::vector<double> xs;
  for (int j = 0; j < h; ++j) {
    const double y = m.origin.y() + (j + 0.5) * resolution;
    xs.clear();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Vec2& a = pts[k];
      const Vec2& b = pts[(k + 1) % pts.size()];
      if ((a.y() <= y) == (b.y() <= y)) continue;
      xs.push_back(a.x() + (y - a.y()) / (b.y() - a.y()) * (b.x() - a.x()));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int i0 = static_cast<int>(std::ceil((xs[k] - m.origin.x()) / resolution - 0.5));
      const int i1 = static_cast<int>(std::floor((xs[k + 1] - m.origin.x()) / resolution - 0.5));
      for (int i = std::max(i0, 0); i <= std::min(i1, w - 1); ++i) m.set(i, j, true);
    }
  }
  return m;
}

Contour perturb_contour(const Contour& c, double rotation, double scale, double noise, std::uint64_t seed) {
  c.validate();
  if (!(scale > 0.0) || !(noise >= 0.0)) throw InputError("perturb_contour: invalid scale or noise");
  Vec2 center = Vec2::Zero();
  for (const Vec2& p : c.points) center += p;
  center /= double(c.size());
  const Eigen::Rotation2Dd rot(rotation);
  Contour out = c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double edge = std::min((c.points[i] - c.points[(i + n - 1) % n]).norm(), (c.points[(i + 1) % n] - c.points[i]).norm());
    const double r = noise * edge * std::sqrt(unit(rng));
    const double a = 2.0 * kPi * unit(rng);
    out.points[i] = center + scale * (rot * (c.points[i] - center)) + r * Vec2(std::cos(a), std::sin(a));
  }
  return out;
}

std::vector<GarmentRecord> garment_records() {
  struct Row {
    const char* name;
    double stretch, angle, shear, friction;
  };
  static const Row rows[] = {
      {"long_sleeve_tshirt_large", 2.9, 24.3, 200, 0.7}, {"long_sleeve_tshirt_small", 2.9, 24.7, 200, 0.7},
      {"jeans", 2.9, 19.1, 200, 0.5},                    {"pants", 1.7, 21.9, 340, 0.6},
      {"large_towel", 2.2, 18.7, 260, 0.5},              {"medium_towel", 3.1, 22.3, 190, 0.6},
      {"small_towel", 1.1, 24.3, 530, 0.7},
  };
  // Hang lengths against a 1 m flat length; lift heights on a 1.2 m table to 0.1 mm.
  std::vector<GarmentRecord> out;
  for (const Row& r : rows) {
    GarmentRecord g;
    g.name = r.name;
    g.stretch_percent = r.stretch;
    g.friction_angle_deg = r.angle;
    g.reference_shear_resistance = r.shear;
    g.reference_friction = r.friction;
    g.measurement.L2 = 1.0;
    g.measurement.L1 = 1.0 + r.stretch / 100.0;
    g.measurement.L_t = 1.2;
    g.measurement.H_s = std::round(1.2 * std::sin(deg_to_rad(r.angle)) * 1e4) / 1e4;
    out.push_back(g);
  }
  return out;
}

std::vector<NamedMeasurement> garment_measurements() {
  std::vector<NamedMeasurement> out;
  for (const GarmentRecord& g : garment_records()) out.push_back({g.name, g.measurement});
  return out;
}

Fixture make_fixture(GarmentCategory c) {
  Fixture f;
  f.name = to_string(c);
  f.category = c;
  f.contour = garment_contour(c);
  f.contour_template = garment_template(c);
  f.mask = render_mask(f.contour, kDeskMaskResolution);
  f.plan = builtin_plan(c);
  f.keypoints = f.contour_template.features();
  return f;
}

}  // namespace foldopt
