#pragma once

#include "foldopt/calibrate.hpp"
#include "foldopt/image.hpp"
#include "foldopt/mesh.hpp"
#include "foldopt/plan.hpp"
#include "foldopt/registration.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace foldopt {

/// Raster resolution of the synthetic desk-scale masks.
constexpr double kDeskMaskResolution = 2.5e-3;

/// Canonical outline, centered on the origin, counterclockwise.
Polygon2D garment_contour(GarmentCategory c);
/// The outline with a semantic id on every vertex.
ContourTemplate garment_template(GarmentCategory c);

/// Triangulation edge length of the desk meshes.
double desk_edge_length(GarmentCategory c);
/// Two-sided desk mesh resting on the table.
TriangleMesh desk_mesh(GarmentCategory c);

/// Coarse towel used for calibration probes, and the corner it is hung from.
TriangleMesh calibration_mesh();
std::size_t calibration_pick_vertex(const TriangleMesh& mesh);

/// Scanline fill of cells whose centers lie inside the polygon, with a
/// background margin on every side. Rejects rasters under 32 cells across.
Mask render_mask(const Polygon2D& contour, double resolution, int margin_cells = 16);

/// Rotation about the centroid, uniform scale, and per-vertex noise: each
/// vertex moves uniformly within a disk of radius `noise` times its shorter
/// adjacent edge.
Contour perturb_contour(const Contour& c, double rotation, double scale, double noise, std::uint64_t seed);

/// Measured hang and tilt data of the seven test garments, with the
/// reference simulator settings that were matched to them.
struct GarmentRecord {
  std::string name;
  MaterialMeasurement measurement;
  double stretch_percent = 0.0;
  double friction_angle_deg = 0.0;
  double reference_shear_resistance = 0.0;
  double reference_friction = 0.0;
};
std::vector<GarmentRecord> garment_records();
std::vector<NamedMeasurement> garment_measurements();

struct Fixture {
  std::string name;
  GarmentCategory category = GarmentCategory::Towel;
  Polygon2D contour;
  ContourTemplate contour_template;
  Mask mask;
  FoldPlan plan;
  Keypoints keypoints;
};

Fixture make_fixture(GarmentCategory c);

}  // namespace foldopt
