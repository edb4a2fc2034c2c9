#pragma once

#include "foldopt/cost.hpp"
#include "foldopt/mesh.hpp"
#include "foldopt/optimizer.hpp"
#include "foldopt/plan.hpp"
#include "foldopt/registration.hpp"
#include "foldopt/trajectory.hpp"

#include <string>
#include <vector>

namespace foldopt {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Contour as a JSON array of [x, y] pairs.
std::string contour_to_json(const Polygon2D& contour);
Polygon2D contour_from_json(const std::string& text);

/// {"vertices": [[x, y]...], "feature_flags": [...], "feature_ids": [...]};
/// non-feature vertices carry an empty id.
std::string template_to_json(const Contour& contour);
Contour template_from_json(const std::string& text);

/// Template fields plus "reference", "features", "energies" and the outer
/// loop status.
std::string fitted_to_json(const FittedContour& fit);

/// {"keypoints": {id: [x, y]}}. Reading also accepts a fitted-contour file.
std::string keypoints_to_json(const Keypoints& keypoints);
Keypoints keypoints_from_json(const std::string& text);

/// One fold step's arms: {"arms": [{"control_points": [[x, y, z] x4]}],
/// "duration_s": t}.
struct TrajectorySet {
  std::vector<BezierTrajectory> arms;
  double duration = 4.0;
};
std::string trajectory_to_json(const TrajectorySet& set);
TrajectorySet trajectory_from_json(const std::string& text);

/// A whole plan: {"steps": [{"step": k, "arms": [...], "duration_s": t}]}.
/// Reading also accepts a single-step file.
std::string trajectories_to_json(const std::vector<TrajectorySet>& steps);
std::vector<TrajectorySet> trajectories_from_json(const std::string& text);

/// iteration,squared_cost,damping,step_norm,accepted
std::string trace_to_csv(const LmTrace& trace);

struct TraceRow {
  int iteration = 0;
  double squared_cost = 0.0;
  double damping = 0.0;
  double step_norm = 0.0;
  bool accepted = false;
};
std::vector<TraceRow> trace_from_csv(const std::string& text);

/// One run-log line (no trailing newline).
std::string cost_record_json(int step, int evaluation, const CostReport& report);

}  // namespace foldopt
