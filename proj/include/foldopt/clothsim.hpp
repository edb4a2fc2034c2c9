#pragma once

#include "foldopt/mesh.hpp"
#include "foldopt/trajectory.hpp"

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace foldopt {

/// Physical parameters of the cloth simulator.
///
/// Elastic stiffnesses are membrane quantities so that a calibrated material
/// behaves the same on meshes of different resolution: stretch and shear are
/// in N per unit strain across a 1 m wide strip, bending in N*m per radian.
struct SimParams {
  double shear_stiffness = 5.0;
  double stretch_stiffness = 50.0;
  double bend_stiffness = 1e-5;
  double friction_mu = 0.41;
  double gravity = 9.81;
  double timestep = 1e-3;
  double damping = 2.0;
  double table_height = 0.0;
  /// Incline of the table about the y axis; the table surface drops toward -x.
  double table_tilt = 0.0;
  bool table_enabled = true;
  /// Coulomb coefficient where the garment lies on itself.
  double self_friction_mu = 0.5;
  /// Mass per unit area of one fabric layer, kg/m^2.
  double areal_density = 0.2;
  /// Constraint-projection substeps per timestep.
  int substeps = 2;

  void validate() const;
  Vec3 gravity_vector() const;
};

/// Drags a set of mesh vertices along a trajectory. Vertex i is held at
/// T(u(t)) + offsets[i] (zero when offsets is empty), with the smoothstep time
/// map u = 3s^2 - 2s^3, s = (t - start_time) / duration.
struct GraspConstraint {
  std::vector<std::size_t> vertex_ids;
  BezierTrajectory trajectory;
  double start_time = 0.0;
  double duration = 4.0;
  std::vector<Vec3> offsets;

  bool active_at(double t) const { return t >= start_time && t <= start_time + duration; }
  double curve_parameter(double t) const;
  Vec3 target(std::size_t index, double t) const;
};

struct SimState {
  TriangleMesh mesh;
  std::vector<Vec3> velocities;
  double time = 0.0;
};

SimState make_state(const TriangleMesh& mesh);

/// Fixed-step cloth integrator. Gravity and damping are integrated with
/// semi-implicit Euler; stretch, shear (area) and bend terms are compliant
/// constraints projected every substep; the table is a plane with Coulomb
/// friction, and parts of the garment stacked on each other keep a small
/// vertical clearance. Boundary vertices of a two-sided mesh are welded to
/// their mirror copies.
class ClothSimulator {
 public:
  ClothSimulator(const TriangleMesh& mesh, const SimParams& params);
  ~ClothSimulator();
  ClothSimulator(ClothSimulator&&) noexcept;
  ClothSimulator& operator=(ClothSimulator&&) noexcept;

  void set_constraints(std::vector<GraspConstraint> constraints);
  void set_velocities(std::span<const Vec3> per_vertex);
  void set_params(const SimParams& params);

  /// Advances by one timestep. Throws SimulationDiverged.
  void step();

  double time() const;
  void set_time(double t);
  /// Current positions per mesh vertex.
  std::vector<Vec3> positions() const;
  std::vector<Vec3> velocities() const;
  TriangleMesh mesh() const;
  SimState state() const;
  double max_speed() const;
  /// Kinetic energy divided by total mass (J/kg).
  double specific_kinetic_energy() const;
  Vec3 centroid() const;
  std::size_t particle_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Single step for callers holding a SimState.
SimState step(const SimState& state, const SimParams& params, std::span<const GraspConstraint> constraints);

using SimObserver = std::function<void(const ClothSimulator&)>;

/// Runs every grasp phase, releases and lets the cloth settle for
/// `settle_time` seconds. `observer` (optional) is called after every step.
TriangleMesh simulate_fold(const TriangleMesh& mesh, const SimParams& params,
                           std::span<const GraspConstraint> constraints, double settle_time,
                           const SimObserver& observer = {});

struct SlideResult {
  double angle = 0.0;
  bool saturated = false;
};

/// Smallest incline at which the resting garment's centroid slides more than
/// 5% of its diagonal within 2 s, resolved to `angle_resolution`.
SlideResult tilt_table_slide_angle(const TriangleMesh& mesh, const SimParams& params, double angle_resolution);
/// Whether the garment slides at a fixed incline.
bool slides_at(const TriangleMesh& mesh, const SimParams& params, double tilt);

struct HangLengths {
  double hanging = 0.0;  // L1
  double flat = 0.0;     // L2
  std::size_t lowest_vertex = 0;
};

/// Hangs the garment from `pick_vertex` until it comes to rest.
HangLengths hang_lengths(const TriangleMesh& mesh, const SimParams& params, std::size_t pick_vertex);

/// Translates the mesh vertically so its lowest vertex rests on the table.
TriangleMesh place_on_table(const TriangleMesh& mesh, double table_height);

/// Vertices whose current position lies within `radius` of vertex `center`.
std::vector<std::size_t> grasp_neighborhood(const TriangleMesh& mesh, std::size_t center, double radius);

constexpr double kDefaultGraspRadius = 0.01;

}  // namespace foldopt
