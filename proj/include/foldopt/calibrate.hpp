#pragma once

#include "foldopt/clothsim.hpp"

#include <string>
#include <vector>

namespace foldopt {

constexpr const char* kSimulatorVersion = "foldopt-sim 1.0";

/// Raw hang and tilt-table measurements of one garment, in meters.
struct MaterialMeasurement {
  double L1 = 0.0;  // hanging length
  double L2 = 0.0;  // flat length
  double H_s = 0.0; // lift height at which the garment starts to slide
  double L_t = 0.0; // table length

  void validate() const;
};

/// (L1 - L2) / L2.
double shear_fraction(double L1, double L2);
/// asin(H_s / L_t) in radians.
double friction_angle(double H_s, double L_t);

struct ShearCalibration {
  double stiffness = 0.0;
  double fraction = 0.0;
  int simulations = 0;
  /// The target lies outside what the stiffness bounds can reach.
  bool saturated = false;
};

constexpr double kMinStiffness = 1.0;
constexpr double kMaxStiffness = 1e9;
constexpr int kCalibrationIterations = 20;

/// Log-scale bisection on the stretch stiffness until the simulated hang
/// fraction is within 10% of the target.
ShearCalibration calibrate_shear(double target_fraction, const TriangleMesh& mesh, std::size_t pick_vertex,
                                 const SimParams& params = {});

struct FrictionCalibration {
  double mu = 0.0;
  /// Coefficients bracketing the onset of sliding at the target tilt: the
  /// garment slides with mu_slides and holds with mu_holds.
  double mu_slides = 0.0;
  double mu_holds = 0.0;
  int simulations = 0;
  bool saturated = false;
};

constexpr double kMaxFrictionMu = 1.5;

/// Bisection on the table friction coefficient until the onset of sliding at
/// `target_angle` is bracketed to a quarter degree of equivalent incline.
FrictionCalibration calibrate_friction(double target_angle, const TriangleMesh& mesh, const SimParams& params = {});

struct MaterialCard {
  std::string garment;
  MaterialMeasurement measurement;
  double shear_fraction = 0.0;
  double friction_angle_deg = 0.0;
  double stretch_stiffness = 0.0;
  double friction_mu = 0.0;
  bool shear_saturated = false;
  bool friction_saturated = false;
  std::string simulator = kSimulatorVersion;

  /// Params with the calibrated stiffness and friction applied.
  SimParams apply(SimParams base) const;
};

MaterialCard calibrate_garment(const std::string& garment, const MaterialMeasurement& m, const TriangleMesh& mesh,
                               std::size_t pick_vertex, const SimParams& params = {});

std::string card_to_json(const MaterialCard& card);
MaterialCard card_from_json(const std::string& text);
void save_card(const std::string& path, const MaterialCard& card);
MaterialCard load_card(const std::string& path);

struct NamedMeasurement {
  std::string garment;
  MaterialMeasurement measurement;
};

/// {"garments": [{"name": ..., "L1": ..., "L2": ..., "H_s": ..., "L_t": ...}]}
std::vector<NamedMeasurement> measurements_from_json(const std::string& text);
std::string measurements_to_json(const std::vector<NamedMeasurement>& list);

}  // namespace foldopt
