#pragma once

#include "foldopt/error.hpp"
#include "foldopt/image.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace foldopt {

/// Closed polyline. Feature vertices carry a unique non-empty id.
struct Contour {
  std::vector<Vec2> points;
  std::vector<std::string> feature_ids;

  std::size_t size() const { return points.size(); }
  bool is_feature(std::size_t i) const { return !feature_ids[i].empty(); }
  std::vector<bool> feature_flags() const;
  std::map<std::string, Vec2> features() const;
  void validate() const;
};

using ContourTemplate = Contour;

/// Template whose vertices are all features.
ContourTemplate make_template(std::vector<Vec2> points, std::vector<std::string> ids);

class RegistrationError : public Error {
 public:
  using Error::Error;
};

struct RegistrationEnergies {
  double fit = 0.0;
  double stretch = 0.0;
  double bend = 0.0;
};

struct RegistrationOptions {
  double kappa = 10.0;
  double beta = 3.0;
  /// Resampling thresholds in mask cells.
  double split_cells = 4.0;
  double merge_cells = 1.5;
  /// Early outer iterations resample at 2^k times the thresholds, halving
  /// each iteration until they reach the values above.
  int coarse_levels = 4;
  int max_outer_iterations = 10;
  int max_inner_iterations = 200;
  /// Relative E_T reduction that ends the outer loop.
  double tolerance = 1e-4;
  /// Fit a similarity transform before deforming.
  bool prealign = true;

  void validate() const;
};

struct FittedContour {
  Contour contour;
  Contour reference;
  std::map<std::string, Vec2> features;
  /// Energies of `contour` against `reference`, in meters.
  RegistrationEnergies energies;
  int outer_iterations = 0;
  bool converged = false;
  /// Non-empty when the energy kept increasing and the best contour so far
  /// was returned.
  std::string warning;
};

/// Interior angle at `q` of a counterclockwise polyline p -> q -> n, in (0, 2 pi).
double interior_angle(const Vec2& p, const Vec2& q, const Vec2& n);

/// Sum over segments of dist(midpoint)^2 * length.
double fit_energy(std::span<const Vec2> contour, const DistanceField& field);
/// 1/2 sum (l / l_ref - 1)^2 l_ref.
double stretch_energy(std::span<const Vec2> contour, std::span<const Vec2> reference);
/// 1/2 sum (theta / theta_ref - 1)^2 L_ref with L_ref the mean adjacent
/// reference segment length.
double bend_energy(std::span<const Vec2> contour, std::span<const Vec2> reference);

std::vector<Vec2> fit_gradient(std::span<const Vec2> contour, const DistanceField& field);
std::vector<Vec2> stretch_gradient(std::span<const Vec2> contour, std::span<const Vec2> reference);
std::vector<Vec2> bend_gradient(std::span<const Vec2> contour, std::span<const Vec2> reference);

/// Splits segments longer than `split` evenly, then removes non-feature
/// vertices whose two segments are both shorter than `merge`.
Contour resample(const Contour& contour, double split, double merge);

/// Fits the template to the mask boundary and reads off the feature points.
FittedContour register_contour(const ContourTemplate& tmpl, const Mask& mask, const RegistrationOptions& opts = {});

}  // namespace foldopt
