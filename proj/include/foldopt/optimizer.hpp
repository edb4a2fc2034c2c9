#pragma once

#include "foldopt/error.hpp"
#include "foldopt/scene.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace foldopt {

struct LmOptions {
  /// Forward-difference probe step.
  double delta = 1e-1;
  /// tau in mu0 = tau * max diag(J^T J).
  double initial_damping = 1e-3;
  int max_iterations = 50;
  /// Stop once two consecutive accepted steps each reduce the squared cost by
  /// less than this fraction.
  double cost_improvement_tol = 1e-4;
  double step_norm_tol = 1e-6;
  double gradient_tol = 1e-12;
  bool parallel_probes = false;
  /// Worker threads for parallel probes; 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct LmRecord {
  int iteration = 0;
  Eigen::VectorXd x;
  double squared_cost = 0.0;
  double damping = 0.0;
  double step_norm = 0.0;
  bool accepted = false;
};

/// Record 0 is the starting point; every later record is one trial step.
struct LmTrace {
  std::vector<LmRecord> records;
  std::string stop_reason;
  int evaluations = 0;
};

struct LmResult {
  Eigen::VectorXd x;
  double squared_cost = 0.0;
  LmTrace trace;
  /// At least one step was accepted.
  bool progress = false;
};

/// A probe returned a non-finite value.
class ProbeError : public Error {
 public:
  ProbeError(int axis, const std::string& what) : Error(what), axis_(axis) {}
  int axis() const { return axis_; }

 private:
  int axis_;
};

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Runs f(x + delta e_j) for every axis j, possibly concurrently; results are
/// returned in axis order.
std::vector<Eigen::VectorXd> probe(const ResidualFunction& f, const Eigen::VectorXd& x, double delta,
                                   bool parallel, unsigned threads = 0);

/// Forward differences (f(x + delta e_j) - f(x)) / delta.
Eigen::VectorXd numerical_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double delta,
                                   bool parallel = false, unsigned threads = 0);
Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& fx, double delta, bool parallel = false,
                                   unsigned threads = 0);

/// Levenberg-Marquardt on 1/2 |r(x)|^2 with a finite-difference Jacobian that
/// is re-estimated after every accepted step.
LmResult minimize_residual(const ResidualFunction& r, const Eigen::VectorXd& x0, const LmOptions& opts);

/// Minimizes f(x)^2 by treating f as a one-component residual.
LmResult minimize(const ScalarFunction& f, const Eigen::VectorXd& x0, const LmOptions& opts);

struct FoldStepResult {
  std::vector<BezierTrajectory> trajectories;
  std::vector<BezierTrajectory> initial;
  CostReport initial_report;
  CostReport report;
  TriangleMesh final_mesh;
  LmTrace trace;
  bool progress = false;
};

/// Probe step for a scene: opts.delta taken per metre of garment diagonal.
double scene_delta(const FoldScene& scene, double delta);

/// Called once per objective evaluation. Calls are serialized but, with
/// parallel probes, not ordered.
using EvaluationObserver = std::function<void(const Eigen::VectorXd& x, const CostReport& report)>;

/// Optimizes the interior control points of every arm, starting from the
/// default lifted arcs or from `x0`.
FoldStepResult optimize_fold_step(const FoldScene& scene, const LmOptions& opts,
                                  const std::optional<Eigen::VectorXd>& x0 = std::nullopt,
                                  const EvaluationObserver& observer = {});

}  // namespace foldopt
