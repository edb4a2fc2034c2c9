#pragma once

#include "foldopt/error.hpp"
#include "foldopt/optimizer.hpp"
#include "foldopt/plan.hpp"
#include "foldopt/scene.hpp"

#include <functional>
#include <vector>

namespace foldopt {

/// Scene timing used for desk-scale garments.
constexpr double kDeskDuration = 2.0;
constexpr double kDeskSettleTime = 0.5;

/// A plan step could not be optimized.
class OptimizationFailure : public Error {
 public:
  OptimizationFailure(std::size_t step, const std::string& what)
      : Error("step " + std::to_string(step + 1) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct PlanRunOptions {
  SceneOptions scene{kDeskDuration, kDeskSettleTime};
  LmOptions lm;
  /// Lift heights tried in order when the default arc diverges.
  std::vector<double> lifts{kDefaultLift, 0.5, 0.2};
};

struct StepOutcome {
  PlanStep step;
  FoldScene scene;
  FoldStepResult result;
  double lift = kDefaultLift;
};

using StepObserver = std::function<void(std::size_t step, const Eigen::VectorXd& x, const CostReport& report)>;

/// Optimizes the plan step by step. Each step grasps the vertices under its
/// predicted grasp points on the simulated result of the previous step.
std::vector<StepOutcome> optimize_plan(const TriangleMesh& mesh, const SimParams& params, const FoldPlan& plan,
                                       const Keypoints& keypoints, const PlanRunOptions& opts,
                                       const StepObserver& observer = {});

/// Scene of a plan step on the current garment state.
FoldScene plan_step_scene(const TriangleMesh& state, const SimParams& params, const PlanStep& step,
                          const SceneOptions& opts);

}  // namespace foldopt
