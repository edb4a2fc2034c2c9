#include "foldopt/pipeline.hpp"

#include <algorithm>

namespace foldopt {

FoldScene plan_step_scene(const TriangleMesh& state, const SimParams& params, const PlanStep& step,
                          const SceneOptions& opts) {
  std::vector<std::size_t> grasp;
  for (const Vec2& p : step.grasp_points) {
    const std::size_t v = pick_grasp_vertex(state, p);
    if (std::find(grasp.begin(), grasp.end(), v) != grasp.end())
      throw InputError("both arms grasp vertex " + std::to_string(v));
    grasp.push_back(v);
  }
  return make_fold_scene(state, params, step.fold_line, step.side, grasp, opts);
}

std::vector<StepOutcome> optimize_plan(const TriangleMesh& mesh, const SimParams& params, const FoldPlan& plan,
                                       const Keypoints& keypoints, const PlanRunOptions& opts,
                                       const StepObserver& observer) {
  params.validate();
  opts.lm.validate();
  if (opts.lifts.empty()) throw InputError("optimize_plan: no lift heights to try");
  const std::vector<PlanStep> steps = instantiate(plan, keypoints, mesh, opts.scene.layer_gap);

  std::vector<StepOutcome> out;
  TriangleMesh state = mesh;
  for (const PlanStep& step : steps) {
    StepOutcome o;
    o.step = step;
    try {
      o.scene = plan_step_scene(state, params, step, opts.scene);
    } catch (const InputError& e) {
      throw OptimizationFailure(step.index, e.what());
    }

    bool started = false;
    for (double h : opts.lifts) {
      const auto init = initial_trajectories(o.scene, h);
      if (evaluate_trajectories(o.scene, init).diverged) continue;
      o.lift = h;
      EvaluationObserver per_eval;
      if (observer)
        per_eval = [&observer, &step](const Eigen::VectorXd& x, const CostReport& r) { observer(step.index, x, r); };
      o.result = optimize_fold_step(o.scene, opts.lm, pack(init), per_eval);
      started = true;
      break;
    }
    if (!started) throw OptimizationFailure(step.index, "the simulation diverged for every initial lift");
    if (o.result.report.diverged) throw OptimizationFailure(step.index, "the optimized trajectory diverged");
    state = o.result.final_mesh;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace foldopt
