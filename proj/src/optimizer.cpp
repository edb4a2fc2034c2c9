#include "foldopt/optimizer.hpp"

#include "foldopt/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace foldopt {

void LmOptions::validate() const {
  if (!(delta > 0.0)) throw InputError("lm: delta must be positive");
  if (!(initial_damping > 0.0)) throw InputError("lm: initial damping must be positive");
  if (max_iterations < 1) throw InputError("lm: max_iterations must be at least 1");
  if (!(cost_improvement_tol > 0.0) || !(step_norm_tol > 0.0) || !(gradient_tol > 0.0))
    throw InputError("lm: tolerances must be positive");
}

std::vector<Eigen::VectorXd> probe(const ResidualFunction& f, const Eigen::VectorXd& x, double delta,
                                   bool parallel, unsigned threads) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto run = [&](Eigen::Index j) {
    try {
      Eigen::VectorXd xj = x;
      xj[j] += delta;
      out[static_cast<std::size_t>(j)] = f(xj);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<Eigen::Index>(n, 1)));
  if (!parallel || workers <= 1) {
    for (Eigen::Index j = 0; j < n; ++j) run(j);
  } else {
    std::atomic<Eigen::Index> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (Eigen::Index j = next++; j < n; j = next++) run(j);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& fx, double delta, bool parallel, unsigned threads) {
  if (!(delta > 0.0)) throw InputError("numerical_jacobian: delta must be positive");
  if (!fx.allFinite()) throw InputError("numerical_jacobian: f is not finite at x");
  const auto probes = probe(f, x, delta, parallel, threads);
  Eigen::MatrixXd J(fx.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Eigen::VectorXd& fj = probes[static_cast<std::size_t>(j)];
    if (fj.size() != fx.size()) throw InputError("numerical_jacobian: residual size changed");
    if (!fj.allFinite())
      throw ProbeError(static_cast<int>(j), "numerical_jacobian: probe along axis " + std::to_string(j) +
                                                " is not finite");
    J.col(j) = (fj - fx) / delta;
  }
  return J;
}

Eigen::VectorXd numerical_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double delta,
                                   bool parallel, unsigned threads) {
  const ResidualFunction r = [&f](const Eigen::VectorXd& v) { return Eigen::VectorXd::Constant(1, f(v)); };
  return numerical_jacobian(r, x, r(x), delta, parallel, threads).row(0).transpose();
}

namespace {

// Forward differences, falling back to a backward difference on any axis whose
// forward probe is not finite.
Eigen::MatrixXd robust_jacobian(const ResidualFunction& r, const Eigen::VectorXd& x, const Eigen::VectorXd& rx,
                                const LmOptions& opts, int& evaluations) {
  const auto probes = probe(r, x, opts.delta, opts.parallel_probes, opts.threads);
  evaluations += static_cast<int>(x.size());
  Eigen::MatrixXd J(rx.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Eigen::VectorXd& fj = probes[static_cast<std::size_t>(j)];
    if (fj.size() == rx.size() && fj.allFinite()) {
      J.col(j) = (fj - rx) / opts.delta;
      continue;
    }
    Eigen::VectorXd xb = x;
    xb[j] -= opts.delta;
    const Eigen::VectorXd fb = r(xb);
    ++evaluations;
    if (fb.size() != rx.size() || !fb.allFinite())
      throw ProbeError(static_cast<int>(j), "lm: probes along axis " + std::to_string(j) + " are not finite");
    J.col(j) = (rx - fb) / opts.delta;
  }
  return J;
}

}  // namespace

LmResult minimize_residual(const ResidualFunction& r, const Eigen::VectorXd& x0, const LmOptions& opts) {
  opts.validate();
  LmResult res;
  LmTrace& trace = res.trace;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd rx = r(x);
  trace.evaluations = 1;
  if (rx.size() == 0 || !rx.allFinite() || !x.allFinite()) throw InputError("lm: objective is not finite at the start");
  double F = rx.squaredNorm();
  trace.records.push_back({0, x, F, 0.0, 0.0, true});

  auto finish = [&](std::string reason) {
    trace.stop_reason = std::move(reason);
    res.x = x;
    res.squared_cost = F;
    return res;
  };

  Eigen::MatrixXd J;
  try {
    J = robust_jacobian(r, x, rx, opts, trace.evaluations);
  } catch (const ProbeError& e) {
    return finish(e.what());
  }
  Eigen::MatrixXd A = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * rx;
  double mu = opts.initial_damping * A.diagonal().maxCoeff();
  if (!(mu > 0.0)) mu = opts.initial_damping;
  double nu = 2.0;
  int small_improvements = 0;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tol) return finish("gradient below tolerance");

    Eigen::MatrixXd M = A;
    M.diagonal().array() += mu;
    const Eigen::VectorXd h = M.ldlt().solve(-g);
    const double step = h.norm();
    if (!h.allFinite()) return finish("singular damped system");
    if (step < opts.step_norm_tol) return finish("step below tolerance");

    const Eigen::VectorXd xn = x + h;
    const Eigen::VectorXd rn = r(xn);
    ++trace.evaluations;
    const double Fn = rn.allFinite() ? rn.squaredNorm() : std::numeric_limits<double>::infinity();
    // Predicted decrease of the linear model: h^T (mu h - g).
    const double predicted = h.dot(mu * h - g);
    const double rho = predicted > 0.0 ? (F - Fn) / predicted : -1.0;
    const bool accept = std::isfinite(Fn) && Fn < F && rho > 0.0;

    trace.records.push_back({it, xn, Fn, mu, step, accept});
    if (!accept) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }

    const double rel = (F - Fn) / F;
    x = xn;
    rx = rn;
    F = Fn;
    res.progress = true;
    mu *= std::min(1.0, std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)));
    nu = 2.0;

    small_improvements = rel < opts.cost_improvement_tol ? small_improvements + 1 : 0;
    if (small_improvements >= 2) return finish("improvement below tolerance");
    if (F == 0.0) return finish("zero cost");
    if (it == opts.max_iterations) break;

    try {
      J = robust_jacobian(r, x, rx, opts, trace.evaluations);
    } catch (const ProbeError& e) {
      return finish(e.what());
    }
    A = J.transpose() * J;
    g = J.transpose() * rx;
  }
  return finish("iteration limit");
}

LmResult minimize(const ScalarFunction& f, const Eigen::VectorXd& x0, const LmOptions& opts) {
  const ResidualFunction r = [&f](const Eigen::VectorXd& v) { return Eigen::VectorXd::Constant(1, f(v)); };
  return minimize_residual(r, x0, opts);
}

double scene_delta(const FoldScene& scene, double delta) { return delta * scene.diagonal(); }

FoldStepResult optimize_fold_step(const FoldScene& scene, const LmOptions& opts,
                                  const std::optional<Eigen::VectorXd>& x0, const EvaluationObserver& observer) {
  scene.validate();
  opts.validate();
  const auto ends = scene.endpoints();
  FoldStepResult out;
  out.initial = initial_trajectories(scene);
  Eigen::VectorXd start = pack(out.initial);
  if (x0) {
    if (x0->size() != start.size()) throw InputError("optimize_fold_step: initial vector has the wrong size");
    start = *x0;
    out.initial = unpack(start, ends);
  }

  LmOptions o = opts;
  o.delta = scene_delta(scene, opts.delta);
  std::mutex observer_mutex;
  const ScalarFunction f = [&](const Eigen::VectorXd& x) {
    const CostReport rep = objective(x, scene);
    if (observer) {
      std::lock_guard lock(observer_mutex);
      observer(x, rep);
    }
    return rep.cost;
  };
  const LmResult lm = minimize(f, start, o);

  out.trace = lm.trace;
  out.progress = lm.progress;
  out.trajectories = lm.progress ? unpack(lm.x, ends) : out.initial;
  out.initial_report = evaluate_trajectories(scene, out.initial, lm.progress ? nullptr : &out.final_mesh);
  out.report = lm.progress ? evaluate_trajectories(scene, out.trajectories, &out.final_mesh) : out.initial_report;
  return out;
}

}  // namespace foldopt
