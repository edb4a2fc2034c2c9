#include "foldopt/error.hpp"
#include "foldopt/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace foldopt;

namespace {

void expect_monotone(const LmTrace& trace) {
  double last = std::numeric_limits<double>::infinity();
  for (const LmRecord& r : trace.records)
    if (r.accepted) {
      EXPECT_LE(r.squared_cost, last) << "iteration " << r.iteration;
      last = r.squared_cost;
    }
}

Eigen::VectorXd rosenbrock(const Eigen::VectorXd& v) {
  Eigen::VectorXd r(2);
  r << 10.0 * (v[1] - v[0] * v[0]), 1.0 - v[0];
  return r;
}

}  // namespace

TEST(Gradient, Quadratic) {
  const ScalarFunction f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const Eigen::VectorXd g = numerical_gradient(f, Eigen::Vector2d(1, 2), 1e-4);
  EXPECT_NEAR(g[0], 2.0, 1e-3);
  EXPECT_NEAR(g[1], 4.0, 1e-3);
}

TEST(Gradient, ConstantIsZero) {
  const ScalarFunction f = [](const Eigen::VectorXd&) { return 3.5; };
  const Eigen::VectorXd g = numerical_gradient(f, Eigen::Vector3d(1, -2, 0.5), 1e-3);
  EXPECT_EQ(g, Eigen::Vector3d::Zero());
}

TEST(Gradient, ParallelProbesMatchSerial) {
  const ScalarFunction f = [](const Eigen::VectorXd& x) { return std::sin(x[0]) * x[1] + x.squaredNorm() * x[2]; };
  const Eigen::Vector3d x(0.3, -1.1, 2.0);
  const Eigen::VectorXd a = numerical_gradient(f, x, 1e-5, false);
  const Eigen::VectorXd b = numerical_gradient(f, x, 1e-5, true, 4);
  EXPECT_EQ(a, b);
}

TEST(Jacobian, NonFiniteProbeThrows) {
  const ResidualFunction f = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x[1] > 0.5 ? std::nan("") : x[0]);
  };
  const Eigen::Vector2d x(0, 0);
  try {
    numerical_jacobian(f, x, f(x), 1.0);
    FAIL() << "expected ProbeError";
  } catch (const ProbeError& e) {
    EXPECT_EQ(e.axis(), 1);
  }
}

TEST(Jacobian, LinearMapIsExact) {
  Eigen::Matrix<double, 3, 2> A;
  A << 1, 2, -3, 0.5, 4, 1;
  const ResidualFunction f = [&A](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; };
  const Eigen::Vector2d x(0.25, -0.5);
  const Eigen::MatrixXd J = numerical_jacobian(f, x, f(x), 0.125);
  EXPECT_LE((J - A).norm(), 1e-12);
}

TEST(Lm, ConeConvergesToApex) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Eigen::Vector3d a(0.4, -0.7, 1.2);
  const ScalarFunction f = [&a](const Eigen::VectorXd& x) { return (x - a).norm() + 1.0; };
  LmOptions o;
  o.delta = 1e-7;
  o.max_iterations = 200;
  o.cost_improvement_tol = 1e-15;
  o.step_norm_tol = 1e-9;
  for (int k = 0; k < 5; ++k) {
    const Eigen::Vector3d x0(u(rng), u(rng), u(rng));
    const LmResult r = minimize(f, x0, o);
    EXPECT_LE((r.x - a).norm(), 1e-4) << r.trace.stop_reason;
    expect_monotone(r.trace);
  }
}

TEST(Lm, Rosenbrock) {
  LmOptions o;
  o.delta = 1e-7;
  o.max_iterations = 200;
  o.cost_improvement_tol = 1e-15;
  const LmResult r = minimize_residual(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
  EXPECT_LE((r.x - Eigen::Vector2d(1, 1)).norm(), 1e-3) << r.trace.stop_reason;
  EXPECT_LE(r.trace.records.back().iteration, 200);
  expect_monotone(r.trace);
}

TEST(Lm, LinearResidualInTwoIterations) {
  Eigen::Matrix<double, 4, 2> A;
  A << 1, 0, 0, 2, 1, 1, -1, 3;
  const Eigen::Vector4d b(1, 2, 0.5, -1);
  const ResidualFunction r = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x - b; };
  LmOptions o;
  o.delta = 1e-3;
  o.initial_damping = 1e-12;
  const LmResult res = minimize_residual(r, Eigen::Vector2d(5, -5), o);
  const Eigen::Vector2d ls = A.colPivHouseholderQr().solve(b);
  EXPECT_LE((res.x - ls).norm(), 1e-6);
  EXPECT_LE(res.trace.records.back().iteration, 2);
  EXPECT_TRUE(res.progress);
}

TEST(Lm, OptimalStartReturnsImmediately) {
  const ResidualFunction r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
  const Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  const LmResult res = minimize_residual(r, x0, LmOptions{});
  EXPECT_EQ(res.x, x0);
  EXPECT_LE(res.trace.records.size(), 2u);
  EXPECT_FALSE(res.progress);
}

TEST(Lm, TraceStartsAtX0AndDampingGrowsOnRejection) {
  LmOptions o;
  o.delta = 1e-7;
  o.max_iterations = 60;
  const LmResult r = minimize_residual(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
  ASSERT_FALSE(r.trace.records.empty());
  EXPECT_EQ(r.trace.records[0].iteration, 0);
  EXPECT_EQ(r.trace.records[0].x, Eigen::Vector2d(-1.2, 1.0));
  EXPECT_DOUBLE_EQ(r.trace.records[0].squared_cost, rosenbrock(Eigen::Vector2d(-1.2, 1.0)).squaredNorm());
  for (std::size_t i = 1; i + 1 < r.trace.records.size(); ++i)
    if (!r.trace.records[i].accepted) EXPECT_GT(r.trace.records[i + 1].damping, r.trace.records[i].damping);
  EXPECT_GE(r.trace.evaluations, static_cast<int>(r.trace.records.size()));
}

TEST(Lm, NoisyObjectiveStaysMonotone) {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 10; ++k) {
    const double phase = std::uniform_real_distribution<double>(0, 6)(rng);
    const ScalarFunction f = [phase](const Eigen::VectorXd& x) {
      return x.squaredNorm() + 0.05 * std::sin(40.0 * x[0] + phase) + 0.2;
    };
    LmOptions o;
    o.delta = 1e-2;
    const LmResult r = minimize(f, Eigen::Vector2d(1.5, -1.0), o);
    expect_monotone(r.trace);
  }
}

TEST(Lm, ParallelProbesAreDeterministic) {
  LmOptions s;
  s.delta = 1e-7;
  LmOptions p = s;
  p.parallel_probes = true;
  p.threads = 3;
  const LmResult a = minimize_residual(rosenbrock, Eigen::Vector2d(-1.2, 1.0), s);
  const LmResult b = minimize_residual(rosenbrock, Eigen::Vector2d(-1.2, 1.0), p);
  EXPECT_EQ(a.x, b.x);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i)
    EXPECT_EQ(a.trace.records[i].squared_cost, b.trace.records[i].squared_cost);
}

TEST(Lm, NonFiniteStartIsRejected) {
  const ScalarFunction f = [](const Eigen::VectorXd&) { return std::nan(""); };
  EXPECT_THROW(minimize(f, Eigen::Vector2d(0, 0), LmOptions{}), InputError);
}

TEST(Lm, OptionsValidated) {
  LmOptions o;
  o.delta = 0.0;
  EXPECT_THROW(o.validate(), InputError);
  o = LmOptions{};
  o.max_iterations = 0;
  EXPECT_THROW(o.validate(), InputError);
}
