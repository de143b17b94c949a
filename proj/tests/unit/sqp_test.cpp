#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lvopt/sqp.hpp"

using namespace lvopt;

namespace {

NlpProblem unbounded(int n, int n_eq, int n_ineq) {
  NlpProblem p;
  p.n = n;
  p.n_eq = n_eq;
  p.n_ineq = n_ineq;
  p.lower = Eigen::VectorXd::Constant(n, -INFINITY);
  p.upper = Eigen::VectorXd::Constant(n, INFINITY);
  p.step_limit = Eigen::VectorXd::Constant(n, INFINITY);
  return p;
}

// Hock-Schittkowski 71.
NlpProblem hs71() {
  NlpProblem p = unbounded(4, 1, 1);
  p.lower.setConstant(1.0);
  p.upper.setConstant(5.0);
  p.evaluate = [](const Eigen::VectorXd& x) {
    NlpValues v;
    v.f = x(0) * x(3) * (x(0) + x(1) + x(2)) + x(2);
    v.eq.resize(1);
    v.eq(0) = x.squaredNorm() - 40.0;
    v.ineq.resize(1);
    v.ineq(0) = 25.0 - x.prod();
    return v;
  };
  return p;
}

}  // namespace

TEST(FiniteDifference, MatchesAnalyticJacobian) {
  NlpProblem p = unbounded(3, 1, 2);
  p.evaluate = [](const Eigen::VectorXd& x) {
    NlpValues v;
    v.f = std::sin(x(0)) * x(1) + x(2) * x(2);
    v.eq.resize(1);
    v.eq(0) = std::exp(x(0)) - x(1) * x(2);
    v.ineq.resize(2);
    v.ineq << x(0) * x(0) * x(1), std::cos(x(2));
    return v;
  };
  const Eigen::Vector3d x(0.3, -1.2, 0.7);
  const Jacobian J = finite_difference_jacobian(p, x, p.evaluate(x), 1e-6, 1);
  EXPECT_NEAR(J.grad(0), std::cos(0.3) * -1.2, 1e-8);
  EXPECT_NEAR(J.grad(1), std::sin(0.3), 1e-8);
  EXPECT_NEAR(J.grad(2), 1.4, 1e-8);
  EXPECT_NEAR(J.eq(0, 0), std::exp(0.3), 1e-8);
  EXPECT_NEAR(J.eq(0, 1), -0.7, 1e-8);
  EXPECT_NEAR(J.eq(0, 2), 1.2, 1e-8);
  EXPECT_NEAR(J.ineq(0, 0), 2 * 0.3 * -1.2, 1e-8);
  EXPECT_NEAR(J.ineq(0, 1), 0.09, 1e-8);
  EXPECT_NEAR(J.ineq(1, 2), -std::sin(0.7), 1e-8);
  EXPECT_EQ(J.one_sided, 0);
}

TEST(FiniteDifference, IndependentOfWorkerCount) {
  NlpProblem p = hs71();
  const Eigen::Vector4d x(1.5, 4.0, 3.5, 1.2);
  const NlpValues v = p.evaluate(x);
  const Jacobian a = finite_difference_jacobian(p, x, v, 1e-6, 1);
  const Jacobian b = finite_difference_jacobian(p, x, v, 1e-6, 4);
  EXPECT_EQ(a.grad, b.grad);
  EXPECT_EQ(a.eq, b.eq);
  EXPECT_EQ(a.ineq, b.ineq);
}

TEST(FiniteDifference, FallsBackToOneSided) {
  NlpProblem p = unbounded(1, 0, 0);
  p.evaluate = [](const Eigen::VectorXd& x) {
    NlpValues v;
    v.ok = x(0) >= 1.0;
    v.f = x(0) * x(0);
    return v;
  };
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
  const Jacobian J = finite_difference_jacobian(p, x, p.evaluate(x), 1e-6, 1);
  EXPECT_EQ(J.one_sided, 1);
  EXPECT_NEAR(J.grad(0), 2.0, 1e-5);
}

TEST(Sqp, HockSchittkowski71) {
  for (HessianMode mode : {HessianMode::Bfgs, HessianMode::FiniteDifference}) {
    SqpOptions o;
    o.hessian = mode;
    o.workers = 1;
    const SqpResult r = solve_sqp(hs71(), Eigen::Vector4d(1, 5, 5, 1), o);
    ASSERT_EQ(r.status, SqpStatus::Converged);
    EXPECT_NEAR(r.values.f, 17.0140173, 1e-5);
    EXPECT_NEAR(r.x(0), 1.0, 1e-5);
    EXPECT_NEAR(r.x(1), 4.7429994, 1e-4);
    EXPECT_NEAR(r.x(2), 3.8211503, 1e-4);
    EXPECT_NEAR(r.x(3), 1.3794082, 1e-4);
  }
}

TEST(Sqp, Rosenbrock) {
  NlpProblem p = unbounded(2, 0, 0);
  p.evaluate = [](const Eigen::VectorXd& x) {
    NlpValues v;
    v.f = 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    return v;
  };
  SqpOptions o;
  o.workers = 1;
  o.kkt_tol = 1e-7;
  const SqpResult r = solve_sqp(p, Eigen::Vector2d(-1.2, 1.0), o);
  ASSERT_EQ(r.status, SqpStatus::Converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
  EXPECT_NEAR(r.x(1), 1.0, 1e-4);
}

TEST(Sqp, EqualityConstrainedCircle) {
  // min x + y on the unit circle -> (-1/sqrt2, -1/sqrt2).
  NlpProblem p = unbounded(2, 1, 0);
  p.evaluate = [](const Eigen::VectorXd& x) {
    NlpValues v;
    v.f = x(0) + x(1);
    v.eq.resize(1);
    v.eq(0) = x.squaredNorm() - 1.0;
    return v;
  };
  SqpOptions o;
  o.workers = 1;
  const SqpResult r = solve_sqp(p, Eigen::Vector2d(0.5, -0.2), o);
  ASSERT_EQ(r.status, SqpStatus::Converged);
  EXPECT_NEAR(r.x(0), -std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(r.x(1), -std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(r.lambda_eq(0), std::sqrt(0.5), 1e-5);
}

TEST(Sqp, InconsistentConstraintsAreReported) {
  NlpProblem p = unbounded(1, 0, 2);
  p.evaluate = [](const Eigen::VectorXd& x) {
    NlpValues v;
    v.f = x(0) * x(0);
    v.ineq.resize(2);
    v.ineq << x(0) - 1.0, 2.0 - x(0);  // x <= 1 and x >= 2
    return v;
  };
  SqpOptions o;
  o.workers = 1;
  o.max_iter = 50;
  const SqpResult r = solve_sqp(p, Eigen::VectorXd::Constant(1, 0.0), o);
  EXPECT_NE(r.status, SqpStatus::Converged);
  EXPECT_FALSE(r.violated_ineq.empty());
}

TEST(Sqp, ConvergedMeansFeasible) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  for (int i = 0; i < 10; ++i) {
    SqpOptions o;
    o.workers = 1;
    const SqpResult r = solve_sqp(hs71(), Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)), o);
    if (r.status != SqpStatus::Converged) continue;
    EXPECT_LE(r.eq_violation, o.eq_tol);
    EXPECT_LE(r.ineq_violation, o.ineq_tol);
    EXPECT_LE(r.kkt, o.kkt_tol);
  }
}

TEST(Sqp, StatusNames) {
  EXPECT_EQ(to_string(SqpStatus::Converged), "converged");
  EXPECT_EQ(to_string(SqpStatus::Infeasible), "infeasible");
  EXPECT_EQ(to_string(SqpStatus::MaxIterations), "max-iterations");
}
