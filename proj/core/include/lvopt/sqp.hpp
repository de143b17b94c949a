#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lvopt {

/// Values of a smooth NLP at one point: objective, equalities (= 0) and
/// inequalities (<= 0). `ok == false` marks a point where the model could not
/// be evaluated; the solver treats it as infinitely bad.
struct NlpValues {
  double f = 0.0;
  Eigen::VectorXd eq;
  Eigen::VectorXd ineq;
  bool ok = true;
};

struct NlpProblem {
  int n = 0;
  int n_eq = 0;
  int n_ineq = 0;
  Eigen::VectorXd lower;       ///< simple bounds on x (may be +-inf)
  Eigen::VectorXd upper;
  Eigen::VectorXd step_limit;  ///< per-iteration |dx_i| cap (may be +inf)
  /// Must be pure and reentrant: Jacobian columns are evaluated concurrently.
  std::function<NlpValues(const Eigen::VectorXd&)> evaluate;
};

struct Jacobian {
  Eigen::VectorXd grad;  ///< objective gradient
  Eigen::MatrixXd eq;    ///< n_eq x n
  Eigen::MatrixXd ineq;  ///< n_ineq x n
  int evaluations = 0;
  int one_sided = 0;     ///< columns that fell back to a one-sided difference
};

/// Central differences with step rel_step * max(1, |x_i|); a column whose
/// probe fails falls back to a one-sided difference. Columns are spread over
/// `workers` threads (0 = hardware concurrency); the result does not depend
/// on the worker count. Throws Error if both probes of a column fail.
Jacobian finite_difference_jacobian(const NlpProblem& problem, const Eigen::VectorXd& x,
                                    const NlpValues& at_x, double rel_step, int workers);

/// Lagrangian Hessian model: damped BFGS updates, or forward differences of
/// the finite-difference Lagrangian gradient with eigenvalues flipped and
/// floored to make it positive definite.
enum class HessianMode { Bfgs, FiniteDifference };

enum class SqpStatus { Converged, Infeasible, MaxIterations };

std::string to_string(SqpStatus status);

struct SqpIterate {
  int iteration = 0;
  double f = 0.0;
  double kkt = 0.0;
  double eq_violation = 0.0;
  double ineq_violation = 0.0;
  double step = 0.0;
  double alpha = 0.0;
  bool elastic = false;  ///< step came from the elastic (penalty) sub-problem
};

struct SqpOptions {
  int max_iter = 300;
  double kkt_tol = 1e-6;
  double eq_tol = 1e-6;
  double ineq_tol = 1e-8;
  double fd_step = 1e-6;
  int workers = 0;
  HessianMode hessian = HessianMode::FiniteDifference;
  double hessian_step = 1e-4;
  std::function<void(const SqpIterate&)> on_iterate;
};

struct SqpResult {
  Eigen::VectorXd x;
  NlpValues values;
  Eigen::VectorXd lambda_eq;
  Eigen::VectorXd lambda_ineq;
  SqpStatus status = SqpStatus::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
  double kkt = 0.0;
  double eq_violation = 0.0;
  double ineq_violation = 0.0;
  std::vector<int> violated_eq;    ///< indices above tolerance at exit
  std::vector<int> violated_ineq;
};

/// Line-search SQP: damped BFGS Lagrangian Hessian, l1 merit function with
/// second-order correction, interior-point QP sub-problems, and an elastic
/// l1 QP when the linearised constraints are inconsistent.
/// Convergence requires ||grad L||_inf <= kkt_tol, max |eq| <= eq_tol and
/// max(ineq) <= ineq_tol, all in the caller's (scaled) units.
SqpResult solve_sqp(const NlpProblem& problem, const Eigen::VectorXd& x0, const SqpOptions& options = {});

}  // namespace lvopt
