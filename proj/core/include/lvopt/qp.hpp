#pragma once

#include <Eigen/Dense>

namespace lvopt {

/// Dense convex QP:  min 1/2 x'Hx + c'x  s.t.  A x = b,  G x <= h.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
};

struct QpOptions {
  int max_iter = 200;
  double tol = 1e-10;
};

/// Multipliers follow H x + c + A'y + G'z = 0 with z >= 0.
struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  bool converged = false;
  int iterations = 0;
};

/// Mehrotra predictor-corrector primal-dual interior point method. H must be
/// positive definite on the null space of A. Non-convergence (typically an
/// infeasible constraint set) is reported through `converged`.
QpResult solve_qp(const QpProblem& qp, const QpOptions& options = {});

}  // namespace lvopt
