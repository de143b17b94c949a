#include "lvopt/sqp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lvopt/errors.hpp"
#include "lvopt/qp.hpp"

namespace lvopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NlpValues safe_eval(const NlpProblem& problem, const Eigen::VectorXd& x) {
  NlpValues v;
  try {
    v = problem.evaluate(x);
  } catch (const Error&) {
    v.ok = false;
  }
  if (v.ok) {
    v.ok = std::isfinite(v.f) && v.eq.size() == problem.n_eq && v.ineq.size() == problem.n_ineq &&
           v.eq.allFinite() && v.ineq.allFinite();
  }
  return v;
}

double eq_violation(const NlpValues& v) { return v.eq.size() ? v.eq.cwiseAbs().maxCoeff() : 0.0; }

double ineq_violation(const NlpValues& v) {
  return v.ineq.size() ? std::max(0.0, v.ineq.maxCoeff()) : 0.0;
}

double l1_violation(const NlpValues& v) {
  return v.eq.cwiseAbs().sum() + v.ineq.cwiseMax(0.0).sum();
}

double merit(const NlpValues& v, double rho) {
  if (!v.ok) return kInf;
  return v.f + rho * l1_violation(v);
}

// Bound and trust rows of the QP for step d at x. Each variable gets at most
// one upper and one lower row.
struct BoxRows {
  std::vector<int> var;
  std::vector<double> sign;  // +1: d_i <= h, -1: -d_i <= h
  std::vector<bool> is_bound;  // true when the simple bound (not the step cap) is tighter
  Eigen::VectorXd h;
};

BoxRows box_rows(const NlpProblem& p, const Eigen::VectorXd& x, bool step_cap) {
  BoxRows rows;
  std::vector<double> hs;
  for (int i = 0; i < p.n; ++i) {
    const double cap = step_cap && p.step_limit.size() ? p.step_limit[i] : kInf;
    const double up = p.upper.size() ? p.upper[i] - x[i] : kInf;
    const double lo = p.lower.size() ? x[i] - p.lower[i] : kInf;
    if (std::isfinite(std::min(cap, up))) {
      rows.var.push_back(i);
      rows.sign.push_back(1.0);
      rows.is_bound.push_back(up <= cap);
      hs.push_back(std::max(0.0, std::min(cap, up)));
    }
    if (std::isfinite(std::min(cap, lo))) {
      rows.var.push_back(i);
      rows.sign.push_back(-1.0);
      rows.is_bound.push_back(lo <= cap);
      hs.push_back(std::max(0.0, std::min(cap, lo)));
    }
  }
  rows.h = Eigen::Map<Eigen::VectorXd>(hs.data(), static_cast<Eigen::Index>(hs.size()));
  return rows;
}

struct Subproblem {
  Eigen::VectorXd d;
  Eigen::VectorXd y;      // equality multipliers
  Eigen::VectorXd z;      // inequality multipliers
  Eigen::VectorXd z_box;  // box-row multipliers
  bool elastic = false;
  bool ok = false;
};

Subproblem solve_subproblem(const NlpProblem& p, const Eigen::MatrixXd& B, const Jacobian& J,
                            const NlpValues& v, const BoxRows& box) {
  const int n = p.n;
  const int m_i = p.n_ineq;
  const int m_b = static_cast<int>(box.var.size());

  QpProblem qp;
  qp.H = B;
  qp.c = J.grad;
  qp.A = J.eq;
  qp.b = -v.eq;
  qp.G.setZero(m_i + m_b, n);
  qp.h.resize(m_i + m_b);
  qp.G.topRows(m_i) = J.ineq;
  qp.h.head(m_i) = -v.ineq;
  for (int k = 0; k < m_b; ++k) {
    qp.G(m_i + k, box.var[k]) = box.sign[k];
    qp.h[m_i + k] = box.h[k];
  }

  Subproblem out;
  const QpResult r = solve_qp(qp);
  if (!r.converged || !r.x.allFinite()) return out;
  out.d = r.x;
  out.y = r.y;
  out.z = r.z.head(m_i);
  out.z_box = r.z.tail(m_b);
  out.ok = true;
  return out;
}

// S-l1-QP: the linearised constraints become penalty terms rho * l1, which
// is always feasible and consistent with the l1 merit function.
Subproblem solve_elastic(const NlpProblem& p, const Eigen::MatrixXd& B, const Jacobian& J, const NlpValues& v,
                         const BoxRows& box, double rho) {
  const int n = p.n;
  const int m_e = p.n_eq;
  const int m_i = p.n_ineq;
  const int m_b = static_cast<int>(box.var.size());
  const int nv = n + 2 * m_e + m_i;
  const double reg = 1e-8 * std::max(1.0, B.diagonal().cwiseAbs().maxCoeff());

  QpProblem qp;
  qp.H = reg * Eigen::MatrixXd::Identity(nv, nv);
  qp.H.topLeftCorner(n, n) = B;
  qp.c = Eigen::VectorXd::Constant(nv, rho);
  qp.c.head(n) = J.grad;
  qp.A.setZero(m_e, nv);
  qp.A.leftCols(n) = J.eq;
  qp.A.middleCols(n, m_e) = -Eigen::MatrixXd::Identity(m_e, m_e);
  qp.A.middleCols(n + m_e, m_e) = Eigen::MatrixXd::Identity(m_e, m_e);
  qp.b = -v.eq;
  const int rows = m_i + m_b + 2 * m_e + m_i;
  qp.G.setZero(rows, nv);
  qp.h.setZero(rows);
  qp.G.topLeftCorner(m_i, n) = J.ineq;
  qp.G.block(0, n + 2 * m_e, m_i, m_i) = -Eigen::MatrixXd::Identity(m_i, m_i);
  qp.h.head(m_i) = -v.ineq;
  for (int k = 0; k < m_b; ++k) {
    qp.G(m_i + k, box.var[k]) = box.sign[k];
    qp.h[m_i + k] = box.h[k];
  }
  for (int k = 0; k < 2 * m_e + m_i; ++k) qp.G(m_i + m_b + k, n + k) = -1.0;

  Subproblem out;
  const QpResult r = solve_qp(qp);
  if (!r.converged || !r.x.allFinite()) return out;
  out.d = r.x.head(n);
  out.y = r.y;
  out.z = r.z.head(m_i);
  out.z_box = r.z.segment(m_i, m_b);
  out.elastic = true;
  out.ok = true;
  return out;
}

Eigen::VectorXd lagrangian_gradient(const Jacobian& J, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  Eigen::VectorXd g = J.grad;
  if (y.size()) g += J.eq.transpose() * y;
  if (z.size()) g += J.ineq.transpose() * z;
  return g;
}

// Minimum-norm step pulling the equality and violated inequality rows back
// onto their linearisation at the trial point.
Eigen::VectorXd second_order_correction(const Jacobian& J, const NlpValues& trial) {
  std::vector<int> rows;
  for (int i = 0; i < trial.ineq.size(); ++i)
    if (trial.ineq[i] > 0.0) rows.push_back(i);
  const Eigen::Index m = J.eq.rows() + static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n = J.grad.size();
  if (m == 0) return Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd c(m);
  A.topRows(J.eq.rows()) = J.eq;
  c.head(J.eq.rows()) = trial.eq;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    A.row(J.eq.rows() + static_cast<Eigen::Index>(k)) = J.ineq.row(rows[k]);
    c[J.eq.rows() + static_cast<Eigen::Index>(k)] = trial.ineq[rows[k]];
  }
  return -A.completeOrthogonalDecomposition().solve(c);
}

Eigen::MatrixXd make_positive_definite(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
  const double floor = std::max(1e-8, 1e-8 * ev.maxCoeff());
  ev = ev.cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd clip_to_bounds(const NlpProblem& p, Eigen::VectorXd x) {
  if (p.lower.size()) x = x.cwiseMax(p.lower);
  if (p.upper.size()) x = x.cwiseMin(p.upper);
  return x;
}

}  // namespace

std::string to_string(SqpStatus status) {
  switch (status) {
    case SqpStatus::Converged: return "converged";
    case SqpStatus::Infeasible: return "infeasible";
    case SqpStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

Jacobian finite_difference_jacobian(const NlpProblem& problem, const Eigen::VectorXd& x,
                                    const NlpValues& at_x, double rel_step, int workers) {
  const int n = problem.n;
  Jacobian J;
  J.grad.resize(n);
  J.eq.resize(problem.n_eq, n);
  J.ineq.resize(problem.n_ineq, n);

  std::atomic<int> evals{0};
  std::atomic<int> one_sided{0};
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;

  auto column = [&](int i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    const double up_room = problem.upper.size() ? problem.upper[i] - x[i] : kInf;
    const double lo_room = problem.lower.size() ? x[i] - problem.lower[i] : kInf;
    NlpValues plus, minus;
    plus.ok = minus.ok = false;
    Eigen::VectorXd xp = x;
    if (up_room >= h) {
      xp[i] = x[i] + h;
      plus = safe_eval(problem, xp);
      ++evals;
    }
    if (lo_room >= h) {
      xp[i] = x[i] - h;
      minus = safe_eval(problem, xp);
      ++evals;
    }
    double f_diff;
    Eigen::VectorXd e_diff, i_diff;
    if (plus.ok && minus.ok) {
      f_diff = (plus.f - minus.f) / (2.0 * h);
      e_diff = (plus.eq - minus.eq) / (2.0 * h);
      i_diff = (plus.ineq - minus.ineq) / (2.0 * h);
    } else if (plus.ok) {
      f_diff = (plus.f - at_x.f) / h;
      e_diff = (plus.eq - at_x.eq) / h;
      i_diff = (plus.ineq - at_x.ineq) / h;
      ++one_sided;
    } else if (minus.ok) {
      f_diff = (at_x.f - minus.f) / h;
      e_diff = (at_x.eq - minus.eq) / h;
      i_diff = (at_x.ineq - minus.ineq) / h;
      ++one_sided;
    } else {
      throw Error("finite-difference probes failed for variable " + std::to_string(i));
    }
    J.grad[i] = f_diff;
    J.eq.col(i) = e_diff;
    J.ineq.col(i) = i_diff;
  };

  auto worker = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        column(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::clamp(w, 1, std::max(1, n));
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int k = 0; k < w; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  J.evaluations = evals;
  J.one_sided = one_sided;
  return J;
}

SqpResult solve_sqp(const NlpProblem& problem, const Eigen::VectorXd& x0, const SqpOptions& options) {
  const int n = problem.n;
  if (x0.size() != n) throw DomainError("solve_sqp: starting point has the wrong size");
  if (!problem.evaluate) throw DomainError("solve_sqp: no evaluation callback");

  SqpResult res;
  Eigen::VectorXd x = clip_to_bounds(problem, x0);
  NlpValues v = safe_eval(problem, x);
  ++res.evaluations;
  if (!v.ok) throw SimulationError("solve_sqp: model cannot be evaluated at the starting point");

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(problem.n_eq);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.n_ineq);
  double rho = 1.0;
  bool reset_last = false;
  int stalled = 0;
  int stuck_infeasible = 0;
  int restorations = 0;

  Eigen::VectorXd s_prev;
  Eigen::VectorXd gl_prev;
  Jacobian J;

  res.status = SqpStatus::MaxIterations;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    if (!reset_last) {
      J = finite_difference_jacobian(problem, x, v, options.fd_step, options.workers);
      res.evaluations += J.evaluations;
    }

    if (options.hessian == HessianMode::FiniteDifference) {
      const Eigen::VectorXd g0 = lagrangian_gradient(J, y, z);
      Eigen::MatrixXd H(n, n);
      for (int j = 0; j < n; ++j) {
        double step = options.hessian_step * std::max(1.0, std::abs(x[j]));
        if (problem.upper.size() && x[j] + step > problem.upper[j]) step = -step;
        Eigen::VectorXd xp = x;
        xp[j] += step;
        const NlpValues vp = safe_eval(problem, xp);
        ++res.evaluations;
        if (!vp.ok) {
          H.col(j) = B.col(j);
          continue;
        }
        const Jacobian Jp = finite_difference_jacobian(problem, xp, vp, options.fd_step, options.workers);
        res.evaluations += Jp.evaluations;
        H.col(j) = (lagrangian_gradient(Jp, y, z) - g0) / step;
      }
      B = make_positive_definite(H);
    } else if (s_prev.size()) {
      const Eigen::VectorXd yk = lagrangian_gradient(J, y, z) - gl_prev;
      const Eigen::VectorXd Bs = B * s_prev;
      const double sBs = s_prev.dot(Bs);
      const double sy = s_prev.dot(yk);
      if (sBs > 0.0) {
        const double theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
        const Eigen::VectorXd r = theta * yk + (1.0 - theta) * Bs;
        const double sr = s_prev.dot(r);
        if (sr > 1e-14 * sBs) {
          B += r * r.transpose() / sr - Bs * Bs.transpose() / sBs;
          B = 0.5 * (B + B.transpose());
        }
      }
    }

    BoxRows box = box_rows(problem, x, true);
    Subproblem sp = solve_subproblem(problem, B, J, v, box);
    if (!sp.ok) {
      // The step cap may be what makes the linearisation inconsistent.
      const BoxRows loose = box_rows(problem, x, false);
      sp = solve_subproblem(problem, B, J, v, loose);
      if (sp.ok) box = loose;
    }
    if (!sp.ok) {
      const double rho_el = std::max({rho, 10.0, 10.0 * J.grad.cwiseAbs().maxCoeff()});
      sp = solve_elastic(problem, B, J, v, box, rho_el);
      if (!sp.ok) {
        B = Eigen::MatrixXd::Identity(n, n);
        sp = solve_elastic(problem, B, J, v, box, rho_el);
      }
      if (!sp.ok) {
        res.status = SqpStatus::Infeasible;
        break;
      }
      rho = std::max(rho, rho_el);
    }

    Eigen::VectorXd bound_grad = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < box.var.size(); ++k)
      if (box.is_bound[k]) bound_grad[box.var[k]] += box.sign[k] * sp.z_box[static_cast<Eigen::Index>(k)];
    const Eigen::VectorXd grad_l = lagrangian_gradient(J, sp.y, sp.z) + bound_grad;
    res.kkt = grad_l.cwiseAbs().maxCoeff();
    res.eq_violation = eq_violation(v);
    res.ineq_violation = ineq_violation(v);
    const bool feasible = res.eq_violation <= options.eq_tol && res.ineq_violation <= options.ineq_tol;

    if (!sp.elastic && res.kkt <= options.kkt_tol && feasible) {
      y = sp.y;
      z = sp.z;
      res.status = SqpStatus::Converged;
      break;
    }

    const Eigen::VectorXd& d = sp.d;
    const double lin_viol = (v.eq + J.eq * d).cwiseAbs().sum() + (v.ineq + J.ineq * d).cwiseMax(0.0).sum();
    if (sp.elastic && !feasible && lin_viol >= (1.0 - 1e-6) * l1_violation(v)) {
      if (++stuck_infeasible >= 2) {
        res.status = SqpStatus::Infeasible;
        break;
      }
    } else {
      stuck_infeasible = 0;
    }

    const double mult_max = std::max(sp.y.size() ? sp.y.cwiseAbs().maxCoeff() : 0.0,
                                     sp.z.size() ? sp.z.cwiseAbs().maxCoeff() : 0.0);
    if (!sp.elastic) rho = std::max(1.1 * mult_max, 0.5 * (rho + mult_max));

    const double phi0 = merit(v, rho);
    double slope = J.grad.dot(d) - rho * (l1_violation(v) - lin_viol);
    if (slope > 0.0) slope = -std::abs(J.grad.dot(d));

    constexpr double eta = 1e-4;
    double alpha = 1.0;
    Eigen::VectorXd x_new;
    NlpValues v_new;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      x_new = clip_to_bounds(problem, x + alpha * d);
      v_new = safe_eval(problem, x_new);
      ++res.evaluations;
      if (merit(v_new, rho) <= phi0 + eta * alpha * slope) {
        accepted = true;
        break;
      }
      if (ls == 0 && v_new.ok) {
        const Eigen::VectorXd x_soc = clip_to_bounds(problem, x + d + second_order_correction(J, v_new));
        NlpValues v_soc = safe_eval(problem, x_soc);
        ++res.evaluations;
        if (merit(v_soc, rho) <= phi0 + eta * slope) {
          x_new = x_soc;
          v_new = v_soc;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }

    if (options.on_iterate) {
      SqpIterate info;
      info.iteration = it;
      info.f = v.f;
      info.kkt = res.kkt;
      info.eq_violation = res.eq_violation;
      info.ineq_violation = res.ineq_violation;
      info.step = d.cwiseAbs().maxCoeff();
      info.alpha = accepted ? alpha : 0.0;
      info.elastic = sp.elastic;
      options.on_iterate(info);
    }

    if (!accepted) {
      if (reset_last) {
        // Restoration: project back onto the linearised constraints and
        // keep going if that lowers the violation.
        const Eigen::VectorXd x_r = clip_to_bounds(problem, x + second_order_correction(J, v));
        const NlpValues v_r = safe_eval(problem, x_r);
        ++res.evaluations;
        if (v_r.ok && l1_violation(v_r) < 0.5 * l1_violation(v)) {
          x = x_r;
          v = v_r;
          reset_last = false;
          s_prev.resize(0);
          if (++restorations <= 5) continue;
        }
        const bool feasible = res.eq_violation <= options.eq_tol && res.ineq_violation <= options.ineq_tol;
        res.status = feasible || restorations > 5 ? SqpStatus::MaxIterations : SqpStatus::Infeasible;
        ++it;
        break;
      }
      B = Eigen::MatrixXd::Identity(n, n);
      s_prev.resize(0);
      reset_last = true;
      continue;
    }
    reset_last = false;

    const double change = (x_new - x).cwiseAbs().maxCoeff();
    stalled = change < 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff()) ? stalled + 1 : 0;

    y = sp.y;
    z = sp.z;
    gl_prev = lagrangian_gradient(J, y, z);
    s_prev = x_new - x;
    x = x_new;
    v = v_new;
    if (stalled >= 3) {
      ++it;
      break;
    }
  }

  res.x = x;
  res.values = v;
  res.lambda_eq = y;
  res.lambda_ineq = z;
  res.iterations = it;
  res.eq_violation = eq_violation(v);
  res.ineq_violation = ineq_violation(v);
  for (int i = 0; i < v.eq.size(); ++i)
    if (std::abs(v.eq[i]) > options.eq_tol) res.violated_eq.push_back(i);
  for (int i = 0; i < v.ineq.size(); ++i)
    if (v.ineq[i] > options.ineq_tol) res.violated_ineq.push_back(i);
  return res;
}

}  // namespace lvopt
