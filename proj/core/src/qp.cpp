#include "lvopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lvopt {

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Largest step keeping v + a dv >= 0 (infinite if unconstrained).
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  }
  return a;
}

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
  const Eigen::Index n = qp.H.rows();
  const Eigen::Index me = qp.A.rows();
  const Eigen::Index mi = qp.G.rows();
  QpResult res;
  res.x = Eigen::VectorXd::Zero(n);
  res.y = Eigen::VectorXd::Zero(me);
  res.z = Eigen::VectorXd::Zero(mi);

  const double reg = 1e-13 * std::max(1.0, qp.H.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd kkt(n + me, n + me);
  auto factor = [&](const Eigen::MatrixXd& k) {
    kkt.setZero();
    kkt.topLeftCorner(n, n) = k;
    if (me > 0) {
      kkt.topRightCorner(n, me) = qp.A.transpose();
      kkt.bottomLeftCorner(me, n) = qp.A;
      kkt.bottomRightCorner(me, me).diagonal().setConstant(-reg);
    }
    return Eigen::PartialPivLU<Eigen::MatrixXd>(kkt);
  };

  const double scale_c = 1.0 + inf_norm(qp.c);
  const double scale_b = 1.0 + inf_norm(qp.b);
  const double scale_h = 1.0 + inf_norm(qp.h);

  if (mi == 0) {
    const auto lu = factor(qp.H);
    Eigen::VectorXd rhs(n + me);
    rhs << -qp.c, qp.b;
    const Eigen::VectorXd sol = lu.solve(rhs);
    res.x = sol.head(n);
    res.y = sol.tail(me);
    const double rd = inf_norm(qp.H * res.x + qp.c + qp.A.transpose() * res.y);
    const double re = inf_norm(qp.A * res.x - qp.b);
    res.converged = std::isfinite(rd) && rd <= 1e3 * options.tol * scale_c && re <= 1e3 * options.tol * scale_b;
    res.iterations = 1;
    return res;
  }

  Eigen::VectorXd s = (qp.h - qp.G * res.x).cwiseMax(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(mi);
  Eigen::VectorXd& x = res.x;
  Eigen::VectorXd& y = res.y;

  for (int it = 0; it < options.max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd rd = qp.H * x + qp.c + qp.A.transpose() * y + qp.G.transpose() * z;
    const Eigen::VectorXd re = qp.A * x - qp.b;
    const Eigen::VectorXd ri = qp.G * x + s - qp.h;
    const double mu = s.dot(z) / static_cast<double>(mi);
    if (!std::isfinite(mu) || !std::isfinite(inf_norm(rd))) break;
    if (inf_norm(rd) <= options.tol * scale_c && inf_norm(re) <= options.tol * scale_b &&
        inf_norm(ri) <= options.tol * scale_h && mu <= options.tol * 1e-2) {
      res.converged = true;
      break;
    }

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    const Eigen::MatrixXd k = qp.H + qp.G.transpose() * w.asDiagonal() * qp.G;
    const auto lu = factor(k);

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                         Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      const Eigen::VectorXd t = (-rc + z.cwiseProduct(ri)).cwiseQuotient(s);
      Eigen::VectorXd rhs(n + me);
      rhs.head(n) = -rd - qp.G.transpose() * t;
      rhs.tail(me) = -re;
      const Eigen::VectorXd sol = lu.solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(me);
      ds = -ri - qp.G * dx;
      dz = t + w.cwiseProduct(qp.G * dx);
    };

    Eigen::VectorXd dx, dy, ds, dz;
    direction(s.cwiseProduct(z), dx, dy, ds, dz);
    const double a_aff = std::min({1.0, max_step(s, ds), max_step(z, dz)});
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(mi);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    const Eigen::VectorXd rc =
        s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(mi, sigma * mu);
    direction(rc, dx, dy, ds, dz);
    const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
    x += a * dx;
    y += a * dy;
    s += a * ds;
    z += a * dz;
  }
  res.z = z;
  return res;
}

}  // namespace lvopt
