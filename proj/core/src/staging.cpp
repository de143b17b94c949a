#include "lvopt/staging.hpp"

#include <cmath>
#include <string>

#include "lvopt/errors.hpp"

namespace lvopt {

double StagingProblem::max_dv() const {
  double s = 0.0;
  for (std::size_t k = 0; k < v_ex.size(); ++k) s += v_ex[k] * std::log(1.0 / eps[k]);
  return s;
}

void StagingProblem::validate() const {
  if (v_ex.empty() || v_ex.size() != eps.size()) {
    throw DomainError("staging problem: need matching, non-empty v_ex and eps lists");
  }
  for (std::size_t k = 0; k < v_ex.size(); ++k) {
    if (!(v_ex[k] > 0.0)) throw DomainError("staging problem: exhaust velocity must be positive");
    if (!(eps[k] > 0.0 && eps[k] < 1.0)) throw DomainError("staging problem: eps must lie in (0, 1)");
  }
  if (!(dv_req > 0.0)) throw DomainError("staging problem: dv_req must be positive");
  if (!(m_payload > 0.0)) throw DomainError("staging problem: payload must be positive");
}

double liftoff_ratio(std::span<const double> mu, std::span<const double> eps) {
  if (mu.size() != eps.size()) throw DomainError("liftoff_ratio: size mismatch");
  double ratio = 1.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(eps[k] > 0.0 && eps[k] < 1.0)) throw DomainError("liftoff_ratio: eps must lie in (0, 1)");
    if (!(mu[k] >= 1.0) || !(mu[k] * eps[k] < 1.0)) {
      throw DomainError("liftoff_ratio: mass ratio of stage " + std::to_string(k + 1) + " outside [1, 1/eps)");
    }
    ratio *= mu[k] * (1.0 - eps[k]) / (1.0 - mu[k] * eps[k]);
  }
  return ratio;
}

MassRollup mass_rollup(std::span<const double> mu, std::span<const double> eps, double m_payload) {
  if (!(m_payload > 0.0)) throw DomainError("mass_rollup: payload must be positive");
  liftoff_ratio(mu, eps);  // domain check
  const std::size_t n = mu.size();
  MassRollup out;
  out.m_s.assign(n, 0.0);
  out.m_p.assign(n, 0.0);
  out.m_initial.assign(n, 0.0);
  double carried = m_payload;
  for (std::size_t j = n; j-- > 0;) {
    const double m_i = carried * mu[j] * (1.0 - eps[j]) / (1.0 - mu[j] * eps[j]);
    const double stage = m_i - carried;
    out.m_initial[j] = m_i;
    out.m_s[j] = eps[j] * stage;
    out.m_p[j] = stage - out.m_s[j];
    carried = m_i;
  }
  out.m_liftoff = carried;
  return out;
}

namespace {

StagingSolution finish(const StagingProblem& problem, std::vector<double> mu) {
  StagingSolution sol;
  const MassRollup roll = mass_rollup(mu, problem.eps, problem.m_payload);
  sol.dv.resize(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) sol.dv[k] = problem.v_ex[k] * std::log(mu[k]);
  sol.mu = std::move(mu);
  sol.m_s = roll.m_s;
  sol.m_p = roll.m_p;
  sol.m_liftoff = roll.m_liftoff;
  sol.ratio = roll.m_liftoff / problem.m_payload;
  return sol;
}

}  // namespace

StagingSolution optimal_staging(const StagingProblem& problem) {
  problem.validate();
  if (!(problem.max_dv() > problem.dv_req)) {
    throw DomainError("optimal_staging: dv_req exceeds the attainable ideal velocity");
  }
  const std::size_t n = problem.v_ex.size();
  auto ratios = [&](double sigma) {
    std::vector<double> mu(n);
    for (std::size_t k = 0; k < n; ++k) {
      mu[k] = std::max(1.0, (1.0 - sigma / problem.v_ex[k]) / problem.eps[k]);
    }
    return mu;
  };
  auto ideal_dv = [&](double sigma) {
    const auto mu = ratios(sigma);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += problem.v_ex[k] * std::log(mu[k]);
    return s;
  };

  double hi = 0.0;  // ideal_dv(hi) = 0
  for (std::size_t k = 0; k < n; ++k) hi = std::max(hi, problem.v_ex[k] * (1.0 - problem.eps[k]));
  double lo = 0.0;  // ideal_dv -> max_dv as sigma -> 0
  if (!(ideal_dv(hi) <= problem.dv_req)) throw Error("optimal_staging: bracket failure");
  // A strictly positive lower end keeps mu eps < 1.
  lo = hi;
  while (ideal_dv(lo) < problem.dv_req) {
    lo *= 0.5;
    if (lo < 1e-300) throw Error("optimal_staging: bracket failure");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g = ideal_dv(mid);
    if (g >= problem.dv_req) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(g - problem.dv_req) <= 1e-12 * problem.dv_req) {
      lo = hi = mid;
      break;
    }
  }
  const double sigma = 0.5 * (lo + hi);
  StagingSolution sol = finish(problem, ratios(sigma));
  sol.multiplier = 1.0 / sigma;
  return sol;
}

StagingSolution staging_for_split(const StagingProblem& problem, std::span<const double> dv) {
  if (dv.size() != problem.v_ex.size()) throw DomainError("staging_for_split: size mismatch");
  std::vector<double> mu(dv.size());
  for (std::size_t k = 0; k < dv.size(); ++k) mu[k] = std::exp(dv[k] / problem.v_ex[k]);
  return finish(problem, std::move(mu));
}

double required_dv(double target_altitude, const GeodeticPoint& site, const EarthModel& earth) {
  const double v_f = std::sqrt(earth.mu / (earth.r_eq + target_altitude));
  const double v_i = earth.omega * (earth.r_eq + site.altitude) * std::cos(site.latitude);
  return v_f - v_i;
}

}  // namespace lvopt
