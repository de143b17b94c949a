#pragma once

#include <span>
#include <vector>

#include "lvopt/earth.hpp"

namespace lvopt {

struct StagingProblem {
  std::vector<double> v_ex;  ///< exhaust velocity per stage [m/s]
  std::vector<double> eps;   ///< structural fraction per stage
  double dv_req = 0.0;       ///< required ideal velocity increment [m/s]
  double m_payload = 0.0;    ///< [kg]

  /// Upper bound of the attainable ideal velocity, sum v_ex ln(1/eps).
  double max_dv() const;
  void validate() const;
};

struct MassRollup {
  std::vector<double> m_s;
  std::vector<double> m_p;
  std::vector<double> m_initial;  ///< stage k ignition mass (stage k and above + payload)
  double m_liftoff = 0.0;
};

struct StagingSolution {
  std::vector<double> mu;  ///< mass ratio per stage
  std::vector<double> dv;  ///< v_ex ln(mu) per stage [m/s]
  std::vector<double> m_s;
  std::vector<double> m_p;
  double m_liftoff = 0.0;
  double ratio = 0.0;       ///< m_liftoff / m_payload
  double multiplier = 0.0;  ///< Lagrange multiplier of the velocity constraint
};

/// Product over stages of mu (1 - eps) / (1 - mu eps). Throws DomainError
/// when some mu eps >= 1 or mu < 1.
double liftoff_ratio(std::span<const double> mu, std::span<const double> eps);

/// Top-down mass recursion from the payload.
MassRollup mass_rollup(std::span<const double> mu, std::span<const double> eps, double m_payload);

/// Minimum lift-off mass split of dv_req among the stages.
///
/// Stationarity of the Lagrangian gives each stage's mass ratio in closed
/// form from one scalar multiplier, mu_k = (1 - sigma / v_ex_k) / eps_k with
/// sigma the inverse multiplier; the ideal velocity is monotone in sigma and
/// sigma is found by bisection on (0, max v_ex_k (1 - eps_k)]. Stages whose
/// closed form drops below mu = 1 are held at 1 (KKT bound).
StagingSolution optimal_staging(const StagingProblem& problem);

/// Mass ratios for a prescribed per-stage velocity split.
StagingSolution staging_for_split(const StagingProblem& problem, std::span<const double> dv);

/// v_f - v_i for a circular target at `altitude`: orbital speed minus the
/// surface rotation speed at the site.
double required_dv(double target_altitude, const GeodeticPoint& site, const EarthModel& earth);

}  // namespace lvopt
