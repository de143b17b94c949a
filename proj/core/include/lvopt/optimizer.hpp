#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lvopt/dynamics.hpp"
#include "lvopt/flight_outputs.hpp"
#include "lvopt/sqp.hpp"

namespace lvopt {

/// Box on the impact point of the spent stage `stage` (zero-based), checked
/// right after its separation. Unbounded sides stay at +-infinity.
struct IipBound {
  int stage = 0;
  double lat_lo = -std::numeric_limits<double>::infinity();
  double lat_hi = std::numeric_limits<double>::infinity();
  double lon_lo = -std::numeric_limits<double>::infinity();
  double lon_hi = std::numeric_limits<double>::infinity();
};

struct MissionSpec {
  std::string name;
  double h_req = 0.0;      ///< insertion altitude [m]
  double gamma_req = 0.0;  ///< inertial flight-path angle [rad]
  double v_i_req = 0.0;    ///< inertial speed [m/s]
  double i_req = 0.0;      ///< inclination [rad]
  std::optional<double> q_max;  ///< [Pa]
  std::vector<IipBound> iip_bounds;
  bool gravity_turn = true;  ///< impose alpha = 0 at the gravity-turn nodes
  GeodeticPoint site{};
  double m_payload = 0.0;
  double m_fairing = 0.0;
  std::optional<double> launch_azimuth;  ///< launch-frame heading [rad]; derived when empty
  bool southbound = true;                ///< branch of the derived heading

  void validate() const;
};

/// Speed of a circular orbit at altitude h.
double circular_speed(double h, const EarthModel& earth);

/// Heading that puts a launch from the site into the target inclination,
/// corrected for the rotation of the launch site.
double launch_azimuth(const MissionSpec& mission, const EarthModel& earth);

/// Physical decision variables.
struct DecisionVector {
  std::vector<double> m_s;    ///< [kg] per stage (empty when masses are frozen)
  double m_payload = 0.0;     ///< [kg] (payload-maximisation mode only)
  std::vector<double> theta;  ///< [rad] per free phase end
  std::vector<double> psi;    ///< [rad] per free phase end
};

/// Sizing: stage structural masses free, payload fixed, minimise lift-off mass.
/// PayloadMax: stage masses frozen at the template, payload free, maximise it.
enum class ProblemMode { Sizing, PayloadMax };

/// Scale of the packed mass block: masses are carried in Mg.
inline constexpr double kMassScale = 1e3;
/// Scale of the objective [kg].
inline constexpr double kObjectiveScale = 1e4;

struct ProblemOptions {
  ProblemMode mode = ProblemMode::Sizing;
  int nodes_per_phase = 50;
  /// Also impose alpha = 0 mid-phase. Over-determined with one node per
  /// phase end, so off by default.
  bool gravity_turn_midpoints = false;
};

struct Evaluation {
  bool ok = false;
  std::string failure;
  double objective = 0.0;  ///< lift-off mass or -payload [kg]
  Eigen::VectorXd eq;      ///< scaled
  Eigen::VectorXd ineq;    ///< scaled, <= 0 feasible
  VehicleSpec vehicle;
  Trajectory trajectory;
  OrbitalElements insertion{};
  std::vector<double> gt_alpha;      ///< alpha at the gravity-turn check points [rad]
  double gt_alpha_max = 0.0;         ///< over all gravity-turn samples [rad]
  double max_q = 0.0;                ///< [Pa]
  std::vector<IipResult> separation_iip;  ///< per stage separation
};

/// Point where alpha = 0 is imposed: the end node of `phase`, or its
/// midpoint sample.
struct GravityTurnCheck {
  int phase = 0;
  bool midpoint = false;
};

/// Sizing problem for one mission, vehicle template and phase schedule. The packed
/// vector is [mass block | theta nodes | psi nodes]; the mass block holds
/// m_s per stage in Mg (Sizing) or the payload in Mg (PayloadMax).
class AscentProblem {
 public:
  AscentProblem(MissionSpec mission, VehicleSpec vehicle, PhaseSchedule schedule, EarthModel earth = {},
                ProblemOptions options = {});

  int n_stages() const { return static_cast<int>(vehicle_.stages.size()); }
  int n_free_phases() const { return static_cast<int>(free_phases_.size()); }
  int n_mass() const { return options_.mode == ProblemMode::Sizing ? n_stages() : 1; }
  int size() const { return n_mass() + 2 * n_free_phases(); }
  int n_eq() const { return 4 + static_cast<int>(gt_checks_.size()); }
  int n_ineq() const;

  const std::vector<int>& free_phases() const { return free_phases_; }
  const std::vector<GravityTurnCheck>& gravity_turn_checks() const { return gt_checks_; }
  std::vector<std::string> eq_names() const;
  std::vector<std::string> ineq_names() const;

  Eigen::VectorXd pack(const DecisionVector& d) const;
  DecisionVector unpack(const Eigen::VectorXd& x) const;

  VehicleSpec vehicle_for(const DecisionVector& d) const;
  FlightPlan plan_for(const DecisionVector& d) const;

  Evaluation evaluate(const Eigen::VectorXd& x) const;
  NlpProblem nlp() const;

  /// Template masses with a smooth pitch-down program and zero yaw.
  DecisionVector initial_guess() const;

  const MissionSpec& mission() const { return mission_; }
  const VehicleSpec& vehicle_template() const { return vehicle_; }
  const PhaseSchedule& schedule() const { return schedule_; }
  const EarthModel& earth() const { return earth_; }
  const ProblemOptions& options() const { return options_; }
  double azimuth() const { return azimuth_; }

 private:
  MissionSpec mission_;
  VehicleSpec vehicle_;
  PhaseSchedule schedule_;
  EarthModel earth_;
  ProblemOptions options_;
  double azimuth_ = 0.0;
  LaunchFrame frame_;
  InertialState launch_;
  std::vector<int> free_phases_;   ///< phase indices whose end node is a variable
  std::vector<GravityTurnCheck> gt_checks_;
  std::vector<int> separations_;   ///< phase index of each stage separation
  int n_samples_ = 0;
};

struct OptimizerOptions {
  int nodes_per_phase = 50;
  SqpOptions sqp;
};

struct OptimizationResult {
  DecisionVector decision;
  VehicleSpec vehicle;
  double m_liftoff = 0.0;
  double payload_ratio = 0.0;  ///< m_payload / m_liftoff
  std::vector<double> dv;      ///< per stage [m/s]
  Losses losses{};
  double loss_total = 0.0;
  double dv_required = 0.0;    ///< v_f - v_i of the target [m/s]
  Eigen::VectorXd eq;
  Eigen::VectorXd ineq;
  std::vector<std::string> eq_names;
  std::vector<std::string> ineq_names;
  std::vector<std::string> violated;
  SqpStatus status = SqpStatus::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
  double kkt = 0.0;
  double wall_time = 0.0;  ///< [s]
  Evaluation evaluation;   ///< full evaluation at the returned point
};

/// Fills the result fields from an evaluation.
OptimizationResult summarize(const AscentProblem& problem, const Eigen::VectorXd& x, const Evaluation& eval);

/// Solves P1. When x0 is empty the problem's initial guess is used.
OptimizationResult solve_simultaneous(const MissionSpec& mission, const VehicleSpec& vehicle,
                                      const PhaseSchedule& schedule, const std::optional<DecisionVector>& x0,
                                      const OptimizerOptions& options, const EarthModel& earth = {});

/// Solves an already-built problem from a packed start point.
OptimizationResult solve_problem(const AscentProblem& problem, const Eigen::VectorXd& x0, const SqpOptions& options);

}  // namespace lvopt
