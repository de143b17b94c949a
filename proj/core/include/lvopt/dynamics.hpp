#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lvopt/earth.hpp"
#include "lvopt/vehicle.hpp"

namespace lvopt {

enum class PhaseKind { Burn, Coast };

enum class EventKind { StageSeparation, FairingSeparation, OrbitInsertion };

struct PhaseEvent {
  EventKind kind;
  int stage = -1;  ///< zero-based stage index for StageSeparation

  friend bool operator==(const PhaseEvent&, const PhaseEvent&) = default;
};

/// Pitch and yaw of the thrust axis in the launch frame [rad].
struct Attitude {
  double pitch = 0.0;
  double yaw = 0.0;
};

/// One interval of the flight plan. Events happen at the phase end.
///
/// Burn phases either have a fixed duration or receive a weighted share of
/// whatever burn time their stage has left after the fixed phases; the
/// resolved duration is written to `duration` by resolve_phases().
struct Phase {
  int index = 0;
  std::string label;
  PhaseKind kind = PhaseKind::Burn;
  int stage = -1;               ///< burning stage (burn phases only)
  double fixed_duration = 0.0;  ///< > 0: fixed [s]; coasts must set this
  double weight = 1.0;          ///< share of the stage's remaining burn time
  std::vector<PhaseEvent> end_events;
  bool gravity_turn = false;           ///< member of the gravity-turn set
  std::optional<Attitude> fixed_attitude;  ///< end node not a design variable
  double duration = 0.0;

  bool attitude_free() const { return !fixed_attitude.has_value(); }
  bool has_event(EventKind kind) const;
};

using PhaseSchedule = std::vector<Phase>;

/// Knobs of the default ascent topology.
struct ScheduleOptions {
  double vertical_rise = 8.0;       ///< [s]
  int burn_subphases = 3;           ///< per stage
  int gravity_turn_subphases = 1;   ///< trailing stage-1 sub-phases in the gravity-turn set
  int fairing_stage = 1;            ///< zero-based stage during whose burn the fairing goes
  int fairing_subphase = 1;         ///< 1-based sub-phase at whose end the fairing goes
  std::vector<double> coasts;       ///< coast after stage k's burn (size n-1); 0 = none
};

/// vertical rise -> stage-1 pitch-over and gravity-turn sub-phases -> upper
/// stage sub-phases with optional coasts in between -> orbit insertion.
PhaseSchedule default_schedule(int n_stages, const ScheduleOptions& options);

/// Fills in indices and durations; throws DomainError when the schedule is
/// inconsistent with the vehicle.
PhaseSchedule resolve_phases(PhaseSchedule schedule, const VehicleSpec& vehicle);

/// Launch-centred frame frozen in inertial space at ignition: x horizontal
/// along the launch azimuth, z local up, y completes the right-handed triad.
struct LaunchFrame {
  Vec3 x;
  Vec3 y;
  Vec3 z;

  static LaunchFrame at(const GeodeticPoint& site, double azimuth, const EarthModel& earth);
  Vec3 to_inertial(const Vec3& local) const { return x * local.x() + y * local.y() + z * local.z(); }
};

/// e_T = [cos(pitch) cos(yaw), sin(yaw), sin(pitch) cos(yaw)] in the launch frame.
Vec3 thrust_direction(double pitch, double yaw, const LaunchFrame& frame);

/// End-of-phase attitude nodes with linear interpolation inside phases.
struct ControlProfile {
  Attitude initial;
  std::vector<Attitude> nodes;  ///< one per phase

  /// Attitude at fraction in [0, 1] of phase p.
  Attitude at(std::size_t phase, double fraction) const;
};

enum LossIndex : std::size_t { kLossPressure = 0, kLossDrag = 1, kLossGravity = 2, kLossSteering = 3 };
using Losses = std::array<double, 4>;

inline double total(const Losses& l) { return l[0] + l[1] + l[2] + l[3]; }

struct StateVector {
  double t = 0.0;
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  std::vector<double> propellant;  ///< remaining per stage [kg]
  int first_stage = 0;             ///< lowest stage still attached
  bool fairing_attached = true;
  Losses losses{};

  /// Mass ledger: payload + attached stages + fairing if still on.
  double mass(const VehicleSpec& vehicle) const;
};

StateVector initial_state(const VehicleSpec& vehicle, const InertialState& launch);

struct Forces {
  Vec3 thrust;
  Vec3 aero;
  Vec3 gravity;
  double mass;
  double pressure;  ///< ambient [Pa]
};

/// Thrust, drag and gravity on the vehicle. `e_t` is the unit thrust axis;
/// thrust is zero in coast phases. Throws DomainError on non-positive mass.
Forces forces(const StateVector& state, const Phase& phase, const Vec3& e_t,
              const VehicleSpec& vehicle, const EarthModel& earth);

struct StateRate {
  Vec3 dr;
  Vec3 dv;
  double dpropellant;  ///< of the burning stage
  Losses dlosses;
};

/// Equations of motion and velocity-loss rates. Each loss rate is the
/// component of the corresponding force per unit mass that opposes the
/// inertial velocity, so the four integrals close the speed budget.
StateRate derivatives(const StateVector& state, const Phase& phase, const Vec3& e_t,
                      const VehicleSpec& vehicle, const EarthModel& earth);

struct Sample {
  StateVector state;
  int phase = 0;
  Vec3 thrust_dir = Vec3::Zero();
  double mass = 0.0;
};

struct PhaseRecord {
  int index = 0;
  StateVector start;  ///< after the previous phase's events
  StateVector end;    ///< before this phase's events
  std::size_t first_sample = 0;
  std::size_t last_sample = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<PhaseRecord> phases;
  std::vector<double> stage_dv;  ///< sum of v_ex ln(m0/m1) over each stage's burn phases
  Losses losses{};
  double liftoff_mass = 0.0;

  const StateVector& final_state() const { return phases.back().end; }
};

struct FlightPlan {
  VehicleSpec vehicle;
  PhaseSchedule phases;  ///< resolved
  ControlProfile controls;
  LaunchFrame frame;
  InertialState launch;
  int nodes_per_phase = 50;
};

/// Fixed-step RK4 over one phase, `plan.nodes_per_phase` steps. Returns the
/// samples including the initial state. Burn phases end with the stage's
/// allotted propellant consumed.
std::vector<Sample> integrate_phase(const StateVector& start, std::size_t phase,
                                    const FlightPlan& plan, const EarthModel& earth);

/// Applies a phase's end events to a state.
void apply_events(StateVector& state, const Phase& phase);

/// Chains all phases from the launch state.
Trajectory simulate(const FlightPlan& plan, const EarthModel& earth);

}  // namespace lvopt
