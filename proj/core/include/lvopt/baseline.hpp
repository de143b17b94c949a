#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lvopt/optimizer.hpp"
#include "lvopt/staging.hpp"

namespace lvopt {

/// Per-stage velocity losses [m/s]: each accumulator's increment over a
/// stage's burn phases. Coast phases count towards the next burn stage (the
/// last stage for a trailing coast). The buckets sum to the trajectory's
/// total loss.
std::vector<double> attribute_losses(const Trajectory& trajectory, const PhaseSchedule& schedule, int n_stages);

enum class BaselineStatus { Converged, Diverged, MaxIterations };

std::string to_string(BaselineStatus status);

struct BaselineOptions {
  int max_iter = 50;
  double tol = 1e-3;      ///< relative lift-off mass change that counts as converged
  double damping = 0.0;   ///< weight of the previous assumption in the loss update, [0, 1)
  int divergence_window = 3;  ///< consecutive growing changes that count as divergence
  bool warm_start = false;    ///< start each attitude solve from the previous one instead of the reference program
  bool loss_free_start = false;  ///< first staging assumes zero losses instead of the reference trajectory's
  OptimizerOptions inner;
};

struct BaselineIteration {
  int index = 0;
  std::vector<double> assumed_losses;
  StagingSolution staging;
  double payload_max = 0.0;   ///< from the attitude-only trajectory optimisation [kg]
  double m_liftoff = 0.0;     ///< mission payload over the achieved payload ratio [kg]
  std::vector<double> computed_losses;
  SqpStatus inner_status = SqpStatus::MaxIterations;
  double change = 0.0;        ///< relative lift-off change from the previous iteration
};

struct BaselineResult {
  std::vector<BaselineIteration> iterations;
  BaselineStatus status = BaselineStatus::MaxIterations;
  std::string reason;
  std::optional<OptimizationResult> final;  ///< last inner solve with the staged vehicle
  double dv_required = 0.0;
  double wall_time = 0.0;
};

/// Traditional staging <-> trajectory iteration. Each pass sizes the stages
/// for the ideal (loss-free) velocity split plus the assumed per-stage
/// losses, maximises the payload of that frozen vehicle over the attitude
/// nodes under the mission's constraints, and re-assigns the losses of the
/// resulting trajectory.
BaselineResult solve_sequential(const MissionSpec& mission, const VehicleSpec& vehicle, const PhaseSchedule& schedule,
                                const BaselineOptions& options, const EarthModel& earth = {});

}  // namespace lvopt
