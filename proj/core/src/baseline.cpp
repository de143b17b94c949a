#include "lvopt/baseline.hpp"

#include <chrono>
#include <cmath>

#include "lvopt/errors.hpp"

namespace lvopt {

std::vector<double> attribute_losses(const Trajectory& trajectory, const PhaseSchedule& schedule, int n_stages) {
  if (n_stages <= 0) throw DomainError("attribute_losses: need at least one stage");
  if (trajectory.phases.size() > schedule.size()) throw DomainError("attribute_losses: trajectory longer than schedule");
  std::vector<double> out(static_cast<std::size_t>(n_stages), 0.0);
  for (std::size_t i = 0; i < trajectory.phases.size(); ++i) {
    int stage = -1;
    for (std::size_t j = i; j < schedule.size() && stage < 0; ++j)
      if (schedule[j].kind == PhaseKind::Burn) stage = schedule[j].stage;
    if (stage < 0 || stage >= n_stages) stage = n_stages - 1;
    const PhaseRecord& rec = trajectory.phases[i];
    out[static_cast<std::size_t>(stage)] += total(rec.end.losses) - total(rec.start.losses);
  }
  return out;
}

std::string to_string(BaselineStatus status) {
  switch (status) {
    case BaselineStatus::Converged: return "converged";
    case BaselineStatus::Diverged: return "diverged";
    case BaselineStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

namespace {

VehicleSpec frozen_vehicle(const VehicleSpec& base, const StagingSolution& staging, double m_payload) {
  VehicleSpec v = base;
  for (std::size_t k = 0; k < v.stages.size(); ++k) v.stages[k] = v.stages[k].with_structural_mass(staging.m_s[k]);
  v.m_payload = m_payload;
  return v;
}

}  // namespace

BaselineResult solve_sequential(const MissionSpec& mission, const VehicleSpec& vehicle, const PhaseSchedule& schedule,
                                const BaselineOptions& options, const EarthModel& earth) {
  mission.validate();
  vehicle.validate();
  if (!(options.damping >= 0.0 && options.damping < 1.0)) throw DomainError("baseline: damping must lie in [0, 1)");
  if (options.max_iter < 1) throw DomainError("baseline: max_iter must be positive");

  const auto start = std::chrono::steady_clock::now();
  const int n = static_cast<int>(vehicle.stages.size());
  BaselineResult result;
  result.dv_required = required_dv(mission.h_req, mission.site, earth) +
                       (mission.v_i_req - circular_speed(mission.h_req, earth));

  StagingProblem sp;
  for (const StageSpec& s : vehicle.stages) {
    sp.v_ex.push_back(s.v_ex);
    sp.eps.push_back(s.eps);
  }
  sp.m_payload = mission.m_payload;
  sp.dv_req = result.dv_required;
  const StagingSolution ideal = optimal_staging(sp);

  ProblemOptions po;
  po.mode = ProblemMode::PayloadMax;
  po.nodes_per_phase = options.inner.nodes_per_phase;

  // Starting losses: the reference vehicle flown on the default program.
  std::vector<double> assumed;
  std::vector<double> theta, psi;
  {
    VehicleSpec ref = vehicle;
    ref.m_payload = mission.m_payload;
    const AscentProblem p0(mission, ref, schedule, earth, po);
    const DecisionVector d0 = p0.initial_guess();
    const Evaluation e0 = p0.evaluate(p0.pack(d0));
    if (!e0.ok) throw SimulationError("baseline: reference trajectory fails: " + e0.failure);
    assumed = options.loss_free_start ? std::vector<double>(static_cast<std::size_t>(n), 0.0)
                                      : attribute_losses(e0.trajectory, p0.schedule(), n);
    theta = d0.theta;
    psi = d0.psi;
  }

  auto finish = [&](BaselineStatus status, std::string reason) {
    result.status = status;
    result.reason = std::move(reason);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  double prev_liftoff = 0.0;
  double prev_change = 0.0;
  int growing = 0;
  for (int it = 0; it < options.max_iter; ++it) {
    BaselineIteration rec;
    rec.index = it + 1;
    rec.assumed_losses = assumed;

    std::vector<double> dv(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) dv[static_cast<std::size_t>(k)] = ideal.dv[static_cast<std::size_t>(k)] + assumed[static_cast<std::size_t>(k)];
    try {
      rec.staging = staging_for_split(sp, dv);
    } catch (const DomainError& e) {
      result.iterations.push_back(rec);
      return finish(BaselineStatus::Diverged, std::string("staging infeasible: ") + e.what());
    }

    const VehicleSpec frozen = frozen_vehicle(vehicle, rec.staging, mission.m_payload);
    OptimizationResult inner;
    try {
      const AscentProblem problem(mission, frozen, schedule, earth, po);
      DecisionVector d;
      d.m_payload = mission.m_payload;
      d.theta = theta;
      d.psi = psi;
      inner = solve_problem(problem, problem.pack(d), options.inner.sqp);
    } catch (const Error& e) {
      result.iterations.push_back(rec);
      return finish(BaselineStatus::Diverged, std::string("trajectory optimisation failed: ") + e.what());
    }
    rec.inner_status = inner.status;
    rec.payload_max = inner.decision.m_payload;
    if (!(rec.payload_max > 0.0)) {
      result.iterations.push_back(rec);
      result.final = inner;
      return finish(BaselineStatus::Diverged, "staged vehicle carries no payload at iteration " + std::to_string(it + 1));
    }
    rec.m_liftoff = mission.m_payload * inner.evaluation.vehicle.liftoff_mass() / rec.payload_max;
    rec.computed_losses = attribute_losses(inner.evaluation.trajectory, schedule, n);
    rec.change = it == 0 ? 0.0 : std::abs(rec.m_liftoff - prev_liftoff) / prev_liftoff;
    result.iterations.push_back(rec);
    result.final = inner;

    if (inner.status == SqpStatus::Infeasible) {
      return finish(BaselineStatus::Diverged, "trajectory sub-problem infeasible at iteration " + std::to_string(it + 1));
    }
    if (it > 0 && rec.change <= options.tol * (1.0 - options.damping)) return finish(BaselineStatus::Converged, "");
    if (it > 1) {
      growing = rec.change > prev_change ? growing + 1 : 0;
      if (growing >= options.divergence_window) {
        return finish(BaselineStatus::Diverged,
                      "lift-off change grew for " + std::to_string(growing) + " consecutive iterations");
      }
    }

    prev_liftoff = rec.m_liftoff;
    prev_change = rec.change;
    if (options.warm_start) {
      theta = inner.decision.theta;
      psi = inner.decision.psi;
    }
    for (int k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      assumed[kk] = options.damping * assumed[kk] + (1.0 - options.damping) * rec.computed_losses[kk];
    }
  }
  return finish(BaselineStatus::MaxIterations, "no convergence within " + std::to_string(options.max_iter) + " iterations");
}

}  // namespace lvopt
