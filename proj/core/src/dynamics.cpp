#include "lvopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvopt/errors.hpp"

namespace lvopt {

bool Phase::has_event(EventKind k) const {
  return std::any_of(end_events.begin(), end_events.end(),
                     [k](const PhaseEvent& e) { return e.kind == k; });
}

PhaseSchedule default_schedule(int n_stages, const ScheduleOptions& options) {
  if (n_stages < 1) throw DomainError("default_schedule: need at least one stage");
  if (options.burn_subphases < 1) throw DomainError("default_schedule: need at least one sub-phase per stage");
  PhaseSchedule schedule;

  Phase rise;
  rise.label = "vertical rise";
  rise.kind = PhaseKind::Burn;
  rise.stage = 0;
  rise.fixed_duration = options.vertical_rise;
  rise.fixed_attitude = Attitude{kPi / 2.0, 0.0};
  if (options.vertical_rise > 0.0) schedule.push_back(rise);

  for (int k = 0; k < n_stages; ++k) {
    for (int j = 1; j <= options.burn_subphases; ++j) {
      Phase p;
      p.label = "stage " + std::to_string(k + 1) + " burn " + std::to_string(j);
      p.kind = PhaseKind::Burn;
      p.stage = k;
      p.gravity_turn = k == 0 && j > options.burn_subphases - options.gravity_turn_subphases;
      if (k == options.fairing_stage && j == options.fairing_subphase) {
        p.end_events.push_back({EventKind::FairingSeparation, -1});
      }
      if (j == options.burn_subphases) {
        if (k + 1 < n_stages) {
          p.end_events.push_back({EventKind::StageSeparation, k});
        } else {
          p.end_events.push_back({EventKind::OrbitInsertion, -1});
        }
      }
      schedule.push_back(p);
    }
    const double coast = static_cast<std::size_t>(k) < options.coasts.size() ? options.coasts[k] : 0.0;
    if (k + 1 < n_stages && coast > 0.0) {
      Phase c;
      c.label = "coast " + std::to_string(k + 1);
      c.kind = PhaseKind::Coast;
      c.fixed_duration = coast;
      schedule.push_back(c);
    }
  }
  return schedule;
}

PhaseSchedule resolve_phases(PhaseSchedule schedule, const VehicleSpec& vehicle) {
  if (schedule.empty()) throw DomainError("resolve_phases: empty schedule");
  const int n = static_cast<int>(vehicle.stages.size());
  std::vector<double> fixed(n, 0.0);
  std::vector<double> weights(n, 0.0);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    Phase& p = schedule[i];
    p.index = static_cast<int>(i);
    if (p.kind == PhaseKind::Coast) {
      if (!(p.fixed_duration > 0.0)) throw DomainError("coast phase '" + p.label + "' needs a positive duration");
      continue;
    }
    if (p.stage < 0 || p.stage >= n) throw DomainError("burn phase '" + p.label + "' references an unknown stage");
    if (p.fixed_duration > 0.0) {
      fixed[p.stage] += p.fixed_duration;
    } else {
      if (!(p.weight > 0.0)) throw DomainError("burn phase '" + p.label + "' needs a positive weight");
      weights[p.stage] += p.weight;
    }
  }
  std::vector<double> share(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double remaining = vehicle.stages[k].burn_time() - fixed[k];
    if (weights[k] > 0.0) {
      if (!(remaining > 0.0)) {
        throw DomainError("stage " + std::to_string(k + 1) + ": fixed burn phases exceed the burn time");
      }
      share[k] = remaining / weights[k];
    } else if (std::abs(remaining) > 1e-9 * vehicle.stages[k].burn_time()) {
      throw DomainError("stage " + std::to_string(k + 1) + ": burn phases do not consume the propellant load");
    }
  }

  // Event ordering: only the lowest attached stage may burn or separate.
  int first = 0;
  bool fairing_on = true;
  std::vector<int> burns_left(n, 0);
  for (const Phase& p : schedule) {
    if (p.kind == PhaseKind::Burn) ++burns_left[p.stage];
  }
  for (int k = 0; k < n; ++k) {
    if (burns_left[k] == 0) throw DomainError("stage " + std::to_string(k + 1) + " has no burn phase");
  }
  for (Phase& p : schedule) {
    if (p.kind == PhaseKind::Burn) {
      p.duration = p.fixed_duration > 0.0 ? p.fixed_duration : share[p.stage] * p.weight;
      if (p.stage != first) throw DomainError("phase '" + p.label + "' burns a stage that is not the lowest attached");
      --burns_left[p.stage];
    } else {
      p.duration = p.fixed_duration;
    }
    for (const PhaseEvent& e : p.end_events) {
      if (e.kind == EventKind::StageSeparation) {
        if (e.stage != first || burns_left[e.stage] != 0 || first + 1 >= n) {
          throw DomainError("phase '" + p.label + "': invalid stage separation");
        }
        ++first;
      } else if (e.kind == EventKind::FairingSeparation) {
        if (!fairing_on) throw DomainError("fairing separated twice");
        fairing_on = false;
      }
    }
  }
  if (!schedule.back().has_event(EventKind::OrbitInsertion)) {
    throw DomainError("schedule must end with orbit insertion");
  }
  return schedule;
}

LaunchFrame LaunchFrame::at(const GeodeticPoint& site, double azimuth, const EarthModel& earth) {
  const Vec3 up = geodetic_to_ecef(site, earth).normalized();
  Vec3 east = Vec3::UnitZ().cross(up);
  if (east.norm() < 1e-12) east = Vec3::UnitY();  // pole: pick a meridian
  east.normalize();
  const Vec3 north = up.cross(east);
  LaunchFrame f;
  f.x = std::cos(azimuth) * north + std::sin(azimuth) * east;
  f.z = up;
  f.y = f.z.cross(f.x);
  return f;
}

Vec3 thrust_direction(double pitch, double yaw, const LaunchFrame& frame) {
  const double cy = std::cos(yaw);
  return frame.to_inertial(Vec3(std::cos(pitch) * cy, std::sin(yaw), std::sin(pitch) * cy));
}

Attitude ControlProfile::at(std::size_t phase, double fraction) const {
  const Attitude& a = phase == 0 ? initial : nodes[phase - 1];
  const Attitude& b = nodes[phase];
  return {a.pitch + fraction * (b.pitch - a.pitch), a.yaw + fraction * (b.yaw - a.yaw)};
}

double StateVector::mass(const VehicleSpec& vehicle) const {
  double m = vehicle.m_payload + (fairing_attached ? vehicle.m_fairing : 0.0);
  for (std::size_t k = static_cast<std::size_t>(first_stage); k < vehicle.stages.size(); ++k) {
    m += vehicle.stages[k].m_s + propellant[k];
  }
  return m;
}

StateVector initial_state(const VehicleSpec& vehicle, const InertialState& launch) {
  StateVector s;
  s.r = launch.r;
  s.v = launch.v;
  for (const auto& st : vehicle.stages) s.propellant.push_back(st.m_p);
  return s;
}

namespace {

// Everything about the vehicle that stays constant during one phase.
struct PhaseConstants {
  bool burn = false;
  double dry_mass = 0.0;  // mass other than the burning stage's propellant
  const StageSpec* engine = nullptr;
  const StageSpec* aero = nullptr;
};

PhaseConstants phase_constants(const StateVector& s, const Phase& phase, const VehicleSpec& vehicle) {
  PhaseConstants c;
  c.burn = phase.kind == PhaseKind::Burn;
  c.aero = &vehicle.stages[static_cast<std::size_t>(s.first_stage)];
  c.dry_mass = s.mass(vehicle);
  if (c.burn) {
    c.engine = &vehicle.stages[static_cast<std::size_t>(phase.stage)];
    c.dry_mass -= s.propellant[static_cast<std::size_t>(phase.stage)];
  }
  return c;
}

struct Compact {
  Vec3 r;
  Vec3 v;
  double mp;
  Losses l;
};

Compact axpy(const Compact& y, double h, const StateRate& k) {
  Compact out{y.r + h * k.dr, y.v + h * k.dv, y.mp + h * k.dpropellant, y.l};
  for (std::size_t i = 0; i < 4; ++i) out.l[i] += h * k.dlosses[i];
  return out;
}

Forces compute_forces(const Vec3& r, const Vec3& v, double mp, const PhaseConstants& c,
                      const Vec3& e_t, const EarthModel& earth) {
  Forces f;
  f.mass = c.dry_mass + (c.burn ? mp : 0.0);
  if (!(f.mass > 0.0)) throw DomainError("non-positive vehicle mass");
  const AtmosphereSample atm = atmosphere_at(r.norm() - earth.r_eq);
  f.pressure = atm.pressure;
  if (c.burn) {
    f.thrust = (c.engine->vacuum_thrust() - c.engine->a_exit * atm.pressure) * e_t;
  } else {
    f.thrust = Vec3::Zero();
  }
  if (atm.density > 0.0) {
    const Vec3 vr = v - Vec3(0.0, 0.0, earth.omega).cross(r);
    const double speed = vr.norm();
    const double cd = c.aero->drag_coefficient(speed / atm.speed_of_sound);
    f.aero = -0.5 * atm.density * cd * c.aero->s_ref * speed * vr;
  } else {
    f.aero = Vec3::Zero();
  }
  f.gravity = f.mass * gravity_at(r, earth);
  return f;
}

StateRate compute_rate(const Vec3& r, const Vec3& v, double mp, const PhaseConstants& c,
                       const Vec3& e_t, const EarthModel& earth) {
  const Forces f = compute_forces(r, v, mp, c, e_t, earth);
  StateRate k;
  k.dr = v;
  k.dv = (f.thrust + f.aero + f.gravity) / f.mass;
  k.dpropellant = c.burn ? -c.engine->mdot : 0.0;
  const double speed = v.norm();
  // Direction the losses are measured against; at rest the velocity will
  // develop along the thrust axis.
  const Vec3 dir = speed > 0.0 ? Vec3(v / speed) : e_t;
  const double thrust = f.thrust.norm();
  k.dlosses[kLossPressure] = c.burn ? c.engine->a_exit * f.pressure / f.mass : 0.0;
  k.dlosses[kLossDrag] = -dir.dot(f.aero) / f.mass;
  k.dlosses[kLossGravity] = -dir.dot(f.gravity) / f.mass;
  k.dlosses[kLossSteering] = thrust > 0.0 ? thrust * (1.0 - dir.dot(f.thrust) / thrust) / f.mass : 0.0;
  return k;
}

double active_propellant(const StateVector& s, const Phase& phase) {
  return phase.kind == PhaseKind::Burn ? s.propellant[static_cast<std::size_t>(phase.stage)] : 0.0;
}

}  // namespace

Forces forces(const StateVector& state, const Phase& phase, const Vec3& e_t,
              const VehicleSpec& vehicle, const EarthModel& earth) {
  const PhaseConstants c = phase_constants(state, phase, vehicle);
  return compute_forces(state.r, state.v, active_propellant(state, phase), c, e_t, earth);
}

StateRate derivatives(const StateVector& state, const Phase& phase, const Vec3& e_t,
                      const VehicleSpec& vehicle, const EarthModel& earth) {
  const PhaseConstants c = phase_constants(state, phase, vehicle);
  return compute_rate(state.r, state.v, active_propellant(state, phase), c, e_t, earth);
}

std::vector<Sample> integrate_phase(const StateVector& start, std::size_t index,
                                    const FlightPlan& plan, const EarthModel& earth) {
  const Phase& phase = plan.phases.at(index);
  const VehicleSpec& vehicle = plan.vehicle;
  const int n = plan.nodes_per_phase;
  if (n < 1) throw DomainError("integrate_phase: nodes per phase must be positive");
  const PhaseConstants c = phase_constants(start, phase, vehicle);
  if (c.burn) {
    const double needed = c.engine->mdot * phase.duration;
    const double available = active_propellant(start, phase);
    if (needed > available * (1.0 + 1e-9) + 1e-9) {
      throw SimulationError("phase '" + phase.label + "': not enough propellant for the scheduled burn");
    }
  }

  const double h = phase.duration / n;
  auto direction = [&](double step_fraction) {
    const Attitude a = plan.controls.at(index, std::clamp(step_fraction, 0.0, 1.0));
    return thrust_direction(a.pitch, a.yaw, plan.frame);
  };
  auto make_sample = [&](const Compact& y, double t, const Vec3& e_t) {
    Sample s;
    s.state = start;
    s.state.t = t;
    s.state.r = y.r;
    s.state.v = y.v;
    s.state.losses = y.l;
    if (c.burn) s.state.propellant[static_cast<std::size_t>(phase.stage)] = y.mp;
    s.phase = static_cast<int>(index);
    s.thrust_dir = e_t;
    s.mass = c.dry_mass + (c.burn ? y.mp : 0.0);
    return s;
  };

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  Compact y{start.r, start.v, active_propellant(start, phase), start.losses};
  out.push_back(make_sample(y, start.t, direction(0.0)));
  for (int i = 0; i < n; ++i) {
    const double f0 = static_cast<double>(i) / n;
    const double fm = (i + 0.5) / n;
    const double f1 = static_cast<double>(i + 1) / n;
    const Vec3 e0 = direction(f0);
    const Vec3 em = direction(fm);
    const Vec3 e1 = direction(f1);
    const StateRate k1 = compute_rate(y.r, y.v, y.mp, c, e0, earth);
    const Compact y2 = axpy(y, 0.5 * h, k1);
    const StateRate k2 = compute_rate(y2.r, y2.v, y2.mp, c, em, earth);
    const Compact y3 = axpy(y, 0.5 * h, k2);
    const StateRate k3 = compute_rate(y3.r, y3.v, y3.mp, c, em, earth);
    const Compact y4 = axpy(y, h, k3);
    const StateRate k4 = compute_rate(y4.r, y4.v, y4.mp, c, e1, earth);
    y.r += h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
    y.v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    y.mp += h / 6.0 * (k1.dpropellant + 2.0 * k2.dpropellant + 2.0 * k3.dpropellant + k4.dpropellant);
    for (std::size_t j = 0; j < 4; ++j) {
      y.l[j] += h / 6.0 * (k1.dlosses[j] + 2.0 * k2.dlosses[j] + 2.0 * k3.dlosses[j] + k4.dlosses[j]);
    }
    if (c.burn) {
      // Constant flow: the propellant is linear in time and known exactly.
      y.mp = active_propellant(start, phase) - c.engine->mdot * h * (i + 1);
      if (i + 1 == n && std::abs(y.mp) <= 1e-9 * c.engine->m_p) y.mp = 0.0;
      y.mp = std::max(y.mp, 0.0);
    }
    const double t = i + 1 == n ? start.t + phase.duration : start.t + h * (i + 1);
    out.push_back(make_sample(y, t, e1));
  }
  return out;
}

void apply_events(StateVector& state, const Phase& phase) {
  for (const PhaseEvent& e : phase.end_events) {
    switch (e.kind) {
      case EventKind::StageSeparation:
        state.first_stage = e.stage + 1;
        state.propellant[static_cast<std::size_t>(e.stage)] = 0.0;
        break;
      case EventKind::FairingSeparation:
        state.fairing_attached = false;
        break;
      case EventKind::OrbitInsertion:
        break;
    }
  }
}

Trajectory simulate(const FlightPlan& plan, const EarthModel& earth) {
  const VehicleSpec& vehicle = plan.vehicle;
  if (plan.controls.nodes.size() != plan.phases.size()) {
    throw DomainError("simulate: control profile needs one node per phase");
  }
  Trajectory traj;
  traj.stage_dv.assign(vehicle.stages.size(), 0.0);
  StateVector state = initial_state(vehicle, plan.launch);
  traj.liftoff_mass = state.mass(vehicle);
  for (std::size_t p = 0; p < plan.phases.size(); ++p) {
    const Phase& phase = plan.phases[p];
    std::vector<Sample> samples = integrate_phase(state, p, plan, earth);
    PhaseRecord rec;
    rec.index = static_cast<int>(p);
    rec.start = state;
    rec.end = samples.back().state;
    rec.first_sample = traj.samples.size();
    const std::size_t skip = p == 0 ? 0 : 1;
    traj.samples.insert(traj.samples.end(), std::make_move_iterator(samples.begin() + static_cast<long>(skip)),
                        std::make_move_iterator(samples.end()));
    rec.last_sample = traj.samples.size() - 1;
    if (phase.kind == PhaseKind::Burn) {
      const StageSpec& st = vehicle.stages[static_cast<std::size_t>(phase.stage)];
      traj.stage_dv[static_cast<std::size_t>(phase.stage)] +=
          st.v_ex * std::log(rec.start.mass(vehicle) / rec.end.mass(vehicle));
    }
    state = rec.end;
    apply_events(state, phase);
    traj.phases.push_back(std::move(rec));
  }
  traj.losses = traj.phases.back().end.losses;
  return traj;
}

}  // namespace lvopt
