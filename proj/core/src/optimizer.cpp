#include "lvopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "lvopt/errors.hpp"
#include "lvopt/staging.hpp"

namespace lvopt {

namespace {

constexpr double kAltitudeScale = 1e5;
constexpr double kSpeedScale = 1e3;
constexpr double kPressureScale = 1e4;
constexpr double kFailedObjective = 1e12;

const char* stage_label(int k) {
  static const char* labels[] = {"1", "2", "3", "4", "5", "6", "7", "8", "9"};
  return k >= 0 && k < 9 ? labels[k] : "?";
}

bool finite(double v) { return std::isfinite(v); }

int bound_sides(const IipBound& b) {
  return finite(b.lat_lo) + finite(b.lat_hi) + finite(b.lon_lo) + finite(b.lon_hi);
}

}  // namespace

void MissionSpec::validate() const {
  if (!(h_req > 0.0)) throw DomainError("mission: h_req must be positive");
  if (!(v_i_req > 0.0)) throw DomainError("mission: v_i_req must be positive");
  if (!(i_req >= 0.0 && i_req <= kPi)) throw DomainError("mission: i_req must lie in [0, 180] deg");
  if (q_max && !(*q_max > 0.0)) throw DomainError("mission: q_max must be positive");
  if (!(m_payload >= 0.0)) throw DomainError("mission: payload mass must be non-negative");
  if (!(m_fairing >= 0.0)) throw DomainError("mission: fairing mass must be non-negative");
  for (const IipBound& b : iip_bounds) {
    if (b.stage < 0) throw DomainError("mission: IIP bound on a negative stage index");
    if (b.lat_lo > b.lat_hi) throw DomainError("mission: IIP latitude bounds reversed");
    if (b.lon_lo > b.lon_hi) throw DomainError("mission: IIP longitude bounds reversed");
  }
}

double circular_speed(double h, const EarthModel& earth) { return std::sqrt(earth.mu / (earth.r_eq + h)); }

double launch_azimuth(const MissionSpec& mission, const EarthModel& earth) {
  const double lat = mission.site.latitude;
  const double ratio = std::cos(mission.i_req) / std::cos(lat);
  if (std::abs(ratio) > 1.0) {
    throw DomainError("launch_azimuth: inclination below the site latitude is not reachable directly");
  }
  double inertial = std::asin(ratio);
  if (mission.southbound) inertial = kPi - inertial;
  const double v = circular_speed(mission.h_req, earth);
  const double v_site = earth.omega * (earth.r_eq + mission.site.altitude) * std::cos(lat);
  return std::atan2(v * std::sin(inertial) - v_site, v * std::cos(inertial));
}

AscentProblem::AscentProblem(MissionSpec mission, VehicleSpec vehicle, PhaseSchedule schedule, EarthModel earth,
                             ProblemOptions options)
    : mission_(std::move(mission)),
      vehicle_(std::move(vehicle)),
      schedule_(std::move(schedule)),
      earth_(earth),
      options_(options) {
  mission_.validate();
  earth_.validate();
  vehicle_.m_payload = mission_.m_payload;
  vehicle_.m_fairing = mission_.m_fairing;
  vehicle_.validate();
  if (options_.nodes_per_phase < 1) throw DomainError("nodes per phase must be positive");
  const PhaseSchedule resolved = resolve_phases(schedule_, vehicle_);
  schedule_ = resolved;

  azimuth_ = mission_.launch_azimuth ? *mission_.launch_azimuth : launch_azimuth(mission_, earth_);
  frame_ = LaunchFrame::at(mission_.site, azimuth_, earth_);
  launch_ = launch_initial_state(mission_.site, earth_);

  separations_.assign(vehicle_.stages.size(), -1);
  for (const Phase& p : schedule_) {
    if (p.kind == PhaseKind::Burn && p.attitude_free()) free_phases_.push_back(p.index);
    for (const PhaseEvent& e : p.end_events) {
      if (e.kind == EventKind::StageSeparation) separations_[static_cast<std::size_t>(e.stage)] = p.index;
    }
  }
  if (mission_.gravity_turn) {
    std::set<int> nodes;
    auto is_free = [&](int idx) {
      return std::find(free_phases_.begin(), free_phases_.end(), idx) != free_phases_.end();
    };
    for (const Phase& p : schedule_) {
      if (!p.gravity_turn) continue;
      if (p.index > 0 && is_free(p.index - 1)) nodes.insert(p.index - 1);
      if (is_free(p.index)) nodes.insert(p.index);
    }
    for (int p : nodes) gt_checks_.push_back({p, false});
    if (options_.gravity_turn_midpoints) {
      for (const Phase& p : schedule_) {
        if (p.gravity_turn) gt_checks_.push_back({p.index, true});
      }
    }
  }
  for (const IipBound& b : mission_.iip_bounds) {
    if (b.stage >= n_stages() || separations_[static_cast<std::size_t>(b.stage)] < 0) {
      throw DomainError("mission: IIP bound on stage " + std::to_string(b.stage + 1) +
                        ", which has no separation event");
    }
  }
  n_samples_ = static_cast<int>(schedule_.size()) * options_.nodes_per_phase + 1;
}

int AscentProblem::n_ineq() const {
  int n = mission_.q_max ? n_samples_ : 0;
  for (const IipBound& b : mission_.iip_bounds) n += bound_sides(b);
  return n;
}

std::vector<std::string> AscentProblem::eq_names() const {
  std::vector<std::string> names = {"altitude", "flight path angle", "inertial speed", "inclination"};
  for (const GravityTurnCheck& c : gt_checks_) {
    names.push_back(std::string("alpha at ") + (c.midpoint ? "middle" : "end") + " of '" +
                    schedule_[static_cast<std::size_t>(c.phase)].label + "'");
  }
  return names;
}

std::vector<std::string> AscentProblem::ineq_names() const {
  std::vector<std::string> names;
  if (mission_.q_max) {
    for (int j = 0; j < n_samples_; ++j) names.push_back("dynamic pressure at sample " + std::to_string(j));
  }
  for (const IipBound& b : mission_.iip_bounds) {
    const std::string s = std::string("stage ") + stage_label(b.stage) + " IIP ";
    if (finite(b.lat_lo)) names.push_back(s + "latitude lower");
    if (finite(b.lat_hi)) names.push_back(s + "latitude upper");
    if (finite(b.lon_lo)) names.push_back(s + "longitude lower");
    if (finite(b.lon_hi)) names.push_back(s + "longitude upper");
  }
  return names;
}

Eigen::VectorXd AscentProblem::pack(const DecisionVector& d) const {
  const int m = n_mass();
  const int p = n_free_phases();
  if (static_cast<int>(d.theta.size()) != p || static_cast<int>(d.psi.size()) != p) {
    throw DomainError("pack: expected " + std::to_string(p) + " attitude nodes");
  }
  Eigen::VectorXd x(size());
  if (options_.mode == ProblemMode::Sizing) {
    if (static_cast<int>(d.m_s.size()) != m) {
      throw DomainError("pack: expected " + std::to_string(m) + " structural masses");
    }
    for (int k = 0; k < m; ++k) x[k] = d.m_s[static_cast<std::size_t>(k)] / kMassScale;
  } else {
    x[0] = d.m_payload / kMassScale;
  }
  for (int j = 0; j < p; ++j) {
    x[m + j] = d.theta[static_cast<std::size_t>(j)];
    x[m + p + j] = d.psi[static_cast<std::size_t>(j)];
  }
  return x;
}

DecisionVector AscentProblem::unpack(const Eigen::VectorXd& x) const {
  if (x.size() != size()) {
    throw DomainError("unpack: expected a vector of length " + std::to_string(size()) + ", got " +
                      std::to_string(x.size()));
  }
  const int m = n_mass();
  const int p = n_free_phases();
  DecisionVector d;
  if (options_.mode == ProblemMode::Sizing) {
    for (int k = 0; k < m; ++k) d.m_s.push_back(x[k] * kMassScale);
    d.m_payload = mission_.m_payload;
  } else {
    d.m_payload = x[0] * kMassScale;
  }
  for (int j = 0; j < p; ++j) {
    d.theta.push_back(x[m + j]);
    d.psi.push_back(x[m + p + j]);
  }
  return d;
}

VehicleSpec AscentProblem::vehicle_for(const DecisionVector& d) const {
  VehicleSpec v = vehicle_;
  if (options_.mode == ProblemMode::Sizing) {
    if (d.m_s.size() != v.stages.size()) throw DomainError("vehicle_for: structural mass count mismatch");
    for (std::size_t k = 0; k < v.stages.size(); ++k) {
      if (!(d.m_s[k] > 0.0)) throw DomainError("vehicle_for: structural masses must be positive");
      v.stages[k] = v.stages[k].with_structural_mass(d.m_s[k]);
    }
  } else {
    if (!(d.m_payload >= 0.0)) throw DomainError("vehicle_for: payload must be non-negative");
    v.m_payload = d.m_payload;
  }
  return v;
}

FlightPlan AscentProblem::plan_for(const DecisionVector& d) const {
  FlightPlan plan;
  plan.vehicle = vehicle_for(d);
  plan.phases = resolve_phases(schedule_, plan.vehicle);
  plan.frame = frame_;
  plan.launch = launch_;
  plan.nodes_per_phase = options_.nodes_per_phase;
  plan.controls.initial = {kPi / 2.0, 0.0};
  std::size_t j = 0;
  for (const Phase& p : plan.phases) {
    Attitude a;
    if (p.fixed_attitude) {
      a = *p.fixed_attitude;
    } else if (p.kind == PhaseKind::Coast) {
      a = plan.controls.nodes.empty() ? plan.controls.initial : plan.controls.nodes.back();
    } else {
      a = {d.theta.at(j), d.psi.at(j)};
      ++j;
    }
    plan.controls.nodes.push_back(a);
  }
  return plan;
}

Evaluation AscentProblem::evaluate(const Eigen::VectorXd& x) const {
  Evaluation ev;
  ev.objective = kFailedObjective;
  ev.eq = Eigen::VectorXd::Zero(n_eq());
  ev.ineq = Eigen::VectorXd::Zero(n_ineq());
  try {
    const DecisionVector d = unpack(x);
    const FlightPlan plan = plan_for(d);
    ev.vehicle = plan.vehicle;
    ev.trajectory = simulate(plan, earth_);
    const Trajectory& tr = ev.trajectory;
    const StateVector& fin = tr.final_state();

    const double r = fin.r.norm();
    const double v = fin.v.norm();
    ev.insertion = orbital_elements(fin.r, fin.v, earth_);
    ev.eq[0] = (r - earth_.r_eq - mission_.h_req) / kAltitudeScale;
    ev.eq[1] = std::asin(std::clamp(fin.r.dot(fin.v) / (r * v), -1.0, 1.0)) - mission_.gamma_req;
    ev.eq[2] = (v - mission_.v_i_req) / kSpeedScale;
    ev.eq[3] = ev.insertion.i - mission_.i_req;

    const Vec3 w(0.0, 0.0, earth_.omega);
    auto alpha_of = [&](const Sample& s) {
      return aero_angles(s.state.r, s.state.v - w.cross(s.state.r), s.thrust_dir).alpha;
    };
    for (std::size_t k = 0; k < gt_checks_.size(); ++k) {
      const PhaseRecord& rec = tr.phases[static_cast<std::size_t>(gt_checks_[k].phase)];
      const std::size_t j = gt_checks_[k].midpoint ? (rec.first_sample + rec.last_sample) / 2 : rec.last_sample;
      const Sample& s = tr.samples[j];
      ev.gt_alpha.push_back(alpha_of(s));
      ev.eq[4 + static_cast<Eigen::Index>(k)] = ev.gt_alpha.back();
    }
    for (const Sample& s : tr.samples) {
      if (schedule_[static_cast<std::size_t>(s.phase)].gravity_turn) {
        ev.gt_alpha_max = std::max(ev.gt_alpha_max, std::abs(alpha_of(s)));
      }
    }

    Eigen::Index row = 0;
    for (std::size_t j = 0; j < tr.samples.size(); ++j) {
      const StateVector& s = tr.samples[j].state;
      const double q = 0.5 * atmosphere_at(s.r.norm() - earth_.r_eq).density * (s.v - w.cross(s.r)).squaredNorm();
      ev.max_q = std::max(ev.max_q, q);
      if (mission_.q_max) ev.ineq[row++] = (q - *mission_.q_max) / kPressureScale;
    }

    for (std::size_t k = 0; k < separations_.size(); ++k) {
      if (separations_[k] < 0) continue;
      const StateVector& s = tr.phases[static_cast<std::size_t>(separations_[k])].end;
      try {
        ev.separation_iip.push_back(iip_predict(s.r, s.v, s.t, earth_));
      } catch (const DomainError&) {
        ev.separation_iip.push_back({std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN()});
      }
    }
    for (const IipBound& b : mission_.iip_bounds) {
      const IipResult& ip = ev.separation_iip[static_cast<std::size_t>(b.stage)];
      if (!std::isfinite(ip.t_go)) throw SimulationError("separated stage does not impact the Earth");
      if (finite(b.lat_lo)) ev.ineq[row++] = b.lat_lo - ip.latitude;
      if (finite(b.lat_hi)) ev.ineq[row++] = ip.latitude - b.lat_hi;
      if (finite(b.lon_lo)) ev.ineq[row++] = wrap_pi(b.lon_lo - ip.longitude);
      if (finite(b.lon_hi)) ev.ineq[row++] = wrap_pi(ip.longitude - b.lon_hi);
    }

    ev.objective = options_.mode == ProblemMode::Sizing ? plan.vehicle.liftoff_mass() : -plan.vehicle.m_payload;
    ev.ok = ev.eq.allFinite() && ev.ineq.allFinite();
    if (!ev.ok) ev.failure = "non-finite constraint residual";
  } catch (const Error& e) {
    ev.ok = false;
    ev.failure = e.what();
    ev.objective = kFailedObjective;
  }
  return ev;
}

NlpProblem AscentProblem::nlp() const {
  NlpProblem p;
  p.n = size();
  p.n_eq = n_eq();
  p.n_ineq = n_ineq();
  const double inf = std::numeric_limits<double>::infinity();
  p.lower = Eigen::VectorXd::Constant(p.n, -inf);
  p.upper = Eigen::VectorXd::Constant(p.n, inf);
  p.step_limit = Eigen::VectorXd::Constant(p.n, 0.2);
  const int m = n_mass();
  if (options_.mode == ProblemMode::Sizing) {
    for (int k = 0; k < m; ++k) {
      const double ref = vehicle_.stages[static_cast<std::size_t>(k)].m_s / kMassScale;
      p.lower[k] = 1e-3 * ref;
      p.step_limit[k] = 0.25 * ref;
    }
  } else {
    p.lower[0] = 0.0;
    p.step_limit[0] = std::max(0.5, 0.25 * mission_.m_payload / kMassScale);
  }
  for (int j = m; j < p.n; ++j) {
    p.lower[j] = -kPi;
    p.upper[j] = kPi;
  }
  p.evaluate = [this](const Eigen::VectorXd& x) {
    const Evaluation ev = evaluate(x);
    NlpValues v;
    v.ok = ev.ok;
    v.f = ev.objective / kObjectiveScale;
    v.eq = ev.eq;
    v.ineq = ev.ineq;
    return v;
  };
  return p;
}

DecisionVector AscentProblem::initial_guess() const {
  DecisionVector d;
  if (options_.mode == ProblemMode::Sizing) {
    for (const StageSpec& s : vehicle_.stages) d.m_s.push_back(s.m_s);
  }
  d.m_payload = vehicle_.m_payload;

  // Pitch anchors: end of the first free phase, end of each stage's burn.
  std::vector<double> t_end(schedule_.size());
  double t = 0.0;
  for (std::size_t i = 0; i < schedule_.size(); ++i) t_end[i] = t += schedule_[i].duration;
  std::vector<std::pair<double, double>> anchors;
  if (!free_phases_.empty()) anchors.emplace_back(t_end[static_cast<std::size_t>(free_phases_.front())], deg2rad(85.0));
  const double stage_end_pitch[] = {35.0, 10.0, -15.0};
  for (std::size_t k = 0; k < vehicle_.stages.size(); ++k) {
    double te = -1.0;
    for (const Phase& p : schedule_) {
      if (p.kind == PhaseKind::Burn && p.stage == static_cast<int>(k)) te = t_end[static_cast<std::size_t>(p.index)];
    }
    const std::size_t a = std::min<std::size_t>(k + (3 - std::min<std::size_t>(3, vehicle_.stages.size())), 2);
    if (anchors.empty() || te > anchors.back().first) anchors.emplace_back(te, deg2rad(stage_end_pitch[a]));
  }
  auto pitch_at = [&](double time) {
    if (time <= anchors.front().first) return anchors.front().second;
    for (std::size_t i = 1; i < anchors.size(); ++i) {
      if (time <= anchors[i].first) {
        const double f = (time - anchors[i - 1].first) / (anchors[i].first - anchors[i - 1].first);
        return anchors[i - 1].second + f * (anchors[i].second - anchors[i - 1].second);
      }
    }
    return anchors.back().second;
  };
  for (int p : free_phases_) {
    d.theta.push_back(pitch_at(t_end[static_cast<std::size_t>(p)]));
    d.psi.push_back(0.0);
  }
  return d;
}

OptimizationResult summarize(const AscentProblem& problem, const Eigen::VectorXd& x, const Evaluation& eval) {
  OptimizationResult r;
  r.decision = problem.unpack(x);
  r.vehicle = eval.vehicle;
  r.m_liftoff = eval.vehicle.stages.empty() ? 0.0 : eval.vehicle.liftoff_mass();
  r.payload_ratio = r.m_liftoff > 0.0 ? eval.vehicle.m_payload / r.m_liftoff : 0.0;
  r.dv = eval.trajectory.stage_dv;
  r.losses = eval.trajectory.losses;
  r.loss_total = total(r.losses);
  r.dv_required = required_dv(problem.mission().h_req, problem.mission().site, problem.earth());
  r.eq = eval.eq;
  r.ineq = eval.ineq;
  r.eq_names = problem.eq_names();
  r.ineq_names = problem.ineq_names();
  for (Eigen::Index i = 0; i < r.eq.size(); ++i) {
    if (std::abs(r.eq[i]) > 1e-6) r.violated.push_back(r.eq_names[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < r.ineq.size(); ++i) {
    if (r.ineq[i] > 1e-8) r.violated.push_back(r.ineq_names[static_cast<std::size_t>(i)]);
  }
  r.evaluation = eval;
  return r;
}

OptimizationResult solve_problem(const AscentProblem& problem, const Eigen::VectorXd& x0, const SqpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const NlpProblem nlp = problem.nlp();
  const SqpResult sqp = solve_sqp(nlp, x0, options);
  const Evaluation eval = problem.evaluate(sqp.x);
  OptimizationResult r = summarize(problem, sqp.x, eval);
  r.status = sqp.status;
  r.iterations = sqp.iterations;
  r.evaluations = sqp.evaluations + 1;
  r.kkt = sqp.kkt;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

OptimizationResult solve_simultaneous(const MissionSpec& mission, const VehicleSpec& vehicle,
                                      const PhaseSchedule& schedule, const std::optional<DecisionVector>& x0,
                                      const OptimizerOptions& options, const EarthModel& earth) {
  ProblemOptions po;
  po.mode = ProblemMode::Sizing;
  po.nodes_per_phase = options.nodes_per_phase;
  const AscentProblem problem(mission, vehicle, schedule, earth, po);
  const DecisionVector start = x0 ? *x0 : problem.initial_guess();
  return solve_problem(problem, problem.pack(start), options.sqp);
}

}  // namespace lvopt
