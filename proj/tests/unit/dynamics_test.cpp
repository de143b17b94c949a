#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lvopt/dynamics.hpp"
#include "lvopt/errors.hpp"
#include "lvopt/flight_outputs.hpp"
#include "lvopt/optimizer.hpp"
#include "test_support.hpp"

using namespace lvopt;

namespace {

Phase burn(int stage, std::vector<PhaseEvent> events = {}) {
  Phase p;
  p.label = "burn";
  p.stage = stage;
  p.end_events = std::move(events);
  return p;
}

Phase coast(double duration, std::vector<PhaseEvent> events = {}) {
  Phase p;
  p.label = "coast";
  p.kind = PhaseKind::Coast;
  p.fixed_duration = duration;
  p.end_events = std::move(events);
  return p;
}

// Single-stage plan starting from an arbitrary inertial state.
FlightPlan plan_from(const InertialState& s0, const VehicleSpec& v, PhaseSchedule phases, int nodes,
                     const EarthModel& earth, Attitude att = {kPi / 2, 0.0}) {
  FlightPlan plan;
  plan.vehicle = v;
  plan.phases = resolve_phases(std::move(phases), v);
  plan.controls.initial = att;
  plan.controls.nodes.assign(plan.phases.size(), att);
  plan.frame = LaunchFrame::at({0.0, 0.0, 0.0}, 0.0, earth);
  plan.launch = s0;
  plan.nodes_per_phase = nodes;
  return plan;
}

VehicleSpec one_stage(double m_payload = 1000.0) {
  VehicleSpec v;
  v.name = "single";
  v.stages = {test::simple_stage(3000.0, 50.0, 1000.0, 9000.0)};
  v.m_payload = m_payload;
  return v;
}

InertialState circular(double h, const EarthModel& e) {
  const double r = e.r_eq + h;
  return {Vec3(r, 0, 0), Vec3(0, std::sqrt(e.mu / r) * std::cos(0.3), std::sqrt(e.mu / r) * std::sin(0.3))};
}

}  // namespace

TEST(ThrustDirection, FrameConventions) {
  const EarthModel e;
  const LaunchFrame f = LaunchFrame::at({deg2rad(34.4), deg2rad(127.5), 140.0}, deg2rad(170.0), e);
  EXPECT_NEAR((thrust_direction(kPi / 2, 0.0, f) - f.z).norm(), 0.0, 1e-15);
  EXPECT_NEAR((thrust_direction(0.0, 0.0, f) - f.x).norm(), 0.0, 1e-15);
  EXPECT_NEAR(f.z.dot(geodetic_to_ecef({deg2rad(34.4), deg2rad(127.5), 140.0}, e).normalized()), 1.0, 1e-15);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(thrust_direction(u(rng), u(rng), f).norm(), 1.0, 1e-12);
}

TEST(Forces, VacuumThrustOfStageOne) {
  const EarthModel e;
  VehicleSpec v = test::kslv2();
  StateVector s = initial_state(v, circular(200e3, e));
  const Phase p = burn(0);
  const Forces f = forces(s, p, Vec3::UnitX(), v, e);
  EXPECT_NEAR(f.thrust.norm(), 2923.0 * 1017.0, 1e-6);
  EXPECT_EQ(f.aero.norm(), 0.0);
  EXPECT_NEAR(f.mass, v.liftoff_mass(), 1e-9);
}

TEST(Forces, CoastHasNoThrustAndPadHasNoWind) {
  const EarthModel e;
  const VehicleSpec v = test::kslv2();
  const InertialState pad = launch_initial_state({deg2rad(34.4), deg2rad(127.5), 140.0}, e);
  const StateVector s = initial_state(v, pad);
  const Forces fc = forces(s, coast(10.0), Vec3::UnitX(), v, e);
  EXPECT_EQ(fc.thrust.norm(), 0.0);
  EXPECT_LT(fc.aero.norm(), 1e-9);
  const Forces fb = forces(s, burn(0), pad.r.normalized(), v, e);
  // Sea-level thrust loses p * A_e.
  EXPECT_NEAR(fb.thrust.norm(), 2923.0 * 1017.0 - 3.6 * atmosphere_at(140.0).pressure, 1e-6);
}

TEST(LossRates, CoastInVacuumOnlyGravity) {
  EarthModel e;
  e.j2 = 0.0;
  const VehicleSpec v = one_stage();
  StateVector s = initial_state(v, {Vec3(e.r_eq + 300e3, 0, 0), Vec3(800.0, 7000.0, 0.0)});
  const StateRate k = derivatives(s, coast(1.0), Vec3::UnitX(), v, e);
  EXPECT_EQ(k.dlosses[kLossPressure], 0.0);
  EXPECT_EQ(k.dlosses[kLossDrag], 0.0);
  EXPECT_EQ(k.dlosses[kLossSteering], 0.0);
  const double g = e.mu / std::pow(e.r_eq + 300e3, 2);
  const double sin_gamma = 800.0 / std::hypot(800.0, 7000.0);
  EXPECT_NEAR(k.dlosses[kLossGravity], g * sin_gamma, 1e-12);
}

TEST(LossRates, VerticalAscentAndAlignedThrust) {
  EarthModel e;
  e.j2 = 0.0;
  const VehicleSpec v = one_stage();
  const Vec3 up = Vec3::UnitX();
  StateVector s = initial_state(v, {(e.r_eq + 200e3) * up, 1500.0 * up});
  const StateRate k = derivatives(s, burn(0), up, v, e);
  EXPECT_NEAR(k.dlosses[kLossGravity], e.mu / std::pow(e.r_eq + 200e3, 2), 1e-12);
  EXPECT_NEAR(k.dlosses[kLossSteering], 0.0, 1e-12);
}

TEST(Integration, TsiolkovskyClosure) {
  EarthModel e;
  e.mu = 1e-12;  // gravity negligible
  e.j2 = 0.0;
  const VehicleSpec v = one_stage();
  const InertialState s0{Vec3(e.r_eq + 1000e3, 0, 0), Vec3(0, 10.0, 0)};
  FlightPlan plan = plan_from(s0, v, {burn(0, {{EventKind::OrbitInsertion}})}, 50, e, {0.0, 0.0});
  plan.frame = LaunchFrame::at({0.0, 0.0, 0.0}, kPi / 2, e);  // thrust along +y, with the velocity
  const Trajectory t = simulate(plan, e);
  const double mu_ratio = (1000.0 + 10000.0) / (1000.0 + 1000.0);
  const double expected = 3000.0 * std::log(mu_ratio);
  const double gain = t.final_state().v.norm() - 10.0;
  EXPECT_NEAR(gain / expected, 1.0, 1e-4);
  EXPECT_NEAR(t.stage_dv[0], expected, 1e-9 * expected);
}

TEST(Integration, CoastConservesEnergy) {
  EarthModel e;
  e.j2 = 0.0;
  const VehicleSpec v = one_stage();
  const InertialState s0{Vec3(e.r_eq + 400e3, 0, 0), Vec3(0, 7000.0, 1500.0)};
  PhaseSchedule ph = {coast(2000.0), burn(0, {{EventKind::OrbitInsertion}})};
  const FlightPlan plan = plan_from(s0, v, ph, 200, e);
  const std::vector<Sample> samples = integrate_phase(initial_state(v, s0), 0, plan, e);
  auto energy = [&](const StateVector& s) { return 0.5 * s.v.squaredNorm() - e.mu / s.r.norm(); };
  const double e0 = energy(samples.front().state);
  EXPECT_LE(std::abs(energy(samples.back().state) - e0), 1e-8 * std::abs(e0));
}

TEST(Integration, FourthOrderConvergenceOnCoast) {
  EarthModel e;
  e.j2 = 0.0;
  const VehicleSpec v = one_stage();
  const InertialState s0{Vec3(e.r_eq + 400e3, 0, 0), Vec3(0, 7000.0, 1500.0)};
  PhaseSchedule ph = {coast(3000.0), burn(0, {{EventKind::OrbitInsertion}})};
  auto final_r = [&](int n) {
    const FlightPlan plan = plan_from(s0, v, ph, n, e);
    return integrate_phase(initial_state(v, s0), 0, plan, e).back().state.r;
  };
  const Vec3 ref = final_r(1600);
  const double e1 = (final_r(25) - ref).norm();
  const double e2 = (final_r(50) - ref).norm();
  const double e3 = (final_r(100) - ref).norm();
  const double order1 = std::log2(e1 / e2);
  const double order2 = std::log2(e2 / e3);
  EXPECT_NEAR(order1, 4.0, 0.3);
  EXPECT_NEAR(order2, 4.0, 0.3);
}

TEST(Integration, VerticalFlightStaysOnTheVertical) {
  EarthModel e;
  e.j2 = 0.0;
  e.omega = 0.0;
  const test::CaseSetup c = test::load_case(1);
  const GeodeticPoint site = c.mission.site;
  FlightPlan plan;
  plan.vehicle = c.vehicle;
  plan.phases = resolve_phases(c.schedule, c.vehicle);
  plan.controls.initial = {kPi / 2, 0.0};
  plan.controls.nodes.assign(plan.phases.size(), {kPi / 2, 0.0});
  plan.frame = LaunchFrame::at(site, 0.3, e);
  plan.launch = launch_initial_state(site, e);
  plan.nodes_per_phase = 20;
  const Trajectory t = simulate(plan, e);
  for (const Sample& s : t.samples) {
    const GeodeticPoint g = ecef_to_geodetic(s.state.r, e);
    ASSERT_NEAR(g.latitude, site.latitude, 1e-9);
    ASSERT_NEAR(g.longitude, site.longitude, 1e-9);
  }
}

TEST(Integration, RotationOnlyDisplacesVerticalFlightSlightly) {
  const EarthModel e;
  const test::CaseSetup c = test::load_case(1);
  FlightPlan plan;
  plan.vehicle = c.vehicle;
  plan.phases = resolve_phases(c.schedule, c.vehicle);
  plan.controls.initial = {kPi / 2, 0.0};
  plan.controls.nodes.assign(plan.phases.size(), {kPi / 2, 0.0});
  plan.frame = LaunchFrame::at(c.mission.site, 0.3, e);
  plan.launch = launch_initial_state(c.mission.site, e);
  plan.nodes_per_phase = 20;
  const Trajectory t = simulate(plan, e);
  const StateVector& burnout = t.phases[3].end;  // stage-1 burnout, still at moderate altitude
  const OutputRecord o = derive_outputs(t.samples[t.phases[3].last_sample], e);
  EXPECT_GT(o.altitude, 50e3);
  const GeodeticPoint g = ecef_to_geodetic(eci_to_ecef(burnout.r, burnout.v, burnout.t, e).r, e);
  EXPECT_LT(std::abs(g.longitude - c.mission.site.longitude), deg2rad(2.0));
  EXPECT_LT(std::abs(g.latitude - c.mission.site.latitude), deg2rad(0.5));
}

TEST(Integration, VelocityBudgetCloses) {
  const EarthModel e;
  for (int n : {1, 2, 3}) {
    const test::CaseSetup c = test::load_case(n);
    const AscentProblem problem(c.mission, c.vehicle, c.schedule, e);
    const FlightPlan plan = problem.plan_for(problem.initial_guess());
    const Trajectory t = simulate(plan, e);
    double dv = 0.0;
    for (double x : t.stage_dv) dv += x;
    const double v0 = plan.launch.v.norm();
    const double v1 = t.final_state().v.norm();
    EXPECT_LE(std::abs((v1 - v0) - (dv - total(t.losses))), 1e-3 * (v1 - v0)) << "case " << n;
  }
}

double doubling_shift(const test::CaseSetup& c, int nodes) {
  const EarthModel e;
  const AscentProblem problem(c.mission, c.vehicle, c.schedule, e);
  FlightPlan plan = problem.plan_for(problem.initial_guess());
  plan.nodes_per_phase = nodes;
  const Vec3 a = simulate(plan, e).final_state().r;
  plan.nodes_per_phase = 2 * nodes;
  const Vec3 b = simulate(plan, e).final_state().r;
  return (a - b).norm();
}

TEST(Integration, NodeDoublingMovesFinalPositionLittle) {
  test::CaseSetup c = test::load_case(1);
  // The Mach kinks of the bundled drag table cost about 2 m at 50 nodes.
  EXPECT_LE(doubling_shift(c, 50), 5.0);
  EXPECT_LE(doubling_shift(c, 200), 1.0);
  for (StageSpec& s : c.vehicle.stages) s.cd_table = {{0.0, 0.5}};
  EXPECT_LE(doubling_shift(c, 50), 1.0);
}

TEST(Events, FairingSeparatesOnceAtTaggedPhase) {
  const EarthModel e;
  const test::CaseSetup c = test::load_case(1);
  const AscentProblem problem(c.mission, c.vehicle, c.schedule, e);
  const FlightPlan plan = problem.plan_for(problem.initial_guess());
  const Trajectory t = simulate(plan, e);
  int transitions = 0;
  for (std::size_t i = 0; i < t.phases.size(); ++i) {
    const bool before = t.phases[i].start.fairing_attached;
    const bool after = i + 1 < t.phases.size() ? t.phases[i + 1].start.fairing_attached : t.phases[i].end.fairing_attached;
    if (before && !after) {
      ++transitions;
      EXPECT_TRUE(plan.phases[i].has_event(EventKind::FairingSeparation));
    }
  }
  EXPECT_EQ(transitions, 1);
  // Mass drops by exactly the fairing at that event.
  for (std::size_t i = 0; i + 1 < t.phases.size(); ++i) {
    if (plan.phases[i].has_event(EventKind::FairingSeparation)) {
      EXPECT_NEAR(t.phases[i].end.mass(plan.vehicle) - t.phases[i + 1].start.mass(plan.vehicle), 900.0, 1e-9);
    }
  }
}

TEST(Schedule, DefaultTopology) {
  ScheduleOptions o;
  o.coasts = {0.0, 30.0};
  const PhaseSchedule s = default_schedule(3, o);
  ASSERT_EQ(s.size(), 11u);
  EXPECT_TRUE(s[0].fixed_attitude.has_value());
  EXPECT_FALSE(s[1].gravity_turn);
  EXPECT_FALSE(s[2].gravity_turn);
  EXPECT_TRUE(s[3].gravity_turn);
  EXPECT_TRUE(s[3].has_event(EventKind::StageSeparation));
  EXPECT_TRUE(s[4].has_event(EventKind::FairingSeparation));
  EXPECT_EQ(s[7].kind, PhaseKind::Coast);
  EXPECT_TRUE(s.back().has_event(EventKind::OrbitInsertion));
}

TEST(Schedule, ResolveSplitsBurnTime) {
  const VehicleSpec v = test::kslv2();
  ScheduleOptions o;
  const PhaseSchedule s = resolve_phases(default_schedule(3, o), v);
  double stage1 = 0.0;
  for (const Phase& p : s)
    if (p.kind == PhaseKind::Burn && p.stage == 0) stage1 += p.duration;
  EXPECT_NEAR(stage1, 128200.0 / 1017.0, 1e-9);
  EXPECT_NEAR(s[0].duration, 8.0, 0.0);
}

TEST(Schedule, RejectsInconsistentSchedules) {
  const VehicleSpec v = test::kslv2();
  PhaseSchedule s = default_schedule(3, {});
  s.back().end_events.clear();
  EXPECT_THROW(resolve_phases(s, v), DomainError);
  PhaseSchedule t = default_schedule(3, {});
  std::swap(t[1], t[5]);
  EXPECT_THROW(resolve_phases(t, v), DomainError);
  EXPECT_THROW(default_schedule(0, {}), DomainError);
}

TEST(Integration, MissingPropellantIsASimulationError) {
  const EarthModel e;
  const VehicleSpec v = one_stage();
  PhaseSchedule ph = {burn(0, {{EventKind::OrbitInsertion}})};
  FlightPlan plan = plan_from(circular(300e3, e), v, ph, 10, e);
  StateVector s = initial_state(v, plan.launch);
  s.propellant[0] = 10.0;
  EXPECT_THROW(integrate_phase(s, 0, plan, e), SimulationError);
}
