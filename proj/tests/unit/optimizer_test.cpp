#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lvopt/errors.hpp"
#include "lvopt/flight_outputs.hpp"
#include "lvopt/optimizer.hpp"
#include "test_support.hpp"

using namespace lvopt;

namespace {

AscentProblem problem_for(int n, ProblemOptions po = {}) {
  const test::CaseSetup c = test::load_case(n);
  return AscentProblem(c.mission, c.vehicle, c.schedule, EarthModel{}, po);
}

}  // namespace

TEST(Packing, Dimensions) {
  const AscentProblem p = problem_for(1);
  EXPECT_EQ(p.n_stages(), 3);
  EXPECT_EQ(p.n_free_phases(), 9);  // vertical rise and coast carry no node
  EXPECT_EQ(p.size(), 3 + 2 * 9);
  EXPECT_EQ(p.n_eq(), 4 + 2);  // alpha = 0 at both ends of the gravity-turn phase
  EXPECT_EQ(p.n_ineq(), 0);
  ProblemOptions po;
  po.mode = ProblemMode::PayloadMax;
  EXPECT_EQ(problem_for(1, po).size(), 1 + 2 * 9);
  EXPECT_EQ(problem_for(3).n_ineq(), 1);
  ProblemOptions mid;
  mid.gravity_turn_midpoints = true;
  const AscentProblem m = problem_for(1, mid);
  ASSERT_EQ(m.n_eq(), 4 + 3);
  EXPECT_EQ(m.eq_names().back(), "alpha at middle of 'stage 1 burn 3'");
}

TEST(Packing, RoundTrip) {
  const AscentProblem p = problem_for(1);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(p.size());
    for (int k = 0; k < x.size(); ++k) x[k] = k < 3 ? 10.0 * (1.5 + u(rng)) : u(rng);
    EXPECT_LE((p.pack(p.unpack(x)) - x).cwiseAbs().maxCoeff(), 1e-14 * x.cwiseAbs().maxCoeff());
  }
  const DecisionVector d = p.initial_guess();
  const DecisionVector back = p.unpack(p.pack(d));
  EXPECT_EQ(back.theta, d.theta);
  EXPECT_EQ(back.psi, d.psi);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(back.m_s[k], d.m_s[k], 1e-12 * d.m_s[k]);
  // Masses are carried in Mg.
  EXPECT_DOUBLE_EQ(p.pack(d)[0], d.m_s[0] / kMassScale);
}

TEST(Packing, RejectsWrongDimensions) {
  const AscentProblem p = problem_for(1);
  EXPECT_THROW(p.unpack(Eigen::VectorXd::Zero(5)), DomainError);
  DecisionVector d = p.initial_guess();
  d.theta.pop_back();
  EXPECT_THROW(p.pack(d), DomainError);
}

TEST(Evaluate, ObjectiveGradientIsInverseFraction) {
  const AscentProblem p = problem_for(1);
  const Eigen::VectorXd x = p.pack(p.initial_guess());
  for (int k = 0; k < 3; ++k) {
    const double h = 1e-3;
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double g = (p.evaluate(xp).objective - p.evaluate(xm).objective) / (2 * h * kMassScale);
    EXPECT_NEAR(g, 1.0 / p.vehicle_template().stages[k].eps, 1e-6) << "stage " << k + 1;
  }
  EXPECT_NEAR(1.0 / structural_fraction(14900, 128200), 9.604, 1e-3);
}

TEST(Evaluate, AltitudeGradientMatchesIndependentStep) {
  const AscentProblem p = problem_for(1);
  const NlpProblem nlp = p.nlp();
  const Eigen::VectorXd x = p.pack(p.initial_guess());
  const NlpValues v = nlp.evaluate(x);
  const Jacobian J = finite_difference_jacobian(nlp, x, v, 1e-6, 1);
  for (int j = 3; j < nlp.n; ++j) {
    Eigen::VectorXd xp = x;
    const double h = 1e-5;
    xp[j] += h;
    const double fwd = (nlp.evaluate(xp).eq[0] - v.eq[0]) / h;
    EXPECT_NEAR(J.eq(0, j), fwd, 1e-4 * std::max(1.0, std::abs(fwd))) << "variable " << j;
  }
  // The objective does not depend on attitude.
  for (int j = 3; j < nlp.n; ++j) EXPECT_EQ(J.grad[j], 0.0);
}

TEST(Evaluate, DynamicPressureRowsAreDefinitional) {
  const AscentProblem p = problem_for(2);
  const Evaluation ev = p.evaluate(p.pack(p.initial_guess()));
  ASSERT_TRUE(ev.ok);
  const EarthModel e;
  ASSERT_EQ(ev.ineq.size(), static_cast<Eigen::Index>(ev.trajectory.samples.size()));
  double max_q = 0.0;
  for (std::size_t j = 0; j < ev.trajectory.samples.size(); ++j) {
    const OutputRecord o = derive_outputs(ev.trajectory.samples[j], e);
    EXPECT_NEAR(ev.ineq[static_cast<Eigen::Index>(j)], (o.dynamic_pressure - 40000.0) / 1e4, 1e-9);
    max_q = std::max(max_q, o.dynamic_pressure);
  }
  EXPECT_NEAR(ev.max_q, max_q, 1e-6);
}

TEST(Evaluate, TinyUpperStageCannotReachOrbit) {
  const AscentProblem p = problem_for(1);
  DecisionVector d = p.initial_guess();
  d.m_s[2] = 1.0;
  const Evaluation ev = p.evaluate(p.pack(d));
  if (ev.ok) {
    EXPECT_GT(ev.eq.head(4).cwiseAbs().maxCoeff(), 0.1);
  } else {
    EXPECT_FALSE(ev.failure.empty());
  }
}

TEST(Evaluate, NonPositiveMassIsAFlaggedFailure) {
  const AscentProblem p = problem_for(1);
  Eigen::VectorXd x = p.pack(p.initial_guess());
  x[1] = -1.0;
  const Evaluation ev = p.evaluate(x);
  EXPECT_FALSE(ev.ok);
  EXPECT_FALSE(ev.failure.empty());
  EXPECT_FALSE(p.nlp().evaluate(x).ok);
}

TEST(Evaluate, Deterministic) {
  const AscentProblem p = problem_for(3);
  const Eigen::VectorXd x = p.pack(p.initial_guess());
  const Evaluation a = p.evaluate(x);
  const Evaluation b = p.evaluate(x);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.eq, b.eq);
  EXPECT_EQ(a.ineq, b.ineq);
}

TEST(Evaluate, SeparationImpactPointsOfReferenceProgram) {
  const AscentProblem p = problem_for(3);
  const Evaluation ev = p.evaluate(p.pack(p.initial_guess()));
  ASSERT_TRUE(ev.ok);
  ASSERT_EQ(ev.separation_iip.size(), 2u);
  // Southward launch: the spent first stage falls south of the site.
  EXPECT_LT(ev.separation_iip[0].latitude, deg2rad(34.4));
  EXPECT_NEAR(ev.ineq[0], wrap_pi(ev.separation_iip[0].longitude - deg2rad(128.3)), 1e-15);
}

TEST(Summary, RatioDuality) {
  const AscentProblem p = problem_for(1);
  const Eigen::VectorXd x = p.pack(p.initial_guess());
  const OptimizationResult r = summarize(p, x, p.evaluate(x));
  EXPECT_EQ(r.payload_ratio, 3000.0 / r.m_liftoff);
  EXPECT_NEAR(r.m_liftoff, 201500.0, 1e-6);
  EXPECT_NEAR(r.loss_total, total(r.losses), 1e-9);
  EXPECT_NEAR(r.dv_required, 7342.0, 2.0);
}

TEST(Mission, LaunchAzimuthHeadsSouth) {
  const test::CaseSetup c = test::load_case(1);
  const double az = launch_azimuth(c.mission, EarthModel{});
  EXPECT_LT(std::cos(az), 0.0);
}

TEST(Mission, Validation) {
  MissionSpec m = test::load_case(1).mission;
  EXPECT_NO_THROW(m.validate());
  m.h_req = -1.0;
  EXPECT_THROW(m.validate(), DomainError);
}
