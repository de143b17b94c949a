#include <gtest/gtest.h>

#include "lvopt/errors.hpp"
#include "lvopt/vehicle.hpp"
#include "test_support.hpp"

using namespace lvopt;

TEST(DragTable, InterpolatesAndClamps) {
  StageSpec s = test::simple_stage(3000, 100, 1000, 9000);
  s.cd_table = {{0.0, 0.35}, {0.8, 0.35}, {1.2, 1.1}, {5.0, 0.35}};
  EXPECT_DOUBLE_EQ(s.drag_coefficient(0.5), 0.35);
  EXPECT_DOUBLE_EQ(s.drag_coefficient(1.0), 0.725);
  EXPECT_DOUBLE_EQ(s.drag_coefficient(1.2), 1.1);
  EXPECT_DOUBLE_EQ(s.drag_coefficient(20.0), 0.35);
  EXPECT_DOUBLE_EQ(s.drag_coefficient(-1.0), 0.35);
}

TEST(DragTable, DefaultSpansTheStatedRange) {
  double lo = 1e9, hi = 0.0;
  for (const DragPoint& p : default_drag_table()) {
    lo = std::min(lo, p.cd);
    hi = std::max(hi, p.cd);
  }
  EXPECT_DOUBLE_EQ(lo, 0.35);
  EXPECT_DOUBLE_EQ(hi, 1.1);
}

TEST(Stage, WithStructuralMassKeepsFraction) {
  const StageSpec s = test::simple_stage(2923, 1017, 14900, 128200);
  const StageSpec t = s.with_structural_mass(12116.0);
  EXPECT_DOUBLE_EQ(t.m_s, 12116.0);
  EXPECT_NEAR(structural_fraction(t.m_s, t.m_p), s.eps, 1e-15);
  EXPECT_NEAR(t.m_p, 12116.0 * (1 - s.eps) / s.eps, 1e-9);
}

TEST(Stage, ThrustAndBurnTime) {
  const StageSpec s = test::simple_stage(2923, 1017, 14900, 128200);
  EXPECT_NEAR(s.vacuum_thrust(), 2.9727e6, 1e2);
  EXPECT_NEAR(s.vacuum_thrust() / 9.80665 / 1000.0, 303.2, 0.2);
  EXPECT_NEAR(s.burn_time(), 128200.0 / 1017.0, 1e-12);
}

TEST(Stage, ValidationRejectsInconsistentFraction) {
  StageSpec s = test::simple_stage(3000, 100, 1000, 9000);
  EXPECT_NO_THROW(s.validate());
  s.eps = 0.2;
  EXPECT_THROW(s.validate(), DomainError);
  s = test::simple_stage(3000, -1, 1000, 9000);
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(Vehicle, LiftoffMassOfBundledReference) {
  const VehicleSpec v = test::kslv2();
  EXPECT_DOUBLE_EQ(v.liftoff_mass(), 143100 + 41900 + 12600 + 3000 + 900);
}
