#pragma once

#include <string>

#include "lvopt/config.hpp"
#include "lvopt/dynamics.hpp"
#include "lvopt/optimizer.hpp"

namespace lvopt::test {

inline std::string data_path(const std::string& name) { return std::string(LVOPT_DATA_DIR) + "/" + name; }

inline VehicleSpec kslv2() { return load_vehicle(data_path("kslv2.yaml")); }

struct CaseSetup {
  VehicleSpec vehicle;
  MissionSpec mission;
  PhaseSchedule schedule;
};

/// Bundled vehicle plus case1.yaml / case2.yaml / case3.yaml.
inline CaseSetup load_case(int n) {
  CaseSetup c;
  c.vehicle = kslv2();
  const MissionConfig mc = load_mission(data_path("case" + std::to_string(n) + ".yaml"));
  c.mission = bind_mission(mc, c.vehicle);
  c.schedule = default_schedule(static_cast<int>(c.vehicle.stages.size()), mc.schedule);
  return c;
}

/// One stage, no drag, no nozzle back-pressure.
inline StageSpec simple_stage(double v_ex, double mdot, double m_s, double m_p) {
  StageSpec s;
  s.name = "test";
  s.v_ex = v_ex;
  s.mdot = mdot;
  s.a_exit = 0.0;
  s.m_s = m_s;
  s.m_p = m_p;
  s.eps = structural_fraction(m_s, m_p);
  s.s_ref = 1.0;
  s.cd_table = {{0.0, 0.0}};
  return s;
}

}  // namespace lvopt::test
