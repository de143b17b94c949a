#pragma once

#include <string>
#include <vector>

namespace lvopt {

/// One breakpoint of a Mach-indexed drag coefficient table.
struct DragPoint {
  double mach;
  double cd;
};

/// Propulsion, structural and aerodynamic description of one stage.
struct StageSpec {
  std::string name;
  double v_ex = 0.0;    ///< effective exhaust velocity [m/s]
  double mdot = 0.0;    ///< propellant mass flow [kg/s]
  double a_exit = 0.0;  ///< nozzle exit area [m^2]
  double m_s = 0.0;     ///< structural mass [kg]
  double m_p = 0.0;     ///< propellant mass [kg]
  double eps = 0.0;     ///< structural mass fraction m_s / (m_s + m_p)
  double s_ref = 0.0;   ///< aerodynamic reference area [m^2]
  std::vector<DragPoint> cd_table;

  double burn_time() const { return m_p / mdot; }
  double vacuum_thrust() const { return v_ex * mdot; }

  /// Piecewise-linear in Mach, clamped at both ends of the table.
  double drag_coefficient(double mach) const;

  /// Copy with the given structural mass and the propellant mass implied by
  /// the (fixed) structural fraction.
  StageSpec with_structural_mass(double structural_mass) const;

  void validate() const;
};

struct VehicleSpec {
  std::string name;
  std::vector<StageSpec> stages;  ///< stage 1 first
  double m_payload = 0.0;
  double m_fairing = 0.0;

  double liftoff_mass() const;
  void validate() const;
};

/// 0.35 subsonic, rising to 1.1 at Mach 1.2 and relaxing to 0.35 by Mach 5.
std::vector<DragPoint> default_drag_table();

/// Structural fraction implied by a structural/propellant mass pair.
inline double structural_fraction(double m_s, double m_p) { return m_s / (m_s + m_p); }

}  // namespace lvopt
