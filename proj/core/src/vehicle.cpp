#include "lvopt/vehicle.hpp"

#include <cmath>
#include <sstream>

#include "lvopt/errors.hpp"

namespace lvopt {

double StageSpec::drag_coefficient(double mach) const {
  if (cd_table.empty()) return 0.0;
  if (mach <= cd_table.front().mach) return cd_table.front().cd;
  if (mach >= cd_table.back().mach) return cd_table.back().cd;
  std::size_t i = 1;
  while (cd_table[i].mach < mach) ++i;
  const DragPoint& a = cd_table[i - 1];
  const DragPoint& b = cd_table[i];
  const double w = (mach - a.mach) / (b.mach - a.mach);
  return a.cd + w * (b.cd - a.cd);
}

StageSpec StageSpec::with_structural_mass(double structural_mass) const {
  StageSpec s = *this;
  s.m_s = structural_mass;
  s.m_p = structural_mass * (1.0 - eps) / eps;
  return s;
}

void StageSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw DomainError("stage '" + name + "': " + what);
  };
  if (!(v_ex > 0.0)) fail("exhaust velocity must be positive");
  if (!(mdot > 0.0)) fail("mass flow must be positive");
  if (!(m_s > 0.0)) fail("structural mass must be positive");
  if (!(m_p > 0.0)) fail("propellant mass must be positive");
  if (!(s_ref > 0.0)) fail("reference area must be positive");
  if (!(a_exit >= 0.0)) fail("nozzle exit area must be non-negative");
  if (!(eps > 0.0 && eps < 1.0)) fail("structural fraction must lie in (0, 1)");
  const double implied = structural_fraction(m_s, m_p);
  if (std::abs(implied - eps) > 1e-9 * eps) {
    std::ostringstream os;
    os.precision(10);
    os << "structural fraction " << eps << " inconsistent with masses (implied " << implied << ")";
    fail(os.str());
  }
  for (std::size_t i = 1; i < cd_table.size(); ++i) {
    if (!(cd_table[i].mach > cd_table[i - 1].mach)) fail("drag table Mach values must be strictly increasing");
  }
}

double VehicleSpec::liftoff_mass() const {
  double m = m_payload + m_fairing;
  for (const auto& s : stages) m += s.m_s + s.m_p;
  return m;
}

void VehicleSpec::validate() const {
  if (stages.empty()) throw DomainError("vehicle '" + name + "' has no stages");
  if (!(m_payload > 0.0)) throw DomainError("vehicle '" + name + "': payload mass must be positive");
  if (!(m_fairing >= 0.0)) throw DomainError("vehicle '" + name + "': fairing mass must be non-negative");
  for (const auto& s : stages) s.validate();
}

std::vector<DragPoint> default_drag_table() {
  return {{0.0, 0.35}, {0.8, 0.35}, {1.2, 1.1}, {2.0, 0.8}, {3.0, 0.55}, {5.0, 0.35}};
}

}  // namespace lvopt
