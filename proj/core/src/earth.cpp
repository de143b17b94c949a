#include "lvopt/earth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lvopt/errors.hpp"

namespace lvopt {

namespace {

// USSA76 constants.
constexpr double kR0 = 6356766.0;         // effective Earth radius for geopotential [m]
constexpr double kGasConstant = 8.31432;  // R* [J/(mol K)]
constexpr double kMolarMass = 0.0289644;  // M0 [kg/mol]
constexpr double kG0 = 9.80665;
constexpr double kGammaAir = 1.4;
constexpr double kRAir = 287.053;  // speed-of-sound gas constant [J/(kg K)]

struct Layer {
  double base_height;  // geopotential [m]
  double lapse;        // [K/m]
  double base_temperature;
  double base_pressure;
};

constexpr std::array<std::pair<double, double>, 7> kLayerDefs = {{
    {0.0, -0.0065},
    {11000.0, 0.0},
    {20000.0, 0.0010},
    {32000.0, 0.0028},
    {47000.0, 0.0},
    {51000.0, -0.0028},
    {71000.0, -0.0020},
}};

double layer_pressure(const Layer& l, double h) {
  const double dh = h - l.base_height;
  if (l.lapse == 0.0) {
    return l.base_pressure * std::exp(-kG0 * kMolarMass * dh / (kGasConstant * l.base_temperature));
  }
  const double t = l.base_temperature + l.lapse * dh;
  return l.base_pressure *
         std::pow(l.base_temperature / t, kG0 * kMolarMass / (kGasConstant * l.lapse));
}

// Base temperatures and pressures chained from sea level so the profile is
// continuous at every boundary.
std::array<Layer, 7> build_layers() {
  std::array<Layer, 7> layers{};
  double t = 288.15;
  double p = 101325.0;
  for (std::size_t i = 0; i < kLayerDefs.size(); ++i) {
    layers[i] = {kLayerDefs[i].first, kLayerDefs[i].second, t, p};
    if (i + 1 < kLayerDefs.size()) {
      const double top = kLayerDefs[i + 1].first;
      p = layer_pressure(layers[i], top);
      t = t + layers[i].lapse * (top - layers[i].base_height);
    }
  }
  return layers;
}

const std::array<Layer, 7>& layers() {
  static const std::array<Layer, 7> table = build_layers();
  return table;
}

}  // namespace

void EarthModel::validate() const {
  if (!(mu > 0.0 && r_eq > 0.0 && j2 > 0.0 && omega > 0.0 && g0 > 0.0)) {
    throw DomainError("EarthModel: all constants must be strictly positive");
  }
  if (!(j2 < 0.01)) {
    throw DomainError("EarthModel: j2 must be below 0.01");
  }
}

double geopotential_altitude(double geometric) { return kR0 * geometric / (kR0 + geometric); }

double geometric_altitude(double geopotential) { return kR0 * geopotential / (kR0 - geopotential); }

AtmosphereSample atmosphere_at(double altitude) {
  const double z = std::max(altitude, 0.0);
  const double h = geopotential_altitude(std::min(z, kVacuumCutoff));
  const auto& table = layers();
  std::size_t k = 0;
  while (k + 1 < table.size() && h >= table[k + 1].base_height) ++k;
  const Layer& l = table[k];
  const double temperature = l.base_temperature + l.lapse * (h - l.base_height);
  AtmosphereSample s{};
  s.temperature = temperature;
  s.speed_of_sound = std::sqrt(kGammaAir * kRAir * temperature);
  if (z >= kVacuumCutoff) {
    s.pressure = 0.0;
    s.density = 0.0;
    return s;
  }
  s.pressure = layer_pressure(l, h);
  s.density = s.pressure * kMolarMass / (kGasConstant * temperature);
  return s;
}

Vec3 gravity_at(const Vec3& r, const EarthModel& earth) {
  const double rn = r.norm();
  if (!(rn > 0.5 * earth.r_eq)) {
    throw DomainError("gravity_at: position radius below half the equatorial radius");
  }
  const double r2 = rn * rn;
  const double r3 = r2 * rn;
  Vec3 g = -earth.mu / r3 * r;
  if (earth.j2 != 0.0) {
    const double zr2 = r.z() * r.z() / r2;
    const double k = -1.5 * earth.j2 * earth.mu * earth.r_eq * earth.r_eq / (r2 * r3);
    g.x() += k * r.x() * (1.0 - 5.0 * zr2);
    g.y() += k * r.y() * (1.0 - 5.0 * zr2);
    g.z() += k * r.z() * (3.0 - 5.0 * zr2);
  }
  return g;
}

namespace {

Vec3 rotate_z(const Vec3& a, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a.x() - s * a.y(), s * a.x() + c * a.y(), a.z()};
}

}  // namespace

InertialState eci_to_ecef(const Vec3& r, const Vec3& v, double t, const EarthModel& earth) {
  const Vec3 w(0.0, 0.0, earth.omega);
  const double angle = -earth.omega * t;
  return {rotate_z(r, angle), rotate_z(v - w.cross(r), angle)};
}

InertialState ecef_to_eci(const Vec3& r, const Vec3& v, double t, const EarthModel& earth) {
  const Vec3 w(0.0, 0.0, earth.omega);
  const double angle = earth.omega * t;
  const Vec3 ri = rotate_z(r, angle);
  return {ri, rotate_z(v, angle) + w.cross(ri)};
}

double wrap_pi(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

GeodeticPoint ecef_to_geodetic(const Vec3& r_ecef, const EarthModel& earth) {
  const double rn = r_ecef.norm();
  if (!(rn > 0.0)) {
    throw DomainError("ecef_to_geodetic: zero position vector");
  }
  GeodeticPoint p{};
  p.latitude = std::asin(std::clamp(r_ecef.z() / rn, -1.0, 1.0));
  const bool on_axis = r_ecef.x() == 0.0 && r_ecef.y() == 0.0;
  p.longitude = on_axis ? 0.0 : wrap_pi(std::atan2(r_ecef.y(), r_ecef.x()));
  p.altitude = rn - earth.r_eq;
  return p;
}

Vec3 geodetic_to_ecef(const GeodeticPoint& p, const EarthModel& earth) {
  const double rn = earth.r_eq + p.altitude;
  const double cl = std::cos(p.latitude);
  return {rn * cl * std::cos(p.longitude), rn * cl * std::sin(p.longitude),
          rn * std::sin(p.latitude)};
}

InertialState launch_initial_state(const GeodeticPoint& site, const EarthModel& earth) {
  const Vec3 r = geodetic_to_ecef(site, earth);
  const Vec3 w(0.0, 0.0, earth.omega);
  return {r, w.cross(r)};
}

}  // namespace lvopt
