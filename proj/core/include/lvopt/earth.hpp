#pragma once

#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lvopt {

using Vec3 = Eigen::Vector3d;

/// Earth constants. Defaults are the conventional WGS84/EGM values.
struct EarthModel {
  double mu = 3.986004418e14;  ///< gravitational parameter [m^3/s^2]
  double r_eq = 6378137.0;     ///< equatorial radius [m]
  double j2 = 1.08263e-3;      ///< second zonal harmonic [-]
  double omega = 7.2921159e-5; ///< rotation rate [rad/s]
  double g0 = 9.80665;         ///< standard gravity [m/s^2]

  /// Throws DomainError if any constant is non-positive or j2 >= 0.01.
  void validate() const;
};

struct AtmosphereSample {
  double temperature;     ///< [K]
  double pressure;        ///< [Pa]
  double density;         ///< [kg/m^3]
  double speed_of_sound;  ///< [m/s]
};

/// Geocentric (spherical Earth) coordinates.
struct GeodeticPoint {
  double latitude;   ///< [rad], in [-pi/2, pi/2]
  double longitude;  ///< [rad], in (-pi, pi]
  double altitude;   ///< above r_eq [m]
};

struct InertialState {
  Vec3 r;
  Vec3 v;
};

/// Geometric altitude above which the atmosphere is treated as vacuum.
inline constexpr double kVacuumCutoff = 86000.0;

/// 1976 U.S. Standard Atmosphere for geometric altitudes 0-86 km. Altitudes
/// below sea level are clamped to sea level; at and above kVacuumCutoff the
/// pressure and density are exactly zero.
AtmosphereSample atmosphere_at(double altitude);

/// Geopotential altitude [m] of a geometric altitude [m] (USSA76 r0).
double geopotential_altitude(double geometric);
/// Inverse of geopotential_altitude.
double geometric_altitude(double geopotential);

/// Central plus J2 gravitational acceleration in inertial axes (z = spin axis).
/// Throws DomainError when |r| <= 0.5 r_eq.
Vec3 gravity_at(const Vec3& r, const EarthModel& earth);

/// Rotates an inertial state into the Earth-fixed frame, t seconds after the
/// epoch at which both frames coincide.
InertialState eci_to_ecef(const Vec3& r, const Vec3& v, double t, const EarthModel& earth);
InertialState ecef_to_eci(const Vec3& r, const Vec3& v, double t, const EarthModel& earth);

/// Spherical-Earth conversion. Longitude is reported as 0 on the polar axis.
/// Throws DomainError for the zero vector.
GeodeticPoint ecef_to_geodetic(const Vec3& r_ecef, const EarthModel& earth);
Vec3 geodetic_to_ecef(const GeodeticPoint& p, const EarthModel& earth);

/// Inertial position and velocity at the epoch of a point fixed to the
/// rotating surface.
InertialState launch_initial_state(const GeodeticPoint& site, const EarthModel& earth);

/// Wraps an angle into (-pi, pi].
double wrap_pi(double angle);

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace lvopt
