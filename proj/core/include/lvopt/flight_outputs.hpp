#pragma once

#include "lvopt/dynamics.hpp"
#include "lvopt/earth.hpp"

namespace lvopt {

/// Flight-status variables derived from one state sample.
struct OutputRecord {
  double t = 0.0;
  double v_inertial = 0.0;  ///< [m/s]
  double v_relative = 0.0;  ///< [m/s]
  double altitude = 0.0;    ///< [m]
  double longitude = 0.0;   ///< [rad]
  double latitude = 0.0;    ///< [rad]
  double dynamic_pressure = 0.0;  ///< [Pa]
  double flight_path = 0.0;  ///< inertial flight-path angle [rad]
  double azimuth = 0.0;      ///< heading of the relative velocity from north [rad]
  double alpha = 0.0;        ///< angle of attack [rad]
  double beta = 0.0;         ///< sideslip [rad]
  bool angles_defined = true;  ///< false when a reference speed is below 1e-6 m/s
};

struct OrbitalElements {
  double a = 0.0;      ///< semi-major axis [m]; negative for hyperbolas
  double e = 0.0;
  double i = 0.0;      ///< [rad]
  double raan = 0.0;   ///< [rad]
  double argp = 0.0;   ///< [rad]
  double f = 0.0;      ///< true anomaly [rad]
  double h_perigee = 0.0;  ///< a(1-e) - r_eq [m]
  double h_apogee = 0.0;   ///< a(1+e) - r_eq [m]
};

struct IipResult {
  double t_go = 0.0;       ///< time to impact [s]
  double latitude = 0.0;   ///< [rad]
  double longitude = 0.0;  ///< Earth-fixed [rad]
};

/// Angle of attack and sideslip of a thrust axis with respect to a relative
/// velocity, both expressed in the same frame. The reference plane is the
/// vertical plane containing the relative velocity.
struct AeroAngles {
  double alpha = 0.0;
  double beta = 0.0;
  bool defined = true;
};
AeroAngles aero_angles(const Vec3& r, const Vec3& v_rel, const Vec3& e_t);

/// Table-1 style outputs of a sample (t, inertial state, thrust axis).
OutputRecord derive_outputs(const Sample& sample, const EarthModel& earth);

/// Two-body elements. Throws DomainError on a rectilinear orbit.
OrbitalElements orbital_elements(const Vec3& r, const Vec3& v, const EarthModel& earth);

/// Inverse of orbital_elements for elliptic and hyperbolic orbits.
InertialState state_from_elements(const OrbitalElements& el, const EarthModel& earth);

/// Instantaneous impact point on the sphere of radius r_eq from an inertial
/// state at time t (inertial and Earth-fixed frames coincide at t = 0),
/// assuming Keplerian motion after cut-off. Non-iterative: the impact anomaly
/// follows from the conic equation and the flight time from Kepler's
/// equation. Throws DomainError when the forward arc never reaches the
/// surface.
IipResult iip_predict(const Vec3& r, const Vec3& v, double t, const EarthModel& earth);

}  // namespace lvopt
