#include "lvopt/flight_outputs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "lvopt/errors.hpp"

namespace lvopt {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_two_pi(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

IipResult impact_from_direction(const Vec3& dir, double t, double t_go, const EarthModel& earth) {
  IipResult out;
  out.t_go = t_go;
  out.latitude = std::asin(std::clamp(dir.z(), -1.0, 1.0));
  const bool on_axis = dir.x() == 0.0 && dir.y() == 0.0;
  const double inertial_lon = on_axis ? 0.0 : std::atan2(dir.y(), dir.x());
  out.longitude = wrap_pi(inertial_lon - earth.omega * (t + t_go));
  return out;
}

// Straight-line fall along the radius vector.
IipResult radial_impact(const Vec3& r, const Vec3& v, double t, const EarthModel& earth) {
  const double mu = earth.mu;
  const double big_r = earth.r_eq;
  const double r0 = r.norm();
  const double rdot = r.dot(v) / r0;
  const double energy = 0.5 * v.squaredNorm() - mu / r0;
  const Vec3 dir = r / r0;
  double t_go = 0.0;
  if (energy < -1e-12 * mu / r0) {
    const double a = -mu / (2.0 * energy);
    const double n_inv = std::sqrt(a * a * a / mu);
    double eta0 = std::acos(std::clamp(1.0 - r0 / a, -1.0, 1.0));
    if (rdot < 0.0) eta0 = kTwoPi - eta0;
    const double eta_i = kTwoPi - std::acos(std::clamp(1.0 - big_r / a, -1.0, 1.0));
    t_go = n_inv * ((eta_i - std::sin(eta_i)) - (eta0 - std::sin(eta0)));
  } else {
    if (rdot >= 0.0) throw DomainError("iip_predict: escaping radial trajectory has no impact");
    if (energy <= 1e-12 * mu / r0) {
      t_go = std::sqrt(2.0 / mu) / 3.0 * (std::pow(r0, 1.5) - std::pow(big_r, 1.5));
    } else {
      const double a = mu / (2.0 * energy);
      const double h0 = std::acosh(1.0 + r0 / a);
      const double hi = std::acosh(1.0 + big_r / a);
      t_go = std::sqrt(a * a * a / mu) * ((std::sinh(h0) - h0) - (std::sinh(hi) - hi));
    }
  }
  return impact_from_direction(dir, t, std::max(t_go, 0.0), earth);
}

}  // namespace

AeroAngles aero_angles(const Vec3& r, const Vec3& v_rel, const Vec3& e_t) {
  AeroAngles out;
  const double speed = v_rel.norm();
  if (speed < 1e-6) {
    out.defined = false;
    return out;
  }
  const Vec3 xw = v_rel / speed;
  Vec3 yw = xw.cross(r.normalized());
  if (yw.norm() < 1e-9) {
    // Vertical relative wind: measure in the plane that contains the thrust axis.
    const Vec3 perp = e_t - e_t.dot(xw) * xw;
    if (perp.norm() < 1e-15) return out;
    out.alpha = std::atan2(perp.norm(), e_t.dot(xw));
    return out;
  }
  yw.normalize();
  const Vec3 uw = yw.cross(xw);
  out.alpha = std::atan2(e_t.dot(uw), e_t.dot(xw));
  out.beta = std::asin(std::clamp(e_t.dot(yw), -1.0, 1.0));
  return out;
}

OutputRecord derive_outputs(const Sample& sample, const EarthModel& earth) {
  const StateVector& s = sample.state;
  OutputRecord o;
  o.t = s.t;
  const InertialState fixed = eci_to_ecef(s.r, s.v, s.t, earth);
  const GeodeticPoint geo = ecef_to_geodetic(fixed.r, earth);
  o.altitude = geo.altitude;
  o.latitude = geo.latitude;
  o.longitude = geo.longitude;

  const Vec3 v_rel = s.v - Vec3(0.0, 0.0, earth.omega).cross(s.r);
  o.v_inertial = s.v.norm();
  o.v_relative = v_rel.norm();
  o.dynamic_pressure = 0.5 * atmosphere_at(geo.altitude).density * o.v_relative * o.v_relative;

  const Vec3 up = s.r.normalized();
  if (o.v_inertial >= 1e-6) {
    o.flight_path = std::asin(std::clamp(s.v.dot(up) / o.v_inertial, -1.0, 1.0));
  } else {
    o.angles_defined = false;
  }
  if (o.v_relative >= 1e-6) {
    const Vec3 up_f = fixed.r.normalized();
    Vec3 east = Vec3::UnitZ().cross(up_f);
    if (east.norm() < 1e-12) east = Vec3::UnitY();
    east.normalize();
    const Vec3 north = up_f.cross(east);
    o.azimuth = std::atan2(fixed.v.dot(east), fixed.v.dot(north));
  } else {
    o.angles_defined = false;
  }
  const AeroAngles aa = aero_angles(s.r, v_rel, sample.thrust_dir);
  o.alpha = aa.alpha;
  o.beta = aa.beta;
  o.angles_defined = o.angles_defined && aa.defined;
  return o;
}

OrbitalElements orbital_elements(const Vec3& r, const Vec3& v, const EarthModel& earth) {
  const double mu = earth.mu;
  const double rn = r.norm();
  const double vn = v.norm();
  if (!(rn > 0.0) || !(vn > 0.0)) throw DomainError("orbital_elements: zero position or velocity");
  const Vec3 h = r.cross(v);
  const double hn = h.norm();
  if (hn < 1e-10 * rn * vn) throw DomainError("orbital_elements: rectilinear orbit");
  const Vec3 hhat = h / hn;
  const Vec3 e_vec = ((vn * vn - mu / rn) * r - r.dot(v) * v) / mu;
  const double energy = 0.5 * vn * vn - mu / rn;

  OrbitalElements el;
  el.e = e_vec.norm();
  el.a = -mu / (2.0 * energy);
  el.i = std::acos(std::clamp(hhat.z(), -1.0, 1.0));
  Vec3 node = Vec3::UnitZ().cross(h);
  if (node.norm() < 1e-12 * hn) {
    node = Vec3::UnitX();
    el.raan = 0.0;
  } else {
    node.normalize();
    el.raan = wrap_two_pi(std::atan2(node.y(), node.x()));
  }
  if (el.e > 1e-11) {
    const Vec3 ehat = e_vec / el.e;
    el.argp = wrap_two_pi(std::atan2(node.cross(ehat).dot(hhat), node.dot(ehat)));
    el.f = wrap_two_pi(std::atan2(ehat.cross(r).dot(hhat), ehat.dot(r)));
  } else {
    el.argp = 0.0;
    el.f = wrap_two_pi(std::atan2(node.cross(r).dot(hhat), node.dot(r)));
  }
  const double p = hn * hn / mu;
  const double r_peri = p / (1.0 + el.e);
  el.h_perigee = r_peri - earth.r_eq;
  el.h_apogee = el.e < 1.0 ? p / (1.0 - el.e) - earth.r_eq : std::numeric_limits<double>::infinity();
  return el;
}

InertialState state_from_elements(const OrbitalElements& el, const EarthModel& earth) {
  const double p = el.a * (1.0 - el.e * el.e);
  if (!(p > 0.0)) throw DomainError("state_from_elements: non-positive semi-latus rectum");
  const double cf = std::cos(el.f);
  const double sf = std::sin(el.f);
  const double rn = p / (1.0 + el.e * cf);
  const Vec3 r_pf(rn * cf, rn * sf, 0.0);
  const Vec3 v_pf = std::sqrt(earth.mu / p) * Vec3(-sf, el.e + cf, 0.0);
  const Eigen::Matrix3d rot = (Eigen::AngleAxisd(el.raan, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(el.i, Vec3::UnitX()) *
                               Eigen::AngleAxisd(el.argp, Vec3::UnitZ()))
                                  .toRotationMatrix();
  return {rot * r_pf, rot * v_pf};
}

IipResult iip_predict(const Vec3& r, const Vec3& v, double t, const EarthModel& earth) {
  const double mu = earth.mu;
  const double big_r = earth.r_eq;
  const double r0 = r.norm();
  if (!(r0 > 0.0)) throw DomainError("iip_predict: zero position vector");
  const double rv = r.dot(v);
  if (r0 <= big_r && rv <= 0.0) return impact_from_direction(r / r0, t, 0.0, earth);

  const double speed = v.norm();
  const Vec3 hvec = r.cross(v);
  const double h = hvec.norm();
  if (h <= 1e-9 * r0 * speed) return radial_impact(r, v, t, earth);

  const double energy = 0.5 * speed * speed - mu / r0;
  const double p = h * h / mu;
  const double e_cos0 = p / r0 - 1.0;
  const double e_sin0 = h * rv / (mu * r0);
  const double e = std::hypot(e_cos0, e_sin0);
  if (e < 1e-12) throw DomainError("iip_predict: circular orbit above the surface");
  const double c = (p / big_r - 1.0) / e;
  if (c > 1.0) throw DomainError("iip_predict: perigee above the surface, no impact");
  if (c < -1.0) throw DomainError("iip_predict: conic lies entirely inside the Earth");
  const double f_cross = std::acos(c);

  double t_go = 0.0;
  double df = 0.0;
  const double scale_energy = std::abs(energy) * r0 / mu;
  if (scale_energy <= 1e-12) {
    // Parabolic: Barker's equation.
    const double f0 = std::atan2(e_sin0, e_cos0);
    const double fi = -f_cross;
    if (f0 >= 0.0 || f0 > fi) {
      if (f0 < 0.0) return impact_from_direction(r / r0, t, 0.0, earth);
      throw DomainError("iip_predict: ascending parabolic arc has no impact");
    }
    auto barker = [](double f) {
      const double d = std::tan(0.5 * f);
      return d + d * d * d / 3.0;
    };
    t_go = 0.5 * std::sqrt(p * p * p / mu) * (barker(fi) - barker(f0));
    df = fi - f0;
  } else if (energy < 0.0) {
    const double a = -mu / (2.0 * energy);
    const double f0 = wrap_two_pi(std::atan2(e_sin0, e_cos0));
    const double fi = kTwoPi - f_cross;
    if (f0 > fi) return impact_from_direction(r / r0, t, 0.0, earth);
    const double root = std::sqrt(p / a);  // sqrt(1 - e^2)
    auto mean_anomaly = [&](double f) {
      const double ecc = wrap_two_pi(std::atan2(root * std::sin(f), e + std::cos(f)));
      return ecc - e * std::sin(ecc);
    };
    t_go = std::sqrt(a * a * a / mu) * (mean_anomaly(fi) - mean_anomaly(f0));
    df = fi - f0;
  } else {
    const double a = -mu / (2.0 * energy);  // negative
    const double f0 = std::atan2(e_sin0, e_cos0);
    const double fi = -f_cross;
    if (f0 >= 0.0) throw DomainError("iip_predict: ascending hyperbolic arc has no impact");
    if (f0 > fi) return impact_from_direction(r / r0, t, 0.0, earth);
    const double k = std::sqrt((e - 1.0) / (e + 1.0));
    auto mean_anomaly = [&](double f) {
      const double big_f = 2.0 * std::atanh(k * std::tan(0.5 * f));
      return e * std::sinh(big_f) - big_f;
    };
    t_go = std::sqrt(-a * a * a / mu) * (mean_anomaly(fi) - mean_anomaly(f0));
    df = fi - f0;
  }

  const Vec3 u0 = r / r0;
  const Vec3 w = (hvec / h).cross(u0);
  const Vec3 dir = std::cos(df) * u0 + std::sin(df) * w;
  return impact_from_direction(dir, t, std::max(t_go, 0.0), earth);
}

}  // namespace lvopt
