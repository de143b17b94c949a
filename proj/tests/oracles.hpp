#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// They use only textbook formulas and brute force, never the library solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "lvopt/earth.hpp"

namespace lvopt::oracle {

struct Impact {
  double t_go = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;  ///< Earth-fixed, (-pi, pi]
};

/// Central-gravity RK4 propagation until |r| = r_eq, crossing refined by
/// bisection on the last step. Longitude is taken in the Earth-fixed frame at
/// the impact epoch (frames coincide at t = 0).
inline Impact propagate_to_surface(Vec3 r, Vec3 v, double t, double mu, double r_eq, double omega, double dt = 0.5) {
  auto acc = [mu](const Vec3& p) { return Vec3(-mu * p / std::pow(p.norm(), 3)); };
  auto step = [&](const Vec3& r0, const Vec3& v0, double h, Vec3& r1, Vec3& v1) {
    const Vec3 k1r = v0, k1v = acc(r0);
    const Vec3 k2r = v0 + 0.5 * h * k1v, k2v = acc(r0 + 0.5 * h * k1r);
    const Vec3 k3r = v0 + 0.5 * h * k2v, k3v = acc(r0 + 0.5 * h * k2r);
    const Vec3 k4r = v0 + h * k3v, k4v = acc(r0 + h * k3r);
    r1 = r0 + h / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
    v1 = v0 + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  };
  double elapsed = 0.0;
  Vec3 rn, vn;
  for (int i = 0; i < 2000000; ++i) {
    step(r, v, dt, rn, vn);
    if (rn.norm() <= r_eq) {
      double lo = 0.0, hi = dt;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        step(r, v, mid, rn, vn);
        (rn.norm() > r_eq ? lo : hi) = mid;
      }
      step(r, v, hi, rn, vn);
      elapsed += hi;
      Impact out;
      out.t_go = elapsed;
      out.latitude = std::asin(rn.z() / rn.norm());
      double lon = std::atan2(rn.y(), rn.x()) - omega * (t + elapsed);
      lon = std::remainder(lon, 2.0 * kPi);
      if (lon <= -kPi) lon += 2.0 * kPi;
      out.longitude = lon;
      return out;
    }
    r = rn;
    v = vn;
    elapsed += dt;
  }
  return {std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0};
}

/// Central-gravity RK4 propagation of (r, v) over `duration` seconds.
inline void propagate(Vec3& r, Vec3& v, double duration, double mu, double dt = 0.05) {
  auto acc = [mu](const Vec3& p) { return Vec3(-mu * p / std::pow(p.norm(), 3)); };
  const int n = std::max(1, static_cast<int>(std::ceil(duration / dt)));
  const double h = duration / n;
  for (int i = 0; i < n; ++i) {
    const Vec3 k1r = v, k1v = acc(r);
    const Vec3 k2r = v + 0.5 * h * k1v, k2v = acc(r + 0.5 * h * k1r);
    const Vec3 k3r = v + 0.5 * h * k2v, k3v = acc(r + 0.5 * h * k2r);
    const Vec3 k4r = v + h * k3v, k4v = acc(r + h * k3r);
    r += h / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
}

/// Great-circle separation [rad].
inline double great_circle(double lat1, double lon1, double lat2, double lon2) {
  const double s = std::sin(0.5 * (lat2 - lat1));
  const double c = std::sin(0.5 * (lon2 - lon1));
  return 2.0 * std::asin(std::sqrt(std::min(1.0, s * s + std::cos(lat1) * std::cos(lat2) * c * c)));
}

/// Product of mu (1 - eps) / (1 - mu eps) written out directly.
inline double ratio_for_split(const std::vector<double>& v_ex, const std::vector<double>& eps,
                              const std::vector<double>& dv) {
  double ratio = 1.0;
  for (std::size_t k = 0; k < v_ex.size(); ++k) {
    const double mu = std::exp(dv[k] / v_ex[k]);
    if (mu * eps[k] >= 1.0) return std::numeric_limits<double>::infinity();
    ratio *= mu * (1.0 - eps[k]) / (1.0 - mu * eps[k]);
  }
  return ratio;
}

/// Smallest lift-off/payload ratio over an even grid of velocity splits.
/// Two stages: `n` points on dv1. Three stages: an n x n grid on (dv1, dv2).
inline double brute_force_ratio(const std::vector<double>& v_ex, const std::vector<double>& eps, double dv_req,
                                int n) {
  double best = std::numeric_limits<double>::infinity();
  if (v_ex.size() == 2) {
    for (int i = 0; i <= n; ++i) {
      const double d1 = dv_req * i / n;
      best = std::min(best, ratio_for_split(v_ex, eps, {d1, dv_req - d1}));
    }
  } else {
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; i + j <= n; ++j) {
        const double d1 = dv_req * i / n;
        const double d2 = dv_req * j / n;
        best = std::min(best, ratio_for_split(v_ex, eps, {d1, d2, dv_req - d1 - d2}));
      }
    }
  }
  return best;
}

}  // namespace lvopt::oracle
