#include "lvopt/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "lvopt/errors.hpp"
#include "lvopt/flight_outputs.hpp"

namespace lvopt {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string grouped(double v) {
  const long long n = std::llround(v);
  std::string digits = std::to_string(std::llabs(n));
  if (digits.size() > 4) {
    for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(static_cast<std::size_t>(i), ",");
  }
  return n < 0 ? "-" + digits : digits;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + grouped(v[i]);
  return s + "]";
}

std::string csv_list(const std::vector<double>& v, const char* spec) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(spec, v[i]);
  return s;
}

}  // namespace

SummaryColumn summary_column(const OptimizationResult& r, std::string title) {
  SummaryColumn c;
  c.title = std::move(title);
  c.status = to_string(r.status);
  c.dv_required = r.dv_required;
  c.loss_total = r.loss_total;
  c.dv = r.dv;
  for (const StageSpec& s : r.vehicle.stages) {
    c.m_s.push_back(s.m_s);
    c.m_p.push_back(s.m_p);
  }
  c.m_liftoff = r.m_liftoff;
  c.payload = r.vehicle.m_payload;
  c.run_time = r.wall_time;
  c.max_q = r.evaluation.max_q;
  for (const IipResult& ip : r.evaluation.separation_iip) {
    c.iip_latitude.push_back(rad2deg(ip.latitude));
    c.iip_longitude.push_back(wrap_longitude_deg(rad2deg(ip.longitude)));
  }
  return c;
}

SummaryColumn summary_column(const BaselineResult& r, std::string title) {
  SummaryColumn c;
  if (r.final) c = summary_column(*r.final, title);
  c.title = std::move(title);
  c.status = to_string(r.status);
  c.dv_required = r.dv_required;
  if (!r.iterations.empty()) c.m_liftoff = r.iterations.back().m_liftoff;
  c.iterations = static_cast<int>(r.iterations.size());
  c.run_time = r.wall_time;
  return c;
}

std::string format_summary(const std::string& caption, std::span<const SummaryColumn> columns) {
  std::vector<std::pair<std::string, std::vector<std::string>>> rows = {
      {"Parameter", {}},
      {"V_f - V_i, m/s", {}},
      {"Δv_Loss, m/s", {}},
      {"Δv_k, m/s", {}},
      {"m_s,k, kg", {}},
      {"m_p,k, kg", {}},
      {"Lift-off mass, kg", {}},
      {"Number of iterations, -", {}},
      {"Run time, s", {}},
      {"Status", {}},
  };
  for (const SummaryColumn& c : columns) {
    rows[0].second.push_back(c.title);
    rows[1].second.push_back(grouped(c.dv_required));
    rows[2].second.push_back(grouped(c.loss_total));
    rows[3].second.push_back(list(c.dv));
    rows[4].second.push_back(list(c.m_s));
    rows[5].second.push_back(list(c.m_p));
    rows[6].second.push_back(grouped(c.m_liftoff));
    rows[7].second.push_back(c.iterations ? std::to_string(*c.iterations) : "-");
    rows[8].second.push_back(fmt("%.2f", c.run_time));
    rows[9].second.push_back(c.status);
  }
  // Display width: count UTF-8 lead bytes only.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(columns.size() + 1, 0);
  for (const auto& [label, cells] : rows) {
    widths[0] = std::max(widths[0], width(label));
    for (std::size_t i = 0; i < cells.size(); ++i) widths[i + 1] = std::max(widths[i + 1], width(cells[i]));
  }
  std::ostringstream os;
  if (!caption.empty()) os << caption << "\n\n";
  for (const auto& [label, cells] : rows) {
    os << label << std::string(widths[0] - width(label), ' ');
    for (std::size_t i = 0; i < cells.size(); ++i) os << "  " << cells[i] << std::string(widths[i + 1] - width(cells[i]), ' ');
    os << '\n';
  }
  return os.str();
}

std::string format_key_values(const SummaryColumn& c, const std::string& prefix) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << prefix << k << " = " << v << '\n'; };
  kv("status", c.status);
  kv("dv_required", fmt("%.6f", c.dv_required));
  kv("dv_loss", fmt("%.6f", c.loss_total));
  kv("dv", csv_list(c.dv, "%.6f"));
  kv("m_s", csv_list(c.m_s, "%.6f"));
  kv("m_p", csv_list(c.m_p, "%.6f"));
  kv("m_liftoff", fmt("%.6f", c.m_liftoff));
  kv("m_payload", fmt("%.6f", c.payload));
  kv("payload_ratio", fmt("%.9f", c.m_liftoff > 0.0 ? c.payload / c.m_liftoff : 0.0));
  kv("max_q", fmt("%.6f", c.max_q));
  kv("iip_latitude_deg", csv_list(c.iip_latitude, "%.6f"));
  kv("iip_longitude_deg", csv_list(c.iip_longitude, "%.6f"));
  if (c.iterations) kv("iterations", std::to_string(*c.iterations));
  return os.str();
}

double liftoff_delta_percent(const SummaryColumn& a, const SummaryColumn& b) {
  if (!(a.m_liftoff > 0.0)) throw DomainError("liftoff_delta_percent: reference lift-off mass must be positive");
  return 100.0 * (b.m_liftoff - a.m_liftoff) / a.m_liftoff;
}

const std::vector<std::string> kTrajectoryColumns = {
    "t_s",           "phase",          "v_inertial_m_s", "v_relative_m_s", "altitude_m",
    "longitude_deg", "latitude_deg",   "q_pa",           "gamma_deg",      "azimuth_deg",
    "alpha_deg",     "beta_deg",       "mass_kg",        "loss_pressure_m_s", "loss_drag_m_s",
    "loss_gravity_m_s", "loss_steering_m_s"};

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const EarthModel& earth) {
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) os << (i ? "," : "") << kTrajectoryColumns[i];
  os << '\n';
  for (const Sample& s : trajectory.samples) {
    const OutputRecord o = derive_outputs(s, earth);
    const Losses& l = s.state.losses;
    const double values[] = {o.v_inertial, o.v_relative, o.altitude, wrap_longitude_deg(rad2deg(o.longitude)),
                             rad2deg(o.latitude), o.dynamic_pressure, rad2deg(o.flight_path), rad2deg(o.azimuth),
                             rad2deg(o.alpha), rad2deg(o.beta), s.mass, l[kLossPressure], l[kLossDrag],
                             l[kLossGravity], l[kLossSteering]};
    os << fmt("%.6f", o.t) << ',' << s.phase;
    for (double v : values) os << ',' << fmt("%.9g", v);
    os << '\n';
  }
}

double wrap_longitude_deg(double lon_deg) {
  double w = std::fmod(lon_deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

std::string tracks_geojson(const Trajectory& trajectory, const PhaseSchedule& schedule, const MissionSpec& mission,
                           const EarthModel& earth) {
  using nlohmann::json;
  auto point = [](double lon_rad, double lat_rad) {
    return json::array({wrap_longitude_deg(rad2deg(lon_rad)), rad2deg(lat_rad)});
  };
  auto feature = [](json geometry, json properties) {
    return json{{"type", "Feature"}, {"geometry", std::move(geometry)}, {"properties", std::move(properties)}};
  };

  json ground = json::array();
  json iip = json::array();
  for (const Sample& s : trajectory.samples) {
    const OutputRecord o = derive_outputs(s, earth);
    ground.push_back(point(o.longitude, o.latitude));
    try {
      const IipResult r = iip_predict(s.state.r, s.state.v, s.state.t, earth);
      iip.push_back(point(r.longitude, r.latitude));
    } catch (const DomainError&) {
      // orbital: no impact point
    }
  }

  json features = json::array();
  features.push_back(feature({{"type", "LineString"}, {"coordinates", ground}}, {{"name", "ground track"}}));
  features.push_back(feature({{"type", "LineString"}, {"coordinates", iip}}, {{"name", "IIP track"}}));

  for (const PhaseRecord& rec : trajectory.phases) {
    const Phase& ph = schedule.at(static_cast<std::size_t>(rec.index));
    for (const PhaseEvent& ev : ph.end_events) {
      if (ev.kind != EventKind::StageSeparation) continue;
      const Sample& at = trajectory.samples[rec.last_sample];
      const OutputRecord o = derive_outputs(at, earth);
      const std::string stage = std::to_string(ev.stage + 1);
      features.push_back(feature({{"type", "Point"}, {"coordinates", point(o.longitude, o.latitude)}},
                                 {{"name", "stage " + stage + " separation"}, {"t", o.t}, {"altitude_m", o.altitude}}));
      try {
        const IipResult r = iip_predict(rec.end.r, rec.end.v, rec.end.t, earth);
        features.push_back(feature({{"type", "Point"}, {"coordinates", point(r.longitude, r.latitude)}},
                                   {{"name", "stage " + stage + " impact point"}, {"t_go", r.t_go}}));
      } catch (const DomainError&) {
      }
    }
  }

  // Bounds drawn as segments spanning the ground track's extent.
  double lat_min = 90.0, lat_max = -90.0, lon_min = 180.0, lon_max = -180.0;
  for (const json& c : ground) {
    lon_min = std::min(lon_min, c[0].get<double>());
    lon_max = std::max(lon_max, c[0].get<double>());
    lat_min = std::min(lat_min, c[1].get<double>());
    lat_max = std::max(lat_max, c[1].get<double>());
  }
  for (const IipBound& b : mission.iip_bounds) {
    const std::string stage = std::to_string(b.stage + 1);
    auto meridian = [&](double lon, const char* side) {
      features.push_back(feature(
          {{"type", "LineString"},
           {"coordinates", json::array({json::array({wrap_longitude_deg(rad2deg(lon)), lat_min}),
                                        json::array({wrap_longitude_deg(rad2deg(lon)), lat_max})})}},
          {{"name", "stage " + stage + " IIP " + side}}));
    };
    auto parallel = [&](double lat, const char* side) {
      features.push_back(feature({{"type", "LineString"},
                                  {"coordinates", json::array({json::array({lon_min, rad2deg(lat)}),
                                                               json::array({lon_max, rad2deg(lat)})})}},
                                 {{"name", "stage " + stage + " IIP " + side}}));
    };
    if (std::isfinite(b.lon_lo)) meridian(b.lon_lo, "longitude lower bound");
    if (std::isfinite(b.lon_hi)) meridian(b.lon_hi, "longitude upper bound");
    if (std::isfinite(b.lat_lo)) parallel(b.lat_lo, "latitude lower bound");
    if (std::isfinite(b.lat_hi)) parallel(b.lat_hi, "latitude upper bound");
  }

  const json doc{{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

}  // namespace lvopt
