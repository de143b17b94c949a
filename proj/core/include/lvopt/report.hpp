#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lvopt/baseline.hpp"
#include "lvopt/optimizer.hpp"

namespace lvopt {

/// One column of a results table.
struct SummaryColumn {
  std::string title;
  std::string status;
  double dv_required = 0.0;
  double loss_total = 0.0;
  std::vector<double> dv;
  std::vector<double> m_s;
  std::vector<double> m_p;
  double m_liftoff = 0.0;
  double payload = 0.0;
  std::optional<int> iterations;  ///< outer iterations (sequential method only)
  double run_time = 0.0;          ///< [s]
  double max_q = 0.0;             ///< [Pa]
  std::vector<double> iip_longitude;  ///< per separation [deg]
  std::vector<double> iip_latitude;   ///< per separation [deg]
};

SummaryColumn summary_column(const OptimizationResult& result, std::string title);
SummaryColumn summary_column(const BaselineResult& result, std::string title);

/// Plain-text table with one row per quantity and one column per method.
std::string format_summary(const std::string& caption, std::span<const SummaryColumn> columns);

/// "key = value" lines; `prefix` is prepended to every key. Wall time is
/// left out so that identical runs produce identical text.
std::string format_key_values(const SummaryColumn& column, const std::string& prefix = "");

/// Relative lift-off difference (b - a) / a in percent.
double liftoff_delta_percent(const SummaryColumn& a, const SummaryColumn& b);

/// Fixed header, one row per trajectory sample.
extern const std::vector<std::string> kTrajectoryColumns;
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, const EarthModel& earth);

/// FeatureCollection: ground track, IIP track, separation points and the
/// IIP bounds of the mission as reference lines.
std::string tracks_geojson(const Trajectory& trajectory, const PhaseSchedule& schedule, const MissionSpec& mission,
                           const EarthModel& earth);

/// Longitude in degrees wrapped to (-180, 180].
double wrap_longitude_deg(double lon_deg);

}  // namespace lvopt
