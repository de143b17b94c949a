#pragma once

#include <filesystem>
#include <string>

#include "lvopt/dynamics.hpp"
#include "lvopt/optimizer.hpp"
#include "lvopt/vehicle.hpp"

namespace lvopt {

/// Tolerance of the check between a stated structural fraction and the one
/// implied by the stage masses.
inline constexpr double kFractionTolerance = 1e-6;

/// YAML vehicle file. Masses in kg, speeds in m/s, areas in m^2. Throws
/// ConfigError with "path:line: field: message" diagnostics.
VehicleSpec load_vehicle(const std::filesystem::path& path);
VehicleSpec parse_vehicle(const std::string& text, const std::string& source = "<string>");

/// Full-precision YAML; parse_vehicle(vehicle_to_yaml(v)) reproduces v exactly.
std::string vehicle_to_yaml(const VehicleSpec& vehicle);
void save_vehicle(const VehicleSpec& vehicle, const std::filesystem::path& path);

struct MissionConfig {
  MissionSpec mission;
  ScheduleOptions schedule;
  bool has_payload = false;  ///< payload given in the mission file
  bool has_fairing = false;
};

/// YAML mission file; angles in degrees.
MissionConfig load_mission(const std::filesystem::path& path);
MissionConfig parse_mission(const std::string& text, const std::string& source = "<string>");

/// Mission with payload and fairing taken from the vehicle unless the
/// mission file sets them.
MissionSpec bind_mission(const MissionConfig& config, const VehicleSpec& vehicle);

}  // namespace lvopt
