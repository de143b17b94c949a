#include "lvopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "lvopt/errors.hpp"

namespace lvopt {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0) os << ':' << node.Mark().line + 1;
    os << ": " << field << ": " << what;
    throw ConfigError(os.str());
  }

  void check_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, where, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, where.empty() ? key : where + "." + key, "unknown key");
    }
  }

  double number(const YAML::Node& map, const std::string& key, const std::string& where) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, join(where, key), "missing");
    return as_number(n, join(where, key));
  }

  double number_or(const YAML::Node& map, const std::string& key, const std::string& where, double fallback) const {
    const YAML::Node n = map[key];
    return n ? as_number(n, join(where, key)) : fallback;
  }

  double as_number(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, field, "must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected a number, got '" + n.Scalar() + "'");
    }
  }

  int integer(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected an integer");
    try {
      return n.as<int>();
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected an integer, got '" + n.Scalar() + "'");
    }
  }

  bool boolean(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected true or false");
    try {
      return n.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected true or false, got '" + n.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& map, const std::string& key, const std::string& fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, key, "expected a string");
    return n.Scalar();
  }

  static std::string join(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
  }

 private:
  std::string source_;
};

YAML::Node parse(const std::string& text, const std::string& source) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) throw ConfigError(source + ": expected a mapping at the top level");
    return root;
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

VehicleSpec parse_vehicle(const std::string& text, const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = parse(text, source);
  rd.check_keys(root, "", {"name", "payload", "fairing", "stages"});

  VehicleSpec v;
  v.name = rd.text(root, "name", "vehicle");
  v.m_payload = rd.number(root, "payload", "");
  v.m_fairing = rd.number_or(root, "fairing", "", 0.0);

  const YAML::Node stages = root["stages"];
  if (!stages || !stages.IsSequence() || stages.size() == 0) rd.fail(root, "stages", "expected a non-empty list");
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const YAML::Node s = stages[k];
    const std::string where = "stages[" + std::to_string(k) + "]";
    rd.check_keys(s, where,
                  {"name", "exhaust_velocity", "mass_flow", "exit_area", "structural_mass", "propellant_mass",
                   "structural_fraction", "reference_area", "drag"});
    StageSpec st;
    st.name = rd.text(s, "name", "stage " + std::to_string(k + 1));
    st.v_ex = rd.number(s, "exhaust_velocity", where);
    st.mdot = rd.number(s, "mass_flow", where);
    st.a_exit = rd.number_or(s, "exit_area", where, 0.0);
    st.m_s = rd.number(s, "structural_mass", where);
    st.m_p = rd.number(s, "propellant_mass", where);
    st.s_ref = rd.number(s, "reference_area", where);
    if (!(st.m_s > 0.0)) rd.fail(s["structural_mass"], where + ".structural_mass", "must be positive");
    if (!(st.m_p > 0.0)) rd.fail(s["propellant_mass"], where + ".propellant_mass", "must be positive");
    st.eps = structural_fraction(st.m_s, st.m_p);
    if (const YAML::Node e = s["structural_fraction"]) {
      const double stated = rd.as_number(e, where + ".structural_fraction");
      if (std::abs(stated - st.eps) > kFractionTolerance) {
        std::ostringstream os;
        os.precision(10);
        os << "stated " << stated << " but the masses imply " << st.eps;
        rd.fail(e, where + ".structural_fraction", os.str());
      }
    }
    if (const YAML::Node d = s["drag"]) {
      if (!d.IsSequence() || d.size() == 0) rd.fail(d, where + ".drag", "expected a list of [mach, cd] pairs");
      for (std::size_t j = 0; j < d.size(); ++j) {
        const std::string f = where + ".drag[" + std::to_string(j) + "]";
        if (!d[j].IsSequence() || d[j].size() != 2) rd.fail(d[j], f, "expected [mach, cd]");
        const DragPoint p{rd.as_number(d[j][0], f), rd.as_number(d[j][1], f)};
        if (!st.cd_table.empty() && !(p.mach > st.cd_table.back().mach)) rd.fail(d[j], f, "Mach must increase");
        if (!(p.cd >= 0.0)) rd.fail(d[j], f, "drag coefficient must be non-negative");
        st.cd_table.push_back(p);
      }
    } else {
      st.cd_table = default_drag_table();
    }
    try {
      st.validate();
    } catch (const DomainError& e) {
      rd.fail(s, where, e.what());
    }
    v.stages.push_back(std::move(st));
  }
  try {
    v.validate();
  } catch (const DomainError& e) {
    rd.fail(root, "vehicle", e.what());
  }
  return v;
}

VehicleSpec load_vehicle(const std::filesystem::path& path) { return parse_vehicle(read_file(path), path.string()); }

std::string vehicle_to_yaml(const VehicleSpec& vehicle) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << vehicle.name;
  out << YAML::Key << "payload" << YAML::Value << vehicle.m_payload;
  out << YAML::Key << "fairing" << YAML::Value << vehicle.m_fairing;
  out << YAML::Key << "stages" << YAML::Value << YAML::BeginSeq;
  for (const StageSpec& s : vehicle.stages) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "exhaust_velocity" << YAML::Value << s.v_ex;
    out << YAML::Key << "mass_flow" << YAML::Value << s.mdot;
    out << YAML::Key << "exit_area" << YAML::Value << s.a_exit;
    out << YAML::Key << "structural_mass" << YAML::Value << s.m_s;
    out << YAML::Key << "propellant_mass" << YAML::Value << s.m_p;
    out << YAML::Key << "structural_fraction" << YAML::Value << s.eps;
    out << YAML::Key << "reference_area" << YAML::Value << s.s_ref;
    out << YAML::Key << "drag" << YAML::Value << YAML::BeginSeq;
    for (const DragPoint& p : s.cd_table) out << YAML::Flow << YAML::BeginSeq << p.mach << p.cd << YAML::EndSeq;
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_vehicle(const VehicleSpec& vehicle, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError(path.string() + ": cannot write file");
  os << vehicle_to_yaml(vehicle);
}

MissionConfig parse_mission(const std::string& text, const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = parse(text, source);
  rd.check_keys(root, "", {"name", "target", "site", "payload", "fairing", "launch_azimuth_deg", "southbound",
                           "constraints", "schedule"});
  MissionConfig cfg;
  MissionSpec& m = cfg.mission;
  m.name = rd.text(root, "name", "mission");

  const YAML::Node target = root["target"];
  if (!target) rd.fail(root, "target", "missing");
  rd.check_keys(target, "target", {"altitude", "flight_path_deg", "speed", "inclination_deg"});
  m.h_req = rd.number(target, "altitude", "target");
  m.gamma_req = deg2rad(rd.number_or(target, "flight_path_deg", "target", 0.0));
  m.i_req = deg2rad(rd.number(target, "inclination_deg", "target"));
  const YAML::Node speed = target["speed"];
  if (!speed || (speed.IsScalar() && speed.Scalar() == "circular")) {
    m.v_i_req = circular_speed(m.h_req, EarthModel{});
  } else {
    m.v_i_req = rd.as_number(speed, "target.speed");
  }

  const YAML::Node site = root["site"];
  if (!site) rd.fail(root, "site", "missing");
  rd.check_keys(site, "site", {"latitude_deg", "longitude_deg", "altitude"});
  m.site.latitude = deg2rad(rd.number(site, "latitude_deg", "site"));
  m.site.longitude = deg2rad(rd.number(site, "longitude_deg", "site"));
  m.site.altitude = rd.number_or(site, "altitude", "site", 0.0);

  if (root["payload"]) {
    m.m_payload = rd.number(root, "payload", "");
    cfg.has_payload = true;
  }
  if (root["fairing"]) {
    m.m_fairing = rd.number(root, "fairing", "");
    cfg.has_fairing = true;
  }
  if (root["launch_azimuth_deg"]) m.launch_azimuth = deg2rad(rd.number(root, "launch_azimuth_deg", ""));
  if (const YAML::Node sb = root["southbound"]) m.southbound = rd.boolean(sb, "southbound");

  if (const YAML::Node c = root["constraints"]) {
    rd.check_keys(c, "constraints", {"gravity_turn", "q_max", "iip"});
    if (c["gravity_turn"]) m.gravity_turn = rd.boolean(c["gravity_turn"], "constraints.gravity_turn");
    if (c["q_max"]) m.q_max = rd.number(c, "q_max", "constraints");
    if (const YAML::Node iip = c["iip"]) {
      if (!iip.IsSequence()) rd.fail(iip, "constraints.iip", "expected a list");
      for (std::size_t j = 0; j < iip.size(); ++j) {
        const YAML::Node b = iip[j];
        const std::string where = "constraints.iip[" + std::to_string(j) + "]";
        rd.check_keys(b, where, {"stage", "lat_min_deg", "lat_max_deg", "lon_min_deg", "lon_max_deg"});
        if (!b["stage"]) rd.fail(b, where + ".stage", "missing");
        IipBound bound;
        bound.stage = rd.integer(b["stage"], where + ".stage") - 1;
        const double inf = std::numeric_limits<double>::infinity();
        bound.lat_lo = b["lat_min_deg"] ? deg2rad(rd.number(b, "lat_min_deg", where)) : -inf;
        bound.lat_hi = b["lat_max_deg"] ? deg2rad(rd.number(b, "lat_max_deg", where)) : inf;
        bound.lon_lo = b["lon_min_deg"] ? deg2rad(rd.number(b, "lon_min_deg", where)) : -inf;
        bound.lon_hi = b["lon_max_deg"] ? deg2rad(rd.number(b, "lon_max_deg", where)) : inf;
        m.iip_bounds.push_back(bound);
      }
    }
  }

  if (const YAML::Node s = root["schedule"]) {
    rd.check_keys(s, "schedule",
                  {"vertical_rise", "subphases", "gravity_turn_subphases", "fairing_stage", "fairing_subphase",
                   "coasts"});
    ScheduleOptions& so = cfg.schedule;
    so.vertical_rise = rd.number_or(s, "vertical_rise", "schedule", so.vertical_rise);
    if (s["subphases"]) so.burn_subphases = rd.integer(s["subphases"], "schedule.subphases");
    if (s["gravity_turn_subphases"]) {
      so.gravity_turn_subphases = rd.integer(s["gravity_turn_subphases"], "schedule.gravity_turn_subphases");
    }
    if (s["fairing_stage"]) so.fairing_stage = rd.integer(s["fairing_stage"], "schedule.fairing_stage") - 1;
    if (s["fairing_subphase"]) so.fairing_subphase = rd.integer(s["fairing_subphase"], "schedule.fairing_subphase");
    if (const YAML::Node c = s["coasts"]) {
      if (!c.IsSequence()) rd.fail(c, "schedule.coasts", "expected a list of durations");
      for (std::size_t j = 0; j < c.size(); ++j) {
        const double d = rd.as_number(c[j], "schedule.coasts[" + std::to_string(j) + "]");
        if (d < 0.0) rd.fail(c[j], "schedule.coasts[" + std::to_string(j) + "]", "must be non-negative");
        so.coasts.push_back(d);
      }
    }
    if (so.vertical_rise < 0.0) rd.fail(s, "schedule.vertical_rise", "must be non-negative");
    if (so.burn_subphases < 1) rd.fail(s, "schedule.subphases", "must be at least 1");
    if (so.gravity_turn_subphases < 0 || so.gravity_turn_subphases > so.burn_subphases) {
      rd.fail(s, "schedule.gravity_turn_subphases", "must lie in [0, subphases]");
    }
  }

  try {
    MissionSpec check = m;
    if (!cfg.has_payload) check.m_payload = 0.0;
    check.validate();
  } catch (const DomainError& e) {
    rd.fail(root, "mission", e.what());
  }
  return cfg;
}

MissionConfig load_mission(const std::filesystem::path& path) { return parse_mission(read_file(path), path.string()); }

MissionSpec bind_mission(const MissionConfig& config, const VehicleSpec& vehicle) {
  MissionSpec m = config.mission;
  if (!config.has_payload) m.m_payload = vehicle.m_payload;
  if (!config.has_fairing) m.m_fairing = vehicle.m_fairing;
  m.validate();
  return m;
}

}  // namespace lvopt
