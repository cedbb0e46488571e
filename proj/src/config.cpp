#include "boomforce/config.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "boomforce/errors.hpp"
#include "boomforce/serialize.hpp"

namespace boomforce {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kConfig, "config key '" + path + "': " + msg);
}

json stiffness_value(double k) {
  if (std::isinf(k)) return "inf";
  return k;
}

void merge_strict(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) config_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) config_error(path, "unknown key");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json& at(const std::string& path) const {
    const json* node = &root_;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (!node->is_object() || !node->contains(key)) config_error(path, "missing");
      node = &(*node)[key];
      if (dot == std::string::npos) return *node;
      start = dot + 1;
    }
  }

  double number(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number()) config_error(path, "expected a number");
    return v.get<double>();
  }

  // Accepts a positive number or "inf".
  double stiffness(const std::string& path) const {
    const json& v = at(path);
    if (v.is_string() && (v == "inf" || v == "infinity")) return kRigid;
    if (!v.is_number()) config_error(path, "expected a number or \"inf\"");
    return v.get<double>();
  }

  bool boolean(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_boolean()) config_error(path, "expected true/false");
    return v.get<bool>();
  }

  long long integer(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number_integer()) config_error(path, "expected an integer");
    return v.get<long long>();
  }

 private:
  const json& root_;
};

bool is_plain_sweep(const ControlSetpoint& sp) {
  const auto& expected = Trajectory::sweep(sp.v_sweep, sp.sweep_distance).points();
  const auto& actual = sp.y_traj.points();
  if (expected.size() != actual.size()) return false;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (expected[i].t != actual[i].t || expected[i].y != actual[i].y) return false;
  }
  return true;
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  json j;
  j["robot"] = {{"d2_min", c.robot.d2_min},
                {"d2_max", c.robot.d2_max},
                {"theta1_min", c.robot.theta1_min},
                {"theta1_max", c.robot.theta1_max},
                {"theta1_dot_max", c.robot.theta1_dot_max},
                {"d2_dot_max", c.robot.d2_dot_max},
                {"dls_lambda", c.robot.dls_lambda}};
  j["stiffness"] = {{"k_theta", c.stiffness.k_theta}, {"k_ee", stiffness_value(c.stiffness.k_ee)}};
  j["world"] = {{"wall_x", c.world.wall_x},
                {"mu_s", c.world.mu_s},
                {"mu_k", c.world.mu_k},
                {"stiction_coupling", c.world.stiction_coupling},
                {"noise_sigma", c.world.noise_sigma},
                {"seed", c.world.seed},
                {"k_wrist", c.world.k_wrist},
                {"slip_length", c.world.slip_length},
                {"stick_speed", c.world.stick_speed}};
  j["spec"] = {{"omega_n", c.spec.omega_n}, {"eta", c.spec.eta}, {"mass", c.spec.mass}};

  json waypoints = nullptr;
  if (!is_plain_sweep(c.setpoint)) {
    waypoints = json::array();
    for (const Waypoint& w : c.setpoint.y_traj.points()) waypoints.push_back({w.t, w.y});
  }
  j["setpoint"] = {{"f_des", c.setpoint.f_des},
                   {"v_sweep", c.setpoint.v_sweep},
                   {"k_p", c.setpoint.k_p},
                   {"sweep_distance", c.setpoint.sweep_distance},
                   {"y_waypoints", waypoints}};
  j["control"] = {{"v_approach", c.control.v_approach},
                  {"f_thresh", c.control.f_thresh},
                  {"n_consecutive", c.control.n_consecutive},
                  {"eps_f", c.control.eps_f},
                  {"t_hold", c.control.t_hold}};
  j["timing"] = {{"dt_plant", c.timing.dt_plant},
                 {"dt_force", c.timing.dt_force},
                 {"dt_traj", c.timing.dt_traj}};
  j["q0"] = {{"theta1", c.q0.theta1}, {"d2", c.q0.d2}};
  j["duration"] = c.duration;
  j["toggles"] = {{"noise", c.toggles.noise},
                  {"stiction", c.toggles.stiction},
                  {"gain_hold", c.toggles.gain_hold},
                  {"lowpass_cutoff", c.toggles.lowpass_cutoff
                                         ? json(*c.toggles.lowpass_cutoff)
                                         : json(nullptr)}};
  return j;
}

ScenarioConfig config_from_json(const json& doc) {
  json merged = to_json(ScenarioConfig{});
  merged["setpoint"]["y_waypoints"] = nullptr;
  merge_strict(merged, doc, "");
  const Reader r(merged);

  ScenarioConfig c;
  c.robot.d2_min = r.number("robot.d2_min");
  c.robot.d2_max = r.number("robot.d2_max");
  c.robot.theta1_min = r.number("robot.theta1_min");
  c.robot.theta1_max = r.number("robot.theta1_max");
  c.robot.theta1_dot_max = r.number("robot.theta1_dot_max");
  c.robot.d2_dot_max = r.number("robot.d2_dot_max");
  c.robot.dls_lambda = r.number("robot.dls_lambda");

  c.stiffness.k_theta = r.stiffness("stiffness.k_theta");
  c.stiffness.k_ee = r.stiffness("stiffness.k_ee");

  c.world.wall_x = r.number("world.wall_x");
  c.world.mu_s = r.number("world.mu_s");
  c.world.mu_k = r.number("world.mu_k");
  c.world.stiction_coupling = r.number("world.stiction_coupling");
  c.world.noise_sigma = r.number("world.noise_sigma");
  const long long seed = r.integer("world.seed");
  if (seed < 0) config_error("world.seed", "must be >= 0");
  c.world.seed = static_cast<std::uint64_t>(seed);
  c.world.k_wrist = r.number("world.k_wrist");
  c.world.slip_length = r.number("world.slip_length");
  c.world.stick_speed = r.number("world.stick_speed");

  c.spec.omega_n = r.number("spec.omega_n");
  c.spec.eta = r.number("spec.eta");
  c.spec.mass = r.number("spec.mass");

  c.setpoint.f_des = r.number("setpoint.f_des");
  c.setpoint.v_sweep = r.number("setpoint.v_sweep");
  c.setpoint.k_p = r.number("setpoint.k_p");
  c.setpoint.sweep_distance = r.number("setpoint.sweep_distance");
  const json& waypoints = r.at("setpoint.y_waypoints");
  if (waypoints.is_null()) {
    c.setpoint.y_traj = Trajectory::sweep(c.setpoint.v_sweep, c.setpoint.sweep_distance);
  } else {
    if (!waypoints.is_array() || waypoints.empty()) {
      config_error("setpoint.y_waypoints", "expected a non-empty array of [t, y] pairs");
    }
    std::vector<Waypoint> points;
    for (const json& w : waypoints) {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
        config_error("setpoint.y_waypoints", "each waypoint must be [t, y]");
      }
      points.push_back({w[0].get<double>(), w[1].get<double>()});
    }
    try {
      c.setpoint.y_traj = Trajectory(std::move(points));
    } catch (const Error& e) {
      config_error("setpoint.y_waypoints", e.what());
    }
  }

  c.control.v_approach = r.number("control.v_approach");
  c.control.f_thresh = r.number("control.f_thresh");
  c.control.n_consecutive = static_cast<int>(r.integer("control.n_consecutive"));
  c.control.eps_f = r.number("control.eps_f");
  c.control.t_hold = r.number("control.t_hold");

  c.timing.dt_plant = r.number("timing.dt_plant");
  c.timing.dt_force = r.number("timing.dt_force");
  c.timing.dt_traj = r.number("timing.dt_traj");

  c.q0.theta1 = r.number("q0.theta1");
  c.q0.d2 = r.number("q0.d2");
  c.duration = r.number("duration");

  c.toggles.noise = r.boolean("toggles.noise");
  c.toggles.stiction = r.boolean("toggles.stiction");
  c.toggles.gain_hold = r.boolean("toggles.gain_hold");
  const json& cutoff = r.at("toggles.lowpass_cutoff");
  if (!cutoff.is_null()) c.toggles.lowpass_cutoff = r.number("toggles.lowpass_cutoff");

  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid config: ") + e.what());
  }
  return c;
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, source + ": " + e.what());
  }
}

void apply_override(json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kConfig,
                "override '" + std::string(assignment) + "' must look like key.path=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }

  json defaults = to_json(ScenarioConfig{});
  json* node = &doc;
  const json* schema = &defaults;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!schema->is_object() || !schema->contains(key)) {
      config_error(path, "unknown key in override");
    }
    schema = &(*schema)[key];
    if (!node->is_object()) *node = json::object();
    json& child = (*node)[key];
    if (dot == std::string::npos) {
      if (schema->is_object()) config_error(path, "override must address a leaf value");
      child = value;
      return;
    }
    node = &child;
    start = dot + 1;
  }
}

ScenarioConfig config_with_overrides(const json& doc, std::span<const std::string> overrides) {
  json patched = doc;
  for (const std::string& o : overrides) apply_override(patched, o);
  return config_from_json(patched);
}

ScenarioConfig load_config(const std::filesystem::path& path,
                           std::span<const std::string> overrides) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "config file not found: " + path.string());
  }
  const json doc = parse_json_text(read_text_file(path), path.string());
  return config_with_overrides(doc, overrides);
}

}  // namespace boomforce
