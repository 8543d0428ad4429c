#include "dacemad/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "dacemad/units.hpp"
#include "json.hpp"

namespace dacemad {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(field, what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(join(path, key), "unknown key");
  }
}

double read_number(const json& obj, std::string_view key, const std::string& path,
                   double fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  if (!it->is_number()) fail(join(path, key), "expected a number");
  return it->get<double>();
}

std::size_t read_count(const json& obj, std::string_view key, const std::string& path,
                       std::size_t fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    fail(join(path, key), "expected a non-negative integer");
  }
  return it->get<std::size_t>();
}

Point2 read_point(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
      !value[1].is_number()) {
    fail(path, "expected [x, y]");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

ChannelParams read_channel(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"attenuation", "pathloss_exponent", "tx_power_dbm", "tx_power_w", "noise_dbm",
              "noise_w", "sinr_threshold_db", "sinr_threshold", "bandwidth_hz",
              "interference_range_m"});
  ChannelParams c;
  c.attenuation = read_number(obj, "attenuation", path, c.attenuation);
  c.pathloss_exponent = read_number(obj, "pathloss_exponent", path, c.pathloss_exponent);
  if (obj.contains("tx_power_dbm")) {
    c.tx_power_w = units::dbm_to_watts(read_number(obj, "tx_power_dbm", path, 0.0));
  }
  c.tx_power_w = read_number(obj, "tx_power_w", path, c.tx_power_w);
  if (obj.contains("noise_dbm")) {
    c.noise_w = units::dbm_to_watts(read_number(obj, "noise_dbm", path, 0.0));
  }
  c.noise_w = read_number(obj, "noise_w", path, c.noise_w);
  if (obj.contains("sinr_threshold_db")) {
    c.sinr_threshold = units::db_to_linear(read_number(obj, "sinr_threshold_db", path, 0.0));
  }
  c.sinr_threshold = read_number(obj, "sinr_threshold", path, c.sinr_threshold);
  c.bandwidth_hz = read_number(obj, "bandwidth_hz", path, c.bandwidth_hz);
  if (auto it = obj.find("interference_range_m"); it != obj.end() && it->is_null()) {
    c.interference_range_m = std::numeric_limits<double>::infinity();
  } else {
    c.interference_range_m =
        read_number(obj, "interference_range_m", path, c.interference_range_m);
  }
  return c;
}

PowerModelSign parse_sign(const json& value, const std::string& path) {
  if (value == "plus") return PowerModelSign::plus;
  if (value == "minus") return PowerModelSign::minus;
  fail(path, "expected \"plus\" or \"minus\"");
}

EnergyParams read_energy(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"kappa0", "kappa1", "kappa2", "tip_speed", "hover_velocity", "battery_capacity_j",
              "battery_mah", "battery_voltage", "power_model_sign"});
  EnergyParams e;
  e.kappa0 = read_number(obj, "kappa0", path, e.kappa0);
  e.kappa1 = read_number(obj, "kappa1", path, e.kappa1);
  e.kappa2 = read_number(obj, "kappa2", path, e.kappa2);
  e.tip_speed = read_number(obj, "tip_speed", path, e.tip_speed);
  e.hover_velocity = read_number(obj, "hover_velocity", path, e.hover_velocity);
  if (obj.contains("battery_mah") || obj.contains("battery_voltage")) {
    const double mah = read_number(obj, "battery_mah", path, 16000.0);
    const double volts = read_number(obj, "battery_voltage", path, 22.2);
    e.battery_capacity_j = mah / 1000.0 * volts * 3600.0;
  }
  e.battery_capacity_j = read_number(obj, "battery_capacity_j", path, e.battery_capacity_j);
  if (auto it = obj.find("power_model_sign"); it != obj.end()) {
    e.sign = parse_sign(*it, join(path, "power_model_sign"));
  }
  return e;
}

LearningParams read_learning(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"learning_rate", "discount", "replay_capacity", "batch_size",
              "target_sync_period", "epsilon_start", "epsilon_end", "epsilon_decay_episodes",
              "comm_range_m", "n_neighbors", "rmsprop_decay", "rmsprop_epsilon",
              "hidden_layers"});
  LearningParams l;
  l.learning_rate = read_number(obj, "learning_rate", path, l.learning_rate);
  l.discount = read_number(obj, "discount", path, l.discount);
  l.replay_capacity = read_count(obj, "replay_capacity", path, l.replay_capacity);
  l.batch_size = read_count(obj, "batch_size", path, l.batch_size);
  l.target_sync_period = read_count(obj, "target_sync_period", path, l.target_sync_period);
  l.epsilon_start = read_number(obj, "epsilon_start", path, l.epsilon_start);
  l.epsilon_end = read_number(obj, "epsilon_end", path, l.epsilon_end);
  l.epsilon_decay_episodes =
      read_count(obj, "epsilon_decay_episodes", path, l.epsilon_decay_episodes);
  l.comm_range_m = read_number(obj, "comm_range_m", path, l.comm_range_m);
  l.n_neighbors = read_count(obj, "n_neighbors", path, l.n_neighbors);
  l.rmsprop_decay = read_number(obj, "rmsprop_decay", path, l.rmsprop_decay);
  l.rmsprop_epsilon = read_number(obj, "rmsprop_epsilon", path, l.rmsprop_epsilon);
  if (auto it = obj.find("hidden_layers"); it != obj.end()) {
    const auto field = join(path, "hidden_layers");
    if (!it->is_array()) fail(field, "expected an array of layer widths");
    l.hidden_layers.clear();
    for (const auto& width : *it) {
      if (!width.is_number_integer() || width.get<long long>() <= 0) {
        fail(field, "layer widths must be positive integers");
      }
      l.hidden_layers.push_back(width.get<std::size_t>());
    }
  }
  return l;
}

ScenarioKind parse_kind(const json& value, const std::string& path) {
  for (auto kind : {ScenarioKind::static_clusters, ScenarioKind::cross_roads,
                    ScenarioKind::edge_concentration, ScenarioKind::trace}) {
    if (value.is_string() && value.get<std::string>() == to_string(kind)) return kind;
  }
  fail(path, "unknown scenario kind");
}

ScenarioSpec read_scenario(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"kind", "n_vehicles", "clusters", "cross_centre", "strip_width", "band_width",
              "trace_path"});
  ScenarioSpec s;
  if (auto it = obj.find("kind"); it != obj.end()) s.kind = parse_kind(*it, join(path, "kind"));
  s.n_vehicles = read_count(obj, "n_vehicles", path, s.n_vehicles);
  if (auto it = obj.find("clusters"); it != obj.end()) {
    const auto field = join(path, "clusters");
    if (!it->is_array()) fail(field, "expected an array");
    s.clusters.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto item_path = field + "[" + std::to_string(i) + "]";
      const json& item = (*it)[i];
      check_keys(item, item_path, {"centre", "radius", "weight"});
      if (!item.contains("centre")) fail(join(item_path, "centre"), "missing");
      Cluster c;
      c.centre = read_point(item["centre"], join(item_path, "centre"));
      c.radius = read_number(item, "radius", item_path, c.radius);
      c.weight = read_number(item, "weight", item_path, c.weight);
      s.clusters.push_back(c);
    }
  }
  if (auto it = obj.find("cross_centre"); it != obj.end() && !it->is_null()) {
    s.cross_centre = read_point(*it, join(path, "cross_centre"));
  }
  s.strip_width = read_number(obj, "strip_width", path, s.strip_width);
  s.band_width = read_number(obj, "band_width", path, s.band_width);
  if (auto it = obj.find("trace_path"); it != obj.end()) {
    if (!it->is_string()) fail(join(path, "trace_path"), "expected a string");
    s.trace_path = it->get<std::string>();
  }
  return s;
}

void validate_scenario(const ScenarioSpec& s, const Area& area) {
  switch (s.kind) {
    case ScenarioKind::static_clusters: {
      require(!s.clusters.empty() || s.n_vehicles == 0, "scenario.clusters",
              "at least one cluster required");
      double total = 0.0;
      for (std::size_t i = 0; i < s.clusters.size(); ++i) {
        const auto& c = s.clusters[i];
        const auto field = "scenario.clusters[" + std::to_string(i) + "]";
        require(area.contains(c.centre), field + ".centre", "must lie inside the area");
        require(c.radius > 0.0, field + ".radius", "must be > 0");
        require(c.weight >= 0.0, field + ".weight", "must be >= 0");
        total += c.weight;
      }
      if (!s.clusters.empty()) {
        require(std::abs(total - 1.0) <= 1e-9, "scenario.clusters", "weights must sum to 1");
      }
      break;
    }
    case ScenarioKind::cross_roads:
      require(s.strip_width > 0.0, "scenario.strip_width", "must be > 0");
      if (s.cross_centre) {
        require(area.contains(*s.cross_centre), "scenario.cross_centre",
                "must lie inside the area");
      }
      break;
    case ScenarioKind::edge_concentration:
      require(s.band_width > 0.0 && s.band_width <= area.width(), "scenario.band_width",
              "must be in (0, area width]");
      break;
    case ScenarioKind::trace:
      require(!s.trace_path.empty(), "scenario.trace_path", "required for trace scenarios");
      break;
  }
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::static_clusters: return "static_clusters";
    case ScenarioKind::cross_roads: return "cross_roads";
    case ScenarioKind::edge_concentration: return "edge_concentration";
    case ScenarioKind::trace: return "trace";
  }
  return "unknown";
}

std::string_view to_string(PowerModelSign sign) {
  return sign == PowerModelSign::plus ? "plus" : "minus";
}

void ChannelParams::validate() const {
  require(attenuation > 0.0, "channel.attenuation", "must be > 0");
  require(pathloss_exponent >= 1.0, "channel.pathloss_exponent", "must be >= 1");
  require(tx_power_w > 0.0, "channel.tx_power", "must be > 0");
  require(noise_w > 0.0, "channel.noise", "must be > 0");
  require(sinr_threshold > 0.0, "channel.sinr_threshold", "must be > 0");
  require(bandwidth_hz > 0.0, "channel.bandwidth_hz", "must be > 0");
  require(interference_range_m >= 0.0, "channel.interference_range_m", "must be >= 0");
}

void EnergyParams::validate() const {
  require(kappa0 > 0.0, "energy.kappa0", "must be > 0");
  require(kappa1 > 0.0, "energy.kappa1", "must be > 0");
  require(kappa2 > 0.0, "energy.kappa2", "must be > 0");
  require(tip_speed > 0.0, "energy.tip_speed", "must be > 0");
  require(hover_velocity > 0.0, "energy.hover_velocity", "must be > 0");
  require(battery_capacity_j > 0.0, "energy.battery_capacity_j", "must be > 0");
}

void LearningParams::validate() const {
  require(learning_rate > 0.0, "learning.learning_rate", "must be > 0");
  require(discount >= 0.0 && discount < 1.0, "learning.discount", "must be in [0, 1)");
  require(replay_capacity >= 1, "learning.replay_capacity", "must be >= 1");
  require(batch_size >= 1, "learning.batch_size", "must be >= 1");
  require(batch_size <= replay_capacity, "learning.batch_size",
          "must not exceed replay_capacity");
  require(target_sync_period >= 1, "learning.target_sync_period", "must be >= 1");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "learning.epsilon_start",
          "must be in [0, 1]");
  require(epsilon_end >= 0.0 && epsilon_end <= 1.0, "learning.epsilon_end", "must be in [0, 1]");
  require(comm_range_m >= 0.0, "learning.comm_range_m", "must be >= 0");
  require(rmsprop_decay >= 0.0 && rmsprop_decay < 1.0, "learning.rmsprop_decay",
          "must be in [0, 1)");
  require(rmsprop_epsilon > 0.0, "learning.rmsprop_epsilon", "must be > 0");
  require(!hidden_layers.empty(), "learning.hidden_layers", "at least one hidden layer");
}

void WorldConfig::validate() const {
  require(area.x_min < area.x_max, "area.x_max", "must exceed area.x_min");
  require(area.y_min < area.y_max, "area.y_max", "must exceed area.y_min");
  require(uav_altitude > 0.0, "uav.altitude", "must be > 0");
  require(n_uavs >= 1, "uav.count", "must be >= 1");
  require(step_duration > 0.0, "step_duration", "must be > 0");
  require(uav_step_size >= 0.0 && uav_step_size <= 20.0, "uav.step_size",
          "must be in [0, 20] m");
  require(episodes >= 1, "episodes", "must be >= 1");
  require(max_steps >= 1, "max_steps", "must be >= 1");
  require(eval_episodes >= 1, "eval_episodes", "must be >= 1");
  require(checkpoint_every >= 1, "checkpoint_every", "must be >= 1");
  if (!initial_positions.empty()) {
    require(initial_positions.size() == n_uavs, "uav.initial_positions",
            "needs one position per UAV");
    for (const auto& p : initial_positions) {
      require(area.contains(p), "uav.initial_positions", "positions must lie inside the area");
    }
  }
  channel.validate();
  energy.validate();
  learning.validate();
  validate_scenario(scenario, area);
}

std::vector<Point2> WorldConfig::takeoff_positions() const {
  if (!initial_positions.empty()) return initial_positions;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_uavs))));
  const auto rows = (n_uavs + cols - 1) / cols;
  std::vector<Point2> out;
  out.reserve(n_uavs);
  for (std::size_t i = 0; i < n_uavs; ++i) {
    const auto r = i / cols;
    const auto c = i % cols;
    out.push_back({area.x_min + area.width() * (static_cast<double>(c) + 0.5) / cols,
                   area.y_min + area.height() * (static_cast<double>(r) + 0.5) / rows});
  }
  return out;
}

WorldConfig load_config_text(std::string_view text) {
  json doc;
  try {
    doc = text.find_first_not_of(" \t\r\n") == std::string_view::npos
              ? json::object()
              : json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<document>: parse error: ") + e.what());
  }

  check_keys(doc, "",
             {"version", "area", "uav", "step_duration", "episodes", "max_steps", "seed",
              "channel", "energy", "learning", "scenario", "checkpoint_every",
              "trajectory_every", "eval_episodes"});
  WorldConfig c;
  if (auto it = doc.find("version"); it != doc.end()) {
    if (*it != kConfigVersion) fail("version", "unsupported config version");
  }
  if (auto it = doc.find("area"); it != doc.end()) {
    check_keys(*it, "area", {"x_min", "x_max", "y_min", "y_max"});
    c.area.x_min = read_number(*it, "x_min", "area", c.area.x_min);
    c.area.x_max = read_number(*it, "x_max", "area", c.area.x_max);
    c.area.y_min = read_number(*it, "y_min", "area", c.area.y_min);
    c.area.y_max = read_number(*it, "y_max", "area", c.area.y_max);
  }
  if (auto it = doc.find("uav"); it != doc.end()) {
    check_keys(*it, "uav", {"altitude", "count", "step_size", "initial_positions"});
    c.uav_altitude = read_number(*it, "altitude", "uav", c.uav_altitude);
    c.n_uavs = read_count(*it, "count", "uav", c.n_uavs);
    c.uav_step_size = read_number(*it, "step_size", "uav", c.uav_step_size);
    if (auto p = it->find("initial_positions"); p != it->end()) {
      if (!p->is_array()) fail("uav.initial_positions", "expected an array");
      for (std::size_t i = 0; i < p->size(); ++i) {
        c.initial_positions.push_back(
            read_point((*p)[i], "uav.initial_positions[" + std::to_string(i) + "]"));
      }
    }
  }
  c.step_duration = read_number(doc, "step_duration", "", c.step_duration);
  c.episodes = read_count(doc, "episodes", "", c.episodes);
  c.max_steps = read_count(doc, "max_steps", "", c.max_steps);
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      fail("seed", "expected a non-negative integer");
    }
    c.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("channel"); it != doc.end()) c.channel = read_channel(*it, "channel");
  if (auto it = doc.find("energy"); it != doc.end()) c.energy = read_energy(*it, "energy");
  if (auto it = doc.find("learning"); it != doc.end()) c.learning = read_learning(*it, "learning");
  if (auto it = doc.find("scenario"); it != doc.end()) c.scenario = read_scenario(*it, "scenario");
  c.checkpoint_every = read_count(doc, "checkpoint_every", "", c.checkpoint_every);
  c.trajectory_every = read_count(doc, "trajectory_every", "", c.trajectory_every);
  c.eval_episodes = read_count(doc, "eval_episodes", "", c.eval_episodes);

  c.validate();
  return c;
}

WorldConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto config = load_config_text(buffer.str());
  // Relative trace paths are resolved against the config file's directory.
  auto& trace = config.scenario.trace_path;
  if (!trace.empty() && trace.is_relative()) trace = path.parent_path() / trace;
  return config;
}

std::string dump_config(const WorldConfig& c) {
  json clusters = json::array();
  for (const auto& cl : c.scenario.clusters) {
    clusters.push_back({{"centre", point_json(cl.centre)},
                        {"radius", cl.radius},
                        {"weight", cl.weight}});
  }
  json initial = json::array();
  for (const auto& p : c.initial_positions) initial.push_back(point_json(p));

  json doc = {
      {"version", kConfigVersion},
      {"area",
       {{"x_min", c.area.x_min},
        {"x_max", c.area.x_max},
        {"y_min", c.area.y_min},
        {"y_max", c.area.y_max}}},
      {"uav",
       {{"altitude", c.uav_altitude},
        {"count", c.n_uavs},
        {"step_size", c.uav_step_size},
        {"initial_positions", initial}}},
      {"step_duration", c.step_duration},
      {"episodes", c.episodes},
      {"max_steps", c.max_steps},
      {"seed", c.seed},
      {"channel",
       {{"attenuation", c.channel.attenuation},
        {"pathloss_exponent", c.channel.pathloss_exponent},
        {"tx_power_w", c.channel.tx_power_w},
        {"noise_w", c.channel.noise_w},
        {"sinr_threshold", c.channel.sinr_threshold},
        {"bandwidth_hz", c.channel.bandwidth_hz},
        {"interference_range_m", number_or_null(c.channel.interference_range_m)}}},
      {"energy",
       {{"kappa0", c.energy.kappa0},
        {"kappa1", c.energy.kappa1},
        {"kappa2", c.energy.kappa2},
        {"tip_speed", c.energy.tip_speed},
        {"hover_velocity", c.energy.hover_velocity},
        {"battery_capacity_j", c.energy.battery_capacity_j},
        {"power_model_sign", std::string(to_string(c.energy.sign))}}},
      {"learning",
       {{"learning_rate", c.learning.learning_rate},
        {"discount", c.learning.discount},
        {"replay_capacity", c.learning.replay_capacity},
        {"batch_size", c.learning.batch_size},
        {"target_sync_period", c.learning.target_sync_period},
        {"epsilon_start", c.learning.epsilon_start},
        {"epsilon_end", c.learning.epsilon_end},
        {"epsilon_decay_episodes", c.learning.epsilon_decay_episodes},
        {"comm_range_m", c.learning.comm_range_m},
        {"n_neighbors", c.learning.n_neighbors},
        {"rmsprop_decay", c.learning.rmsprop_decay},
        {"rmsprop_epsilon", c.learning.rmsprop_epsilon},
        {"hidden_layers", c.learning.hidden_layers}}},
      {"scenario",
       {{"kind", std::string(to_string(c.scenario.kind))},
        {"n_vehicles", c.scenario.n_vehicles},
        {"clusters", clusters},
        {"cross_centre",
         c.scenario.cross_centre ? point_json(*c.scenario.cross_centre) : json(nullptr)},
        {"strip_width", c.scenario.strip_width},
        {"band_width", c.scenario.band_width},
        {"trace_path", c.scenario.trace_path.generic_string()}}},
      {"checkpoint_every", c.checkpoint_every},
      {"trajectory_every", c.trajectory_every},
      {"eval_episodes", c.eval_episodes},
  };
  return doc.dump(2);
}

std::uint64_t config_hash(const WorldConfig& config) {
  // FNV-1a over the canonical dump.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(config)) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void apply_environment_overrides(WorldConfig& config) {
  if (const char* raw = std::getenv("DACEMAD_SEED"); raw != nullptr && *raw != '\0') {
    char* end = nullptr;
    const auto value = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0') throw ConfigError("DACEMAD_SEED: expected an unsigned integer");
    config.seed = value;
  }
}

}  // namespace dacemad
