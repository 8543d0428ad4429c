#include "dacemad/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dacemad/energy.hpp"
#include "json.hpp"

namespace dacemad::metrics {

using nlohmann::json;

CdrResult cdr(std::span<const env::StepLog> steps) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& s : steps) {
    if (s.deployed == 0) continue;
    std::size_t connected = 0;
    for (const auto& u : s.uavs) connected += u.score;
    sum += static_cast<double>(connected) / static_cast<double>(s.deployed);
    ++counted;
  }
  if (counted == 0) return {0.0, false};
  return {sum / static_cast<double>(counted), true};
}

EpisodeMetrics summarise(std::size_t episode, std::span<const env::StepLog> steps) {
  EpisodeMetrics m;
  m.episode = episode;
  m.steps = steps.size();
  const auto c = cdr(steps);
  m.cdr = c.value;
  m.cdr_defined = c.defined;
  const auto n_uavs = steps.empty() ? 0 : steps.front().uavs.size();
  m.agent_energy.assign(n_uavs, {});
  m.agent_score.assign(n_uavs, {});
  for (const auto& s : steps) {
    m.message_total += s.messages;
    for (std::size_t j = 0; j < s.uavs.size(); ++j) {
      const auto& u = s.uavs[j];
      m.total_bits += u.bits;
      m.total_energy_j += u.energy_j;
      m.agent_energy[j].push_back(u.energy_j);
      m.agent_score[j].push_back(u.score);
    }
  }
  m.ee = m.total_energy_j > 0.0 ? energy::total_system_ee(m.total_bits, m.total_energy_j) : 0.0;
  return m;
}

Summary summarise_values(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return s;
}

std::map<std::string, std::vector<double>> normalise_ee(
    const std::map<std::string, std::vector<double>>& groups, const std::string& reference) {
  const auto ref = groups.find(reference);
  if (ref == groups.end() || ref->second.empty()) {
    throw MetricsError("normalise_ee: reference group '" + reference + "' is empty");
  }
  const double mean = summarise_values(ref->second).mean;
  if (mean == 0.0) throw MetricsError("normalise_ee: reference mean EE is zero");
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, values] : groups) {
    auto& dst = out[name];
    for (double v : values) dst.push_back(v / mean);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string metrics_row(const EpisodeMetrics& m) {
  return std::to_string(m.episode) + "," + format_number(m.cdr) + "," + format_number(m.ee) +
         "," + format_number(m.total_energy_kj()) + "," + std::to_string(m.message_total);
}

MetricsCsv::MetricsCsv(std::filesystem::path path, std::size_t keep_through)
    : path_(std::move(path)) {
  std::vector<std::string> kept;
  if (keep_through > 0) {
    std::ifstream in(path_);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      std::size_t ep = 0;
      auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, ep);
      if (ec == std::errc() && ep < keep_through) kept.push_back(line);
    }
  }
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw MetricsError(path_.string() + ": cannot write metrics file");
  out << kMetricsHeader << '\n';
  for (const auto& line : kept) out << line << '\n';
}

void MetricsCsv::append(const EpisodeMetrics& m) {
  std::ofstream out(path_, std::ios::app);
  out << metrics_row(m) << '\n';
  if (!out) throw MetricsError(path_.string() + ": write failed");
}

namespace {

json step_to_json(const env::StepLog& s) {
  json uavs = json::array();
  for (const auto& u : s.uavs) {
    uavs.push_back({{"x", u.x},
                    {"y", u.y},
                    {"speed", u.speed},
                    {"score", u.score},
                    {"energy_j", u.energy_j},
                    {"rate_bps", u.rate_bps},
                    {"bits", u.bits},
                    {"reward", u.reward},
                    {"active", u.active}});
  }
  json j = {{"t", s.t},
            {"step_duration", s.step_duration},
            {"deployed", s.deployed},
            {"messages", s.messages},
            {"uavs", uavs}};
  if (!s.vehicles.empty()) {
    json vehicles = json::array();
    for (const auto& v : s.vehicles) {
      vehicles.push_back({{"id", v.id}, {"x", v.x}, {"y", v.y}, {"serving", v.serving}});
    }
    j["vehicles"] = std::move(vehicles);
  }
  return j;
}

env::StepLog step_from_json(const json& j) {
  env::StepLog s;
  s.t = j.at("t").get<std::size_t>();
  s.step_duration = j.at("step_duration").get<double>();
  s.deployed = j.at("deployed").get<std::size_t>();
  s.messages = j.at("messages").get<std::size_t>();
  for (const auto& u : j.at("uavs")) {
    env::UavStepRecord r;
    r.x = u.at("x").get<double>();
    r.y = u.at("y").get<double>();
    r.speed = u.at("speed").get<double>();
    r.score = u.at("score").get<std::size_t>();
    r.energy_j = u.at("energy_j").get<double>();
    r.rate_bps = u.at("rate_bps").get<double>();
    r.bits = u.at("bits").get<double>();
    r.reward = u.at("reward").get<double>();
    r.active = u.at("active").get<bool>();
    s.uavs.push_back(r);
  }
  if (auto it = j.find("vehicles"); it != j.end()) {
    for (const auto& v : *it) {
      s.vehicles.push_back({v.at("id").get<std::string>(), v.at("x").get<double>(),
                            v.at("y").get<double>(), v.at("serving").get<int>()});
    }
  }
  return s;
}

}  // namespace

std::string step_json(const env::StepLog& step) { return step_to_json(step).dump(); }

void write_step_jsonl(std::ostream& out, std::span<const env::StepLog> steps) {
  for (const auto& s : steps) out << step_json(s) << '\n';
}

void write_trajectory(const std::filesystem::path& path, std::size_t episode,
                      std::span<const env::StepLog> steps) {
  json doc = {{"episode", episode}, {"steps", json::array()}};
  for (const auto& s : steps) doc["steps"].push_back(step_to_json(s));
  std::ofstream out(path);
  if (!out) throw MetricsError(path.string() + ": cannot write trajectory");
  out << doc.dump() << '\n';
  if (!out) throw MetricsError(path.string() + ": write failed");
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricsError(path.string() + ": cannot open trajectory");
  const json doc = json::parse(in);
  Trajectory t;
  t.episode = doc.at("episode").get<std::size_t>();
  for (const auto& s : doc.at("steps")) t.steps.push_back(step_from_json(s));
  return t;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
  const json doc = {{"format", "dacemad-run/1"},
                    {"config_hash", hash},
                    {"seed", m.seed},
                    {"variant", m.variant},
                    {"episodes_completed", m.episodes_completed},
                    {"episodes_planned", m.episodes_planned}};
  std::ofstream out(path);
  if (!out) throw MetricsError(path.string() + ": cannot write manifest");
  out << doc.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricsError(path.string() + ": cannot open manifest");
  const json doc = json::parse(in);
  Manifest m;
  m.config_hash = std::stoull(doc.at("config_hash").get<std::string>(), nullptr, 16);
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.variant = doc.at("variant").get<std::string>();
  m.episodes_completed = doc.at("episodes_completed").get<std::size_t>();
  m.episodes_planned = doc.at("episodes_planned").get<std::size_t>();
  return m;
}

void write_comparison(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << kComparisonHeader << '\n';
  for (const auto& r : rows) {
    out << r.variant << ',' << format_number(r.cdr.mean) << ',' << format_number(r.cdr.std) << ','
        << format_number(r.ee_norm.mean) << ',' << format_number(r.ee_norm.std) << ','
        << format_number(r.energy_kj.mean) << ',' << format_number(r.energy_kj.std) << '\n';
  }
}

}  // namespace dacemad::metrics
