#pragma once

// Evaluation quantities and the files they are exported to.
//
//   metrics.csv        episode,cdr,ee,total_energy_kj,messages
//   trajectory_<n>.json  {"episode", "steps": [step...]}
//   steps_<n>.jsonl      one step object per line
//   manifest.json      config hash, seed, variant, episode counters
//   comparison.csv     variant,cdr_mean,cdr_std,ee_norm_mean,ee_norm_std,
//                      energy_kj_mean,energy_kj_std
//
// A step object holds t, step_duration, deployed, messages, a "uavs" array of
// {x, y, speed, score, energy_j, rate_bps, bits, reward, active} and, when
// recorded, a "vehicles" array of {id, x, y, serving}.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dacemad/config.hpp"
#include "dacemad/environment.hpp"

namespace dacemad::metrics {

inline constexpr std::string_view kMetricsHeader = "episode,cdr,ee,total_energy_kj,messages";
inline constexpr std::string_view kComparisonHeader =
    "variant,cdr_mean,cdr_std,ee_norm_mean,ee_norm_std,energy_kj_mean,energy_kj_std";

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CdrResult {
  double value = 0.0;
  // False when no step had any deployed vehicle.
  bool defined = false;
};

// Mean over steps of connected / deployed, skipping steps with nothing deployed.
CdrResult cdr(std::span<const env::StepLog> steps);

struct EpisodeMetrics {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double cdr = 0.0;
  bool cdr_defined = false;
  double total_bits = 0.0;
  double total_energy_j = 0.0;
  double ee = 0.0;
  std::size_t message_total = 0;
  double wall_time_s = 0.0;
  std::vector<std::vector<double>> agent_energy;       // [uav][step]
  std::vector<std::vector<std::size_t>> agent_score;   // [uav][step]

  double total_energy_kj() const { return total_energy_j / 1000.0; }
};

EpisodeMetrics summarise(std::size_t episode, std::span<const env::StepLog> steps);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for fewer than 2 values
};

Summary summarise_values(std::span<const double> values);

// Each value divided by the mean of the reference group.
std::map<std::string, std::vector<double>> normalise_ee(
    const std::map<std::string, std::vector<double>>& groups, const std::string& reference);

std::string format_number(double v);

class MetricsCsv {
 public:
  // Opens `path`, writing the header. With `keep_through` set, existing rows
  // for episodes < keep_through are retained (resume) and later rows dropped.
  explicit MetricsCsv(std::filesystem::path path, std::size_t keep_through = 0);
  void append(const EpisodeMetrics& m);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string metrics_row(const EpisodeMetrics& m);

std::string step_json(const env::StepLog& step);
void write_step_jsonl(std::ostream& out, std::span<const env::StepLog> steps);
void write_trajectory(const std::filesystem::path& path, std::size_t episode,
                      std::span<const env::StepLog> steps);

struct Trajectory {
  std::size_t episode = 0;
  std::vector<env::StepLog> steps;
};
Trajectory read_trajectory(const std::filesystem::path& path);

struct Manifest {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string variant;
  std::size_t episodes_completed = 0;
  std::size_t episodes_planned = 0;
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

struct ComparisonRow {
  std::string variant;
  Summary cdr;
  Summary ee_norm;
  Summary energy_kj;
};

void write_comparison(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace dacemad::metrics
