#pragma once

// Episode loop and run orchestration behind the command-line tool.
//
// Output layout for a run directory:
//   <out>/<variant>/seed_<seed>/metrics.csv
//   <out>/<variant>/seed_<seed>/manifest.json
//   <out>/<variant>/seed_<seed>/checkpoints/agent_<j>.ckpt
//   <out>/<variant>/seed_<seed>/trajectories/trajectory_<episode>.json
//   <out>/<variant>/seed_<seed>/eval_metrics.csv          (eval, compare)
//   <out>/comparison.csv                                  (compare)

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacemad/agent.hpp"
#include "dacemad/config.hpp"
#include "dacemad/environment.hpp"
#include "dacemad/metrics.hpp"
#include "dacemad/mobility.hpp"

namespace dacemad::harness {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Vehicle stream for a config; trace rejections are reported through `rejected`.
mobility::VehicleStream build_vehicles(const WorldConfig& config, std::uint64_t seed,
                                       std::size_t* rejected = nullptr);

struct EpisodeMode {
  bool learn = true;
  bool greedy = false;
  bool record_vehicles = false;
  bool keep_logs = false;
};

struct EpisodeResult {
  metrics::EpisodeMetrics metrics;
  std::vector<env::StepLog> logs;  // filled when keep_logs
  bool truncated_by_trace = false;
};

// One environment plus one learner per UAV, for a single (seed, variant).
class Session {
 public:
  Session(WorldConfig config, std::uint64_t seed, agent::Variant variant);

  EpisodeResult run_episode(const EpisodeMode& mode);
  // Greedy episodes without learning; density memory is restored after
  // each one so evaluation leaves the session unchanged.
  std::vector<EpisodeResult> evaluate(std::size_t episodes, bool keep_logs = false);

  void save_checkpoints(const std::filesystem::path& dir) const;
  void load_checkpoints(const std::filesystem::path& dir);

  const WorldConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  agent::Variant variant() const { return variant_; }
  std::size_t episodes_done() const { return episodes_done_; }
  void set_episodes_done(std::size_t n) { episodes_done_ = n; }
  const std::vector<agent::DdqnAgent>& agents() const { return agents_; }
  env::Environment& environment() { return env_; }

 private:
  WorldConfig config_;
  std::uint64_t seed_;
  agent::Variant variant_;
  env::Environment env_;
  std::vector<agent::DdqnAgent> agents_;
  std::size_t episodes_done_ = 0;
};

struct TrainOptions {
  std::optional<std::filesystem::path> run_dir;  // no files when empty
  bool resume = false;
  std::function<void(const metrics::EpisodeMetrics&)> on_episode;
};

struct TrainResult {
  std::vector<metrics::EpisodeMetrics> episodes;
  double wall_time_s = 0.0;
};

std::filesystem::path run_directory(const std::filesystem::path& out, agent::Variant variant,
                                    std::uint64_t seed);

TrainResult train(Session& session, const TrainOptions& options);

struct ComparisonRun {
  agent::Variant variant;
  std::uint64_t seed;
  double cdr = 0.0;
  double ee = 0.0;
  double energy_kj = 0.0;
};

struct ComparisonResult {
  std::vector<ComparisonRun> runs;
  std::vector<metrics::ComparisonRow> rows;
};

// Rows in the order of `variants`; EE normalised by the dacemad mean when
// dacemad is present, otherwise by the first variant.
std::vector<metrics::ComparisonRow> comparison_table(const std::vector<ComparisonRun>& runs,
                                                     const std::vector<agent::Variant>& variants);

struct RunPlan {
  enum class Command { train, eval, compare, gen_scenario };
  Command command = Command::train;
  std::filesystem::path config_path;
  std::filesystem::path out;
  std::vector<std::uint64_t> seeds;
  std::vector<agent::Variant> variants;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::size_t> episodes_override;
  std::optional<std::size_t> steps;  // gen-scenario length
  bool resume = false;
};

int run_plan(const RunPlan& plan, std::ostream& log);

ComparisonResult compare(const WorldConfig& config, const std::vector<std::uint64_t>& seeds,
                         const std::vector<agent::Variant>& variants,
                         const std::optional<std::filesystem::path>& out, std::ostream& log);

}  // namespace dacemad::harness
