// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "../support/gradcheck.hpp"
#include "../support/oracles.hpp"
#include "CLI11.hpp"
#include "dacemad/agent.hpp"
#include "dacemad/channel.hpp"
#include "dacemad/energy.hpp"
#include "dacemad/environment.hpp"
#include "dacemad/harness.hpp"
#include "dacemad/metrics.hpp"
#include "dacemad/replay_buffer.hpp"

using namespace dacemad;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kHoverPower = 168.48;
constexpr double kHoverTol = 0.005;
constexpr std::size_t kChannelInstances = 200;
constexpr double kSinrRelTol = 1e-12;
constexpr std::size_t kGradSeeds = 10;
constexpr std::size_t kGradBatch = 4;
constexpr double kGradRelTol = 1e-3;
constexpr std::size_t kRewardTuples = 1000;
constexpr double kRewardTol = 1e-12;
constexpr std::size_t kFifoCapacity = 100;
constexpr std::size_t kFifoInserts = 1000;
constexpr int kEpsilonDraws = 10000;
constexpr double kLearningCdr = 0.8;
constexpr double kLearningEeRatio = 1.5;
constexpr double kSeedBudgetS = 15.0 * 60.0;
constexpr double kAblationMargin = 1.10;
constexpr double kEeRelTol = 1e-9;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

fs::path config_path(const char* name) { return fs::path(DACEMAD_SOURCE_DIR) / "configs" / name; }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "dacemad_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome hover_power() {
  const double p = energy::propulsion_power(0.0, EnergyParams{});
  return {std::abs(p - kHoverPower) <= kHoverTol,
          "P(0) = " + fmt(p, 10) + " W, expected 168.48 +- 0.005"};
}

Outcome channel_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0.0, 3000.0);
  std::uniform_int_distribution<int> n_uav(1, 5), n_veh(0, 20);
  const ChannelParams params;
  const oracle::ChannelConsts consts;
  std::size_t mismatched_association = 0;
  double worst = 0.0;
  for (std::size_t trial = 0; trial < kChannelInstances; ++trial) {
    std::vector<Point3> uavs;
    std::vector<oracle::Pt3> ouavs;
    for (int j = n_uav(rng); j > 0; --j) {
      const double x = pos(rng), y = pos(rng);
      uavs.push_back({x, y, 120.0});
      ouavs.push_back({x, y, 120.0});
    }
    std::vector<Point2> pts;
    std::vector<oracle::Pt2> opts;
    for (int i = n_veh(rng); i > 0; --i) {
      const double x = pos(rng), y = pos(rng);
      pts.push_back({x, y});
      opts.push_back({x, y});
    }
    std::vector<std::string> ids(pts.size(), "v");
    std::vector<channel::VehicleRef> refs;
    for (std::size_t i = 0; i < pts.size(); ++i) refs.push_back({ids[i], pts[i]});
    std::vector<std::size_t> scores;
    const auto expected = oracle::brute_force_association(opts, ouavs, consts, &scores);
    const auto got = channel::associate_and_score(refs, uavs, params);
    if (got.scores != scores) ++mismatched_association;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (got.links[i].serving_uav != expected[i].uav ||
          got.links[i].connected != expected[i].connected) {
        ++mismatched_association;
      }
      worst = std::max(worst, std::abs(got.links[i].sinr - expected[i].sinr) / expected[i].sinr);
    }
  }
  return {mismatched_association == 0 && worst <= kSinrRelTol,
          std::to_string(kChannelInstances) + " instances, association mismatches " +
              std::to_string(mismatched_association) + ", worst SINR rel err " + fmt(worst)};
}

Outcome gradient_check() {
  double worst = 0.0;
  std::size_t components = 0;
  for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto net = nn::Mlp::glorot({27, 128, 64, 5}, rng);
    Eigen::MatrixXd x, y, m;
    gradcheck::random_batch(rng, 27, 5, kGradBatch, &x, &y, &m);
    const auto r = gradcheck::check(net, x, y, m);
    worst = std::max(worst, r.worst_relative);
    components += r.components;
  }
  return {worst < kGradRelTol, std::to_string(kGradSeeds) + " seeds x batch " +
                                   std::to_string(kGradBatch) + ", " + std::to_string(components) +
                                   " components, worst rel err " + fmt(worst)};
}

Outcome double_q() {
  nn::Mlp online({1, 2});
  nn::Mlp target({1, 2});
  online.params().layers[0].weight << 1.0, 0.0;  // prefers action 0
  target.params().layers[0].weight << 0.7, 5.0;  // values action 0 at 0.7
  const std::vector<double> s{1.0};
  const double terminal = agent::double_q_target(2.0, s, true, online, target, 0.95);
  const double myopic = agent::double_q_target(1.0, s, false, online, target, 0.0);
  const double split = agent::double_q_target(1.0, s, false, online, target, 0.95);
  const double hand = 1.0 + 0.95 * 0.7;
  const bool ok = terminal == 2.0 && myopic == 1.0 && split == hand &&
                  std::abs(split - 1.665) < 1e-15;
  return {ok, "terminal " + fmt(terminal) + " (2), gamma=0 " + fmt(myopic) + " (1), split " +
                  fmt(split, 17) + " (1.665)"};
}

Outcome reward_algebra() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> count(0, 40);
  std::uniform_real_distribution<double> energy(0.0, 800.0);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  double omega_min = 0.0, omega_max = 0.0;
  std::set<int> branches;
  for (std::size_t i = 0; i < kRewardTuples; ++i) {
    env::RewardInputs in;
    in.score = count(rng);
    in.prev_score = coin(rng) ? in.score : count(rng);
    in.best_score = std::max<std::size_t>(in.prev_score, count(rng));
    in.step_energy = coin(rng) ? energy(rng) : 168.48;
    in.prev_step_energy = energy(rng);
    in.hood_score = count(rng);
    in.prev_hood_score = count(rng);
    in.best_hood_score = std::max<std::size_t>(in.prev_hood_score, count(rng));
    in.cooperative = true;
    const double expect = oracle::reward(
        in.score, in.prev_score, in.best_score, in.step_energy, in.prev_step_energy,
        in.hood_score, in.prev_hood_score, in.best_hood_score, true);
    worst = std::max(worst, std::abs(env::reward(in) - expect));
    const double w = env::energy_term(in.prev_step_energy, in.step_energy);
    omega_min = std::min(omega_min, w);
    omega_max = std::max(omega_max, w);
    branches.insert(in.score > in.prev_score ? 0 : in.score == in.prev_score ? 1 : 2);
  }
  const bool ok = worst <= kRewardTol && branches.size() == 3 && omega_min >= -1.0 &&
                  omega_max <= 1.0;
  return {ok, std::to_string(kRewardTuples) + " tuples, max abs err " + fmt(worst) + ", branches " +
                  std::to_string(branches.size()) + "/3, omega in [" + fmt(omega_min) + ", " +
                  fmt(omega_max) + "]"};
}

Outcome replay_and_epsilon() {
  agent::ReplayBuffer buffer(kFifoCapacity, 1);
  std::deque<double> oracle_list;
  bool fifo_ok = true;
  for (std::size_t i = 0; i < kFifoInserts; ++i) {
    const std::vector<double> s{static_cast<double>(i)};
    buffer.push(s, i % env::kNumActions, static_cast<double>(i), s, false);
    oracle_list.push_back(static_cast<double>(i));
    if (oracle_list.size() > kFifoCapacity) oracle_list.pop_front();
  }
  fifo_ok = buffer.size() == oracle_list.size();
  for (std::size_t i = 0; fifo_ok && i < oracle_list.size(); ++i) {
    fifo_ok = buffer.at_age(i).reward == oracle_list[i] && buffer.at_age(i).state[0] == oracle_list[i];
  }

  LearningParams p;
  agent::DdqnAgent a(27, p, agent::Variant::dacemad, 99);
  std::vector<int> counts(env::kNumActions, 0);
  const std::vector<double> obs(27, 0.4);
  for (int i = 0; i < kEpsilonDraws; ++i) ++counts[env::index_of(a.select_action(obs, 1.0))];
  const double expect = kEpsilonDraws / static_cast<double>(env::kNumActions);
  const double sigma = std::sqrt(kEpsilonDraws * 0.2 * 0.8);
  double worst_z = 0.0;
  for (int c : counts) worst_z = std::max(worst_z, std::abs(c - expect) / sigma);
  std::string freq;
  for (int c : counts) freq += std::to_string(c) + " ";
  return {fifo_ok && worst_z <= 3.0,
          std::string("FIFO ") + (fifo_ok ? "ok" : "broken") + " (capacity 100, 1000 inserts), " +
              "epsilon=1 counts " + freq + "max |z| " + fmt(worst_z, 3)};
}

struct SeedRun {
  double cdr = 0.0;
  double ee = 0.0;
  double wall_s = 0.0;
};

SeedRun eval_mean(const std::vector<harness::EpisodeResult>& eps) {
  SeedRun r;
  for (const auto& e : eps) {
    r.cdr += e.metrics.cdr;
    r.ee += e.metrics.ee;
  }
  r.cdr /= static_cast<double>(eps.size());
  r.ee /= static_cast<double>(eps.size());
  return r;
}

SeedRun train_and_eval(const WorldConfig& config, std::uint64_t seed, agent::Variant v) {
  WorldConfig c = config;
  c.seed = seed;
  harness::Session s(c, seed, v);
  const auto start = std::chrono::steady_clock::now();
  if (v != agent::Variant::random) harness::train(s, {});
  auto r = eval_mean(s.evaluate(c.eval_episodes));
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Outcome desk_learning() {
  const auto config = load_config(config_path("desk_two_clusters.json"));
  std::vector<double> cdr, ee, random_ee, untrained_cdr;
  double slowest = 0.0;
  for (auto seed : kSeeds) {
    const auto d = train_and_eval(config, seed, agent::Variant::dacemad);
    const auto r = train_and_eval(config, seed, agent::Variant::random);
    WorldConfig c = config;
    c.seed = seed;
    harness::Session fresh(c, seed, agent::Variant::dacemad);
    const auto u = eval_mean(fresh.evaluate(1));
    cdr.push_back(d.cdr);
    ee.push_back(d.ee);
    random_ee.push_back(r.ee);
    untrained_cdr.push_back(u.cdr);
    slowest = std::max(slowest, d.wall_s);
    std::cout << "  seed " << seed << ": dacemad cdr " << fmt(d.cdr) << " ee " << fmt(d.ee)
              << " (" << fmt(d.wall_s, 4) << " s), random ee " << fmt(r.ee) << ", untrained cdr "
              << fmt(u.cdr) << '\n'
              << std::flush;
  }
  const auto mc = metrics::summarise_values(cdr);
  const auto me = metrics::summarise_values(ee);
  const auto mr = metrics::summarise_values(random_ee);
  const auto mu = metrics::summarise_values(untrained_cdr);
  const double ratio = me.mean / mr.mean;
  std::cout << "  untrained greedy cdr " << fmt(mu.mean) << " vs trained " << fmt(mc.mean)
            << (mu.mean < mc.mean ? " (trained higher)" : " (trained NOT higher)") << '\n';
  const bool ok = mc.mean >= kLearningCdr && ratio >= kLearningEeRatio && slowest <= kSeedBudgetS;
  return {ok, "mean cdr " + fmt(mc.mean) + " +- " + fmt(mc.std) + " (>= 0.8), EE " + fmt(me.mean) +
                  " vs random " + fmt(mr.mean) + " = " + fmt(ratio, 4) +
                  "x (>= 1.5), slowest seed " + fmt(slowest, 4) + " s (<= 900)"};
}

Outcome ablation() {
  const auto config = load_config(config_path("desk_three_clusters.json"));
  std::map<agent::Variant, std::vector<double>> ee, cdr;
  for (auto v : {agent::Variant::dacemad, agent::Variant::cmad, agent::Variant::mad}) {
    for (auto seed : kSeeds) {
      const auto r = train_and_eval(config, seed, v);
      ee[v].push_back(r.ee);
      cdr[v].push_back(r.cdr);
      std::cout << "  " << agent::to_string(v) << " seed " << seed << ": ee " << fmt(r.ee)
                << " cdr " << fmt(r.cdr) << " (" << fmt(r.wall_s, 4) << " s)\n"
                << std::flush;
    }
  }
  auto s = [&](agent::Variant v) { return metrics::summarise_values(ee[v]); };
  const auto d = s(agent::Variant::dacemad), c = s(agent::Variant::cmad), m = s(agent::Variant::mad);
  for (auto v : {agent::Variant::dacemad, agent::Variant::cmad, agent::Variant::mad}) {
    const auto e = s(v);
    const auto k = metrics::summarise_values(cdr[v]);
    std::cout << "  " << agent::to_string(v) << ": EE " << fmt(e.mean) << " +- " << fmt(e.std)
              << ", cdr " << fmt(k.mean) << " +- " << fmt(k.std) << '\n';
  }
  const bool ok = d.mean >= kAblationMargin * c.mean && c.mean >= m.mean;
  return {ok, "dacemad/cmad EE " + fmt(d.mean / c.mean, 4) + " (>= 1.10), cmad/mad EE " +
                  fmt(c.mean / m.mean, 4) + " (>= 1)"};
}

std::vector<double> parse_csv_column(const fs::path& path, std::size_t col) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string field;
    for (std::size_t i = 0; i <= col; ++i) std::getline(row, field, ',');
    out.push_back(std::stod(field));
  }
  return out;
}

Outcome accounting() {
  auto config = load_config(config_path("desk_two_clusters.json"));
  config.episodes = 6;
  config.trajectory_every = 1;
  const auto dir = scratch("accounting");
  std::size_t runs = 0, episodes = 0, ee_fail = 0, energy_fail = 0;
  double worst = 0.0;
  for (auto v : {agent::Variant::dacemad, agent::Variant::mad, agent::Variant::random}) {
    for (std::uint64_t seed : {1, 2}) {
      WorldConfig c = config;
      c.seed = seed;
      harness::Session s(c, seed, v);
      harness::TrainOptions opts;
      opts.run_dir = harness::run_directory(dir, v, seed);
      harness::train(s, opts);
      ++runs;
      const auto ee = parse_csv_column(*opts.run_dir / "metrics.csv", 2);
      const auto kj = parse_csv_column(*opts.run_dir / "metrics.csv", 3);
      for (std::size_t e = 0; e < ee.size(); ++e) {
        const auto t = metrics::read_trajectory(*opts.run_dir / "trajectories" /
                                                ("trajectory_" + std::to_string(e) + ".json"));
        double bits = 0.0, joules = 0.0;
        for (const auto& step : t.steps) {
          for (const auto& u : step.uavs) {
            if (!u.active) continue;
            bits += u.rate_bps * step.step_duration;
            joules += step.step_duration * energy::propulsion_power(u.speed, c.energy);
          }
        }
        const double recomputed = bits / joules;
        const double rel = std::abs(recomputed - ee[e]) / ee[e];
        worst = std::max(worst, rel);
        if (!(rel <= kEeRelTol)) ++ee_fail;
        if (joules / 1000.0 != kj[e]) ++energy_fail;
        ++episodes;
      }
    }
  }
  return {ee_fail == 0 && energy_fail == 0,
          std::to_string(runs) + " runs, " + std::to_string(episodes) +
              " episodes, worst EE rel err " + fmt(worst) + ", energy mismatches " +
              std::to_string(energy_fail)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto dir = scratch("determinism");
  const std::string base = std::string(DACEMAD_CLI) + " train --config " +
                           config_path("desk_two_clusters.json").string() +
                           " --episodes-override 30 --seeds 7 > /dev/null --out ";
  for (const char* run : {"a", "b"}) {
    if (std::system((base + (dir / run).string()).c_str()) != 0) {
      return {false, "train exited with an error"};
    }
  }
  const auto a = slurp(dir / "a" / "dacemad" / "seed_7" / "metrics.csv");
  const auto b = slurp(dir / "b" / "dacemad" / "seed_7" / "metrics.csv");
  const auto rows = std::count(a.begin(), a.end(), '\n') - 1;
  return {!a.empty() && a == b, "two 30-episode train runs, seed 7: " + std::to_string(rows) +
                                    " rows, " + (a == b ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> selected{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  app.add_option("--criteria", selected, "Criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"hover power", hover_power}},
      {2, {"channel oracle equivalence", channel_oracle}},
      {3, {"gradient correctness", gradient_check}},
      {4, {"double-Q target", double_q}},
      {5, {"reward algebra", reward_algebra}},
      {6, {"replay and epsilon properties", replay_and_epsilon}},
      {7, {"desk-scale learning", desk_learning}},
      {8, {"ablation direction", ablation}},
      {9, {"accounting identities", accounting}},
      {10, {"determinism", determinism}},
  };

  int failures = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    std::cout << "criterion " << id << " (" << it->second.first << ") running\n" << std::flush;
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << it->second.first
              << ": " << o.detail << '\n'
              << std::flush;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
