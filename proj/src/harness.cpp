#include "dacemad/harness.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>

#include "dacemad/binary_io.hpp"

namespace dacemad::harness {

namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

mobility::VehicleStream build_vehicles(const WorldConfig& config, std::uint64_t seed,
                                       std::size_t* rejected) {
  if (config.scenario.kind == ScenarioKind::trace) {
    auto data = mobility::load_trace(config.scenario.trace_path, config.area);
    if (rejected != nullptr) *rejected = data.rejected_rows;
    return std::move(data.stream);
  }
  if (rejected != nullptr) *rejected = 0;
  return mobility::generate_scenario(config.scenario, config.area, derive_seed(seed, 1000));
}

Session::Session(WorldConfig config, std::uint64_t seed, agent::Variant variant)
    : config_(std::move(config)),
      seed_(seed),
      variant_(variant),
      env_(config_, build_vehicles(config_, seed), agent::env_options_for(variant)) {
  agents_.reserve(config_.n_uavs);
  for (std::size_t j = 0; j < config_.n_uavs; ++j) {
    agents_.emplace_back(config_.observation_size(), config_.learning, variant,
                         derive_seed(seed, j));
  }
}

EpisodeResult Session::run_episode(const EpisodeMode& mode) {
  EpisodeResult result;
  env_.set_record_vehicles(mode.record_vehicles);

  const auto start = std::chrono::steady_clock::now();
  const double epsilon =
      mode.greedy ? 0.0 : agent::epsilon_schedule(episodes_done_, config_.learning);
  auto current = env_.reset();
  std::vector<env::StepLog> logs;
  std::vector<std::optional<env::Action>> actions(config_.n_uavs);

  while (!env_.terminated()) {
    for (std::size_t j = 0; j < config_.n_uavs; ++j) {
      actions[j].reset();
      if (!current.observations[j].empty()) {
        actions[j] = agents_[j].select_action(current.observations[j], epsilon);
      }
    }
    auto next = env_.step(actions);
    if (mode.learn) {
      for (std::size_t j = 0; j < config_.n_uavs; ++j) {
        if (!actions[j]) continue;
        agents_[j].remember(current.observations[j], *actions[j], next.rewards[j],
                            next.observations[j], next.terminal[j]);
        agents_[j].learn_step();
      }
    }
    // UAVs that died this step no longer act.
    for (std::size_t j = 0; j < config_.n_uavs; ++j) {
      if (!env_.alive(j)) next.observations[j].clear();
    }
    logs.push_back(std::move(next.log));
    current = std::move(next);
  }

  const bool any_alive = [&] {
    for (std::size_t j = 0; j < config_.n_uavs; ++j) {
      if (env_.alive(j)) return true;
    }
    return false;
  }();
  result.truncated_by_trace = logs.size() < config_.max_steps && any_alive;
  result.metrics = metrics::summarise(episodes_done_, logs);
  result.metrics.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (mode.keep_logs) result.logs = std::move(logs);
  if (mode.learn) ++episodes_done_;
  return result;
}

std::vector<EpisodeResult> Session::evaluate(std::size_t episodes, bool keep_logs) {
  std::vector<env::DensityMemory> saved;
  for (std::size_t j = 0; j < config_.n_uavs; ++j) saved.push_back(env_.memory(j));
  std::vector<EpisodeResult> out;
  for (std::size_t e = 0; e < episodes; ++e) {
    for (std::size_t j = 0; j < saved.size(); ++j) env_.set_memory(j, saved[j]);
    out.push_back(run_episode({false, true, keep_logs, keep_logs}));
  }
  for (std::size_t j = 0; j < saved.size(); ++j) env_.set_memory(j, saved[j]);
  return out;
}

namespace {

fs::path agent_file(const fs::path& dir, std::size_t j) {
  return dir / ("agent_" + std::to_string(j) + ".ckpt");
}

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError(tmp.string() + ": cannot write");
    body(out);
    out.flush();
    if (!out) throw RunError(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

}  // namespace

void Session::save_checkpoints(const fs::path& dir) const {
  fs::create_directories(dir);
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    write_atomically(agent_file(dir, j),
                     [&](std::ostream& out) { agents_[j].save(out, env_.memory(j)); });
  }
}

void Session::load_checkpoints(const fs::path& dir) {
  if (variant_ == agent::Variant::random) return;
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    const auto path = agent_file(dir, j);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunError("missing checkpoint for agent " + std::to_string(j) + ": " + path.string());
    try {
      auto loaded = agent::DdqnAgent::load(in, config_.learning);
      if (loaded.agent.variant() != variant_) {
        throw RunError("checkpoint for agent " + std::to_string(j) + " was trained as " +
                       std::string(agent::to_string(loaded.agent.variant())));
      }
      agents_[j] = std::move(loaded.agent);
      env_.set_memory(j, loaded.memory);
    } catch (const io::FormatError& e) {
      throw RunError(path.string() + ": " + e.what());
    }
  }
}

fs::path run_directory(const fs::path& out, agent::Variant variant, std::uint64_t seed) {
  return out / std::string(agent::to_string(variant)) / ("seed_" + std::to_string(seed));
}

TrainResult train(Session& session, const TrainOptions& options) {
  const auto& config = session.config();
  TrainResult result;
  std::optional<metrics::MetricsCsv> csv;
  fs::path ckpt_dir;
  fs::path traj_dir;
  metrics::Manifest manifest{config_hash(config), session.seed(),
                             std::string(agent::to_string(session.variant())), 0,
                             config.episodes};
  const bool checkpoints = session.variant() != agent::Variant::random;

  if (options.run_dir) {
    const auto& dir = *options.run_dir;
    ckpt_dir = dir / "checkpoints";
    traj_dir = dir / "trajectories";
    std::error_code ec;
    fs::create_directories(traj_dir, ec);
    if (ec) throw RunError(traj_dir.string() + ": " + ec.message());
    if (options.resume) {
      const auto previous = metrics::read_manifest(dir / "manifest.json");
      WorldConfig planned = config;
      planned.episodes = previous.episodes_planned;
      if (previous.config_hash != config_hash(planned) || previous.seed != session.seed() ||
          previous.variant != manifest.variant) {
        throw RunError(dir.string() + ": manifest does not match this config/seed/variant");
      }
      if (checkpoints && previous.episodes_completed > 0) session.load_checkpoints(ckpt_dir);
      session.set_episodes_done(previous.episodes_completed);
    }
    csv.emplace(dir / "metrics.csv", session.episodes_done());
    manifest.episodes_completed = session.episodes_done();
    metrics::write_manifest(dir / "manifest.json", manifest);
  }

  const auto start = std::chrono::steady_clock::now();
  while (session.episodes_done() < config.episodes) {
    const auto ep = session.episodes_done();
    const bool last = ep + 1 == config.episodes;
    const bool trajectory =
        options.run_dir &&
        (last || (config.trajectory_every > 0 && (ep + 1) % config.trajectory_every == 0));
    auto episode = session.run_episode({true, false, trajectory, trajectory});

    if (options.run_dir) {
      csv->append(episode.metrics);
      if (trajectory) {
        metrics::write_trajectory(traj_dir / ("trajectory_" + std::to_string(ep) + ".json"), ep,
                                  episode.logs);
      }
      if (last || (ep + 1) % config.checkpoint_every == 0) {
        if (checkpoints) session.save_checkpoints(ckpt_dir);
        manifest.episodes_completed = ep + 1;
        metrics::write_manifest(*options.run_dir / "manifest.json", manifest);
      }
    }
    if (options.on_episode) options.on_episode(episode.metrics);
    episode.logs.clear();
    result.episodes.push_back(std::move(episode.metrics));
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<metrics::ComparisonRow> comparison_table(const std::vector<ComparisonRun>& runs,
                                                     const std::vector<agent::Variant>& variants) {
  if (variants.empty()) return {};
  std::map<std::string, std::vector<double>> ee_groups;
  for (const auto& r : runs) ee_groups[std::string(agent::to_string(r.variant))].push_back(r.ee);
  agent::Variant reference = variants.front();
  for (auto v : variants) {
    if (v == agent::Variant::dacemad) reference = v;
  }
  const auto normalised = metrics::normalise_ee(ee_groups, std::string(agent::to_string(reference)));

  std::vector<metrics::ComparisonRow> rows;
  for (auto v : variants) {
    const std::string name(agent::to_string(v));
    std::vector<double> cdr;
    std::vector<double> energy;
    for (const auto& r : runs) {
      if (r.variant != v) continue;
      cdr.push_back(r.cdr);
      energy.push_back(r.energy_kj);
    }
    const auto it = normalised.find(name);
    const std::vector<double> ee = it == normalised.end() ? std::vector<double>{} : it->second;
    rows.push_back({name, metrics::summarise_values(cdr), metrics::summarise_values(ee),
                    metrics::summarise_values(energy)});
  }
  return rows;
}

namespace {

ComparisonRun eval_summary(agent::Variant v, std::uint64_t seed,
                           const std::vector<EpisodeResult>& episodes) {
  ComparisonRun run{v, seed, 0.0, 0.0, 0.0};
  for (const auto& e : episodes) {
    run.cdr += e.metrics.cdr;
    run.ee += e.metrics.ee;
    run.energy_kj += e.metrics.total_energy_kj();
  }
  const double n = static_cast<double>(episodes.size());
  run.cdr /= n;
  run.ee /= n;
  run.energy_kj /= n;
  return run;
}

void write_eval_csv(const fs::path& path, const std::vector<EpisodeResult>& episodes) {
  metrics::MetricsCsv csv(path);
  std::size_t i = 0;
  for (const auto& e : episodes) {
    auto m = e.metrics;
    m.episode = i++;
    csv.append(m);
  }
}

void print_episode(std::ostream& log, agent::Variant v, std::uint64_t seed,
                   const metrics::EpisodeMetrics& m) {
  log << to_string(v) << " seed=" << seed << " episode=" << m.episode
      << " cdr=" << metrics::format_number(m.cdr) << " ee=" << metrics::format_number(m.ee)
      << " energy_kj=" << metrics::format_number(m.total_energy_kj())
      << " messages=" << m.message_total << '\n';
}

}  // namespace

ComparisonResult compare(const WorldConfig& config, const std::vector<std::uint64_t>& seeds,
                         const std::vector<agent::Variant>& variants,
                         const std::optional<fs::path>& out, std::ostream& log) {
  ComparisonResult result;
  for (auto v : variants) {
    for (auto seed : seeds) {
      WorldConfig c = config;
      c.seed = seed;
      Session session(c, seed, v);
      if (v != agent::Variant::random) {
        TrainOptions opts;
        if (out) opts.run_dir = run_directory(*out, v, seed);
        const auto trained = train(session, opts);
        log << to_string(v) << " seed=" << seed << " trained " << trained.episodes.size()
            << " episodes in " << trained.wall_time_s << " s\n";
      }
      const auto episodes = session.evaluate(config.eval_episodes);
      if (out) {
        fs::create_directories(run_directory(*out, v, seed));
        write_eval_csv(run_directory(*out, v, seed) / "eval_metrics.csv", episodes);
      }
      result.runs.push_back(eval_summary(v, seed, episodes));
      const auto& r = result.runs.back();
      log << to_string(v) << " seed=" << seed << " eval cdr=" << metrics::format_number(r.cdr)
          << " ee=" << metrics::format_number(r.ee)
          << " energy_kj=" << metrics::format_number(r.energy_kj) << '\n';
    }
  }
  result.rows = comparison_table(result.runs, variants);
  return result;
}

int run_plan(const RunPlan& plan, std::ostream& log) {
  WorldConfig config = load_config(plan.config_path);
  apply_environment_overrides(config);
  if (plan.episodes_override && plan.command != RunPlan::Command::eval) {
    config.episodes = *plan.episodes_override;
  }
  if (plan.episodes_override && plan.command == RunPlan::Command::eval) {
    config.eval_episodes = *plan.episodes_override;
  }
  config.validate();
  const auto seeds = plan.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : plan.seeds;
  const auto variants =
      plan.variants.empty() ? std::vector<agent::Variant>{agent::Variant::dacemad} : plan.variants;

  switch (plan.command) {
    case RunPlan::Command::gen_scenario: {
      std::size_t rejected = 0;
      const auto stream = build_vehicles(config, seeds.front(), &rejected);
      const auto steps = plan.steps.value_or(stream.length().value_or(config.max_steps));
      if (plan.out.has_parent_path()) fs::create_directories(plan.out.parent_path());
      std::ofstream out(plan.out);
      if (!out) throw RunError(plan.out.string() + ": cannot write trace");
      mobility::write_trace(out, stream, steps);
      log << "wrote " << plan.out.string() << " (" << steps << " steps)\n";
      return 0;
    }
    case RunPlan::Command::train: {
      for (auto v : variants) {
        for (auto seed : seeds) {
          WorldConfig c = config;
          c.seed = seed;
          Session session(c, seed, v);
          TrainOptions opts;
          opts.run_dir = run_directory(plan.out, v, seed);
          opts.resume = plan.resume;
          opts.on_episode = [&](const metrics::EpisodeMetrics& m) { print_episode(log, v, seed, m); };
          const auto result = train(session, opts);
          if (!result.episodes.empty() && result.episodes.back().steps < c.max_steps) {
            log << "note: episodes truncated at " << result.episodes.back().steps
                << " steps (end of vehicle trace or all UAVs depleted)\n";
          }
        }
      }
      return 0;
    }
    case RunPlan::Command::eval: {
      for (auto v : variants) {
        for (auto seed : seeds) {
          WorldConfig c = config;
          c.seed = seed;
          Session session(c, seed, v);
          if (v != agent::Variant::random) {
            if (!plan.checkpoint) throw RunError("eval: --checkpoint is required for " +
                                                 std::string(agent::to_string(v)));
            auto dir = *plan.checkpoint;
            const auto nested = run_directory(dir, v, seed) / "checkpoints";
            if (fs::exists(nested)) dir = nested;
            session.load_checkpoints(dir);
          }
          const auto episodes = session.evaluate(c.eval_episodes);
          const auto run_dir = run_directory(plan.out, v, seed);
          fs::create_directories(run_dir);
          write_eval_csv(run_dir / "eval_metrics.csv", episodes);
          for (const auto& e : episodes) print_episode(log, v, seed, e.metrics);
        }
      }
      return 0;
    }
    case RunPlan::Command::compare: {
      if (variants.size() < 2) throw RunError("compare: needs at least two variants");
      fs::create_directories(plan.out);
      const auto result = compare(config, seeds, variants, plan.out, log);
      std::ofstream table(plan.out / "comparison.csv");
      if (!table) throw RunError((plan.out / "comparison.csv").string() + ": cannot write");
      metrics::write_comparison(table, result.rows);
      metrics::write_comparison(log, result.rows);
      return 0;
    }
  }
  return 0;
}

}  // namespace dacemad::harness
