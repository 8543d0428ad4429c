// Command-line front end: train, eval, compare, gen-scenario.

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dacemad/harness.hpp"
#include "json.hpp"

namespace {

using dacemad::harness::RunPlan;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) out.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw CLI::ValidationError("--seeds", "not an unsigned integer: " + item);
    }
    seeds.push_back(v);
  }
  return seeds;
}

std::vector<dacemad::agent::Variant> parse_variants(const std::string& text) {
  std::vector<dacemad::agent::Variant> out;
  for (const auto& item : split_list(text)) {
    const auto v = dacemad::agent::parse_variant(item);
    if (!v) throw CLI::ValidationError("--variant", "unknown variant: " + item);
    out.push_back(*v);
  }
  return out;
}

void report_error(const std::string& kind, const std::string& message) {
  const nlohmann::json line = {{"error", kind}, {"message", message}};
  std::cerr << line.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV coverage training and evaluation"};
  app.require_subcommand(1);

  RunPlan plan;
  std::string seeds_text;
  std::string variants_text;
  std::string checkpoint;
  std::size_t episodes = 0;
  std::size_t steps = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", plan.config_path, "World configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", plan.out, "Output directory");
    if (needs_out) out->required();
    cmd->add_option("--seeds", seeds_text, "Comma-separated seeds (default: config seed)");
  };

  auto* train = app.add_subcommand("train", "Train agents and write per-episode outputs");
  add_common(train, true);
  train->add_option("--variant", variants_text, "dacemad, cmad, mad or random (comma list)");
  train->add_option("--episodes-override", episodes, "Replace the configured episode count");
  train->add_flag("--resume", plan.resume, "Continue from the run directory's last checkpoint");

  auto* eval = app.add_subcommand("eval", "Greedy evaluation of trained agents");
  add_common(eval, true);
  eval->add_option("--variant", variants_text, "Variant(s) to evaluate");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory or training output root");
  eval->add_option("--episodes-override", episodes, "Number of evaluation episodes");

  auto* cmp = app.add_subcommand("compare", "Train and evaluate several variants");
  add_common(cmp, true);
  cmp->add_option("--variant", variants_text, "Variants to compare")
      ->default_str("dacemad,cmad,mad,random");
  cmp->add_option("--episodes-override", episodes, "Replace the configured episode count");

  auto* gen = app.add_subcommand("gen-scenario", "Write the configured vehicle scenario as CSV");
  add_common(gen, true);
  gen->add_option("--steps", steps, "Number of timesteps to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (app.got_subcommand(train)) plan.command = RunPlan::Command::train;
    if (app.got_subcommand(eval)) plan.command = RunPlan::Command::eval;
    if (app.got_subcommand(cmp)) {
      plan.command = RunPlan::Command::compare;
      if (variants_text.empty()) variants_text = "dacemad,cmad,mad,random";
    }
    if (app.got_subcommand(gen)) plan.command = RunPlan::Command::gen_scenario;
    plan.seeds = parse_seeds(seeds_text);
    plan.variants = parse_variants(variants_text);
    if (!checkpoint.empty()) plan.checkpoint = checkpoint;
    if (episodes > 0) plan.episodes_override = episodes;
    if (steps > 0) plan.steps = steps;
  } catch (const CLI::ValidationError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    return dacemad::harness::run_plan(plan, std::cout);
  } catch (const dacemad::ConfigError& e) {
    report_error("config", e.what());
  } catch (const dacemad::mobility::TraceError& e) {
    report_error("trace", e.what());
  } catch (const std::exception& e) {
    report_error("runtime", e.what());
  }
  return 1;
}
