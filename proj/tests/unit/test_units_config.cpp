#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dacemad/config.hpp"
#include "dacemad/units.hpp"
#include "doctest.h"

using namespace dacemad;

TEST_CASE("db conversions") {
  CHECK(units::db_to_linear(5.0) == doctest::Approx(3.16228).epsilon(1e-6));
  CHECK(units::db_to_linear(0.0) == 1.0);
  CHECK(units::dbm_to_watts(20.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(units::dbm_to_watts(-130.0) == doctest::Approx(1e-16).epsilon(1e-12));
  CHECK(units::watts_to_dbm(1.0) == doctest::Approx(30.0));
  CHECK(units::kmh_to_ms(36.0) == doctest::Approx(10.0));
}

TEST_CASE("db round trip over [-200, 200]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng);
    CHECK(units::linear_to_db(units::db_to_linear(x)) == doctest::Approx(x).epsilon(1e-9));
    CHECK(units::watts_to_dbm(units::dbm_to_watts(x)) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("empty document gives the reference defaults") {
  const auto c = load_config_text("");
  CHECK(c.n_uavs == 10);
  CHECK(c.area.width() == 3000.0);
  CHECK(c.uav_altitude == 120.0);
  CHECK(c.uav_step_size == 20.0);
  CHECK(c.episodes == 250);
  CHECK(c.max_steps == 1500);
  CHECK(c.channel.tx_power_w == doctest::Approx(0.1));
  CHECK(c.channel.noise_w == doctest::Approx(1e-16));
  CHECK(c.channel.sinr_threshold == doctest::Approx(3.16228).epsilon(1e-6));
  CHECK(c.channel.bandwidth_hz == 1e6);
  CHECK(c.energy.kappa0 == 79.85);
  CHECK(c.energy.kappa1 == 88.63);
  CHECK(c.energy.kappa2 == 0.018);
  CHECK(c.energy.battery_capacity_j == doctest::Approx(1278720.0));
  CHECK(c.learning.discount == 0.95);
  CHECK(c.learning.replay_capacity == 10000);
  CHECK(c.learning.batch_size == 1024);
  CHECK(c.learning.learning_rate == 1e-4);
  CHECK(c.learning.n_neighbors == 6);
  CHECK(c.observation_size() == 27);
  CHECK(std::isinf(c.channel.interference_range_m));
}

TEST_CASE("invalid values name the field") {
  auto message = [](const char* text) {
    try {
      load_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"episodes": 0})").find("episodes") != std::string::npos);
  CHECK(message(R"({"uav": {"count": 0}})").find("uav.count") != std::string::npos);
  CHECK(message(R"({"uav": {"step_size": 25}})").find("uav.step_size") != std::string::npos);
  CHECK(message(R"({"learning": {"bogus": 1}})").find("learning.bogus") != std::string::npos);
  CHECK(message(R"({"channel": {"noise_w": null}})").find("channel.noise_w") !=
        std::string::npos);
  CHECK(message(R"({"learning": {"batch_size": 20, "replay_capacity": 10}})")
            .find("learning.batch_size") != std::string::npos);
  CHECK(message(R"({"version": 2})").find("version") != std::string::npos);
  CHECK(message("{ not json").find("parse error") != std::string::npos);
  CHECK(message(R"({"scenario": {"clusters": [{"centre": [10, 10], "weight": 0.4}]}})")
            .find("scenario.clusters") != std::string::npos);
}

TEST_CASE("unit aliases and comments") {
  const auto c = load_config_text(R"(
    // comment lines are allowed
    {"channel": {"tx_power_dbm": 30, "sinr_threshold_db": 10, "interference_range_m": null},
     "energy": {"battery_mah": 5000, "battery_voltage": 11.1, "power_model_sign": "minus"}})");
  CHECK(c.channel.tx_power_w == doctest::Approx(1.0));
  CHECK(c.channel.sinr_threshold == doctest::Approx(10.0));
  CHECK(std::isinf(c.channel.interference_range_m));
  CHECK(c.energy.battery_capacity_j == doctest::Approx(5.0 * 11.1 * 3600.0));
  CHECK(c.energy.sign == PowerModelSign::minus);
}

TEST_CASE("dump and reload is a fixed point") {
  auto c = load_config_text(R"({"seed": 42, "uav": {"count": 3}, "learning": {"hidden_layers": [16, 8]}})");
  const auto text = dump_config(c);
  const auto again = load_config_text(text);
  CHECK(dump_config(again) == text);
  CHECK(config_hash(again) == config_hash(c));
  c.seed = 43;
  CHECK(config_hash(c) != config_hash(again));
}

TEST_CASE("take-off grid stays inside the area") {
  auto c = load_config_text("");
  const auto pts = c.takeoff_positions();
  REQUIRE(pts.size() == 10);
  for (const auto& p : pts) CHECK(c.area.contains(p));
  CHECK(pts[0].x == doctest::Approx(375.0));
}

TEST_CASE("relative trace path resolves against the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "dacemad_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "c.json");
    out << R"({"scenario": {"kind": "trace", "trace_path": "t.csv"}})";
  }
  const auto c = load_config(dir / "c.json");
  CHECK(c.scenario.trace_path == dir / "t.csv");
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}
