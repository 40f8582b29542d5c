#include "ehub/errors.hpp"
#include "ehub/scenario.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <numeric>

using namespace ehub;

namespace {

std::string minimal_json() {
  return R"({
    "schema": "ehubsim/1",
    "name": "mini",
    "duration": 24,
    "hubs": [
      {"id": "a", "devices": [{"type": "boiler", "gas": 30}], "profile": {"elec_mean": 5, "heat_mean": 8}},
      {"id": "b", "devices": [{"type": "pv", "peak": 20}], "p_bid_cap": 10, "profile": {"elec_mean": 6, "heat_mean": 0}}
    ],
    "clusters": [{"id": "m", "hubs": ["a", "b"]}]
  })";
}

}  // namespace

TEST(Scenario, DefaultsFilled) {
  const Scenario s = scenario_from_json(minimal_json());
  EXPECT_DOUBLE_EQ(s.consensus.rho0, 0.001);
  EXPECT_DOUBLE_EQ(s.consensus.rho_growth, 1.02);
  EXPECT_DOUBLE_EQ(s.consensus.eps_primal, 0.05);
  EXPECT_DOUBLE_EQ(s.consensus.eps_dual, 0.03);
  EXPECT_EQ(s.consensus.max_iterations, 200);
  EXPECT_DOUBLE_EQ(s.bargaining.mu0, 2000.0);
  EXPECT_EQ(s.schedule.T_cl, 24);
  EXPECT_EQ(s.schedule.t_rh, 12);
  EXPECT_EQ(s.schedule.T_hb, 12);
}

TEST(Scenario, MissingSettlementPeriodIsDuration) {
  EXPECT_EQ(scenario_from_json(minimal_json()).schedule.t_f, 24);
}

TEST(Scenario, ShortBargainingHorizonRejected) {
  auto j = nlohmann::json::parse(minimal_json());
  j["schedule"] = {{"T_cl", 12}, {"t_rh", 12}, {"T_hb", 12}};
  EXPECT_THROW(scenario_from_json(j.dump()), ValidationError);
}

TEST(Scenario, FieldLevelErrors) {
  auto j = nlohmann::json::parse(minimal_json());
  j["hubs"][1]["devices"][0]["peak"] = "big";
  try {
    scenario_from_json(j.dump());
    FAIL() << "accepted a string capacity";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("hubs[1]"), std::string::npos) << e.what();
  }
  auto k = nlohmann::json::parse(minimal_json());
  k["schema"] = "ehubsim/0";
  EXPECT_THROW(scenario_from_json(k.dump()), ValidationError);
  auto u = nlohmann::json::parse(minimal_json());
  u["clusters"][0]["hubs"].push_back("zz");
  EXPECT_THROW(scenario_from_json(u.dump()), Error);
}

TEST(Scenario, NegativeToleranceRejected) {
  auto j = nlohmann::json::parse(minimal_json());
  j["consensus"] = {{"eps_primal", -1.0}};
  EXPECT_THROW(scenario_from_json(j.dump()), ValidationError);
}

TEST(Scenario, RoundTrip) {
  for (const Scenario& s : {scenario_from_json(minimal_json()), preset_scenario(3, Season::summer, 48, 4)}) {
    const std::string a = scenario_to_json(s);
    const Scenario back = scenario_from_json(a);
    EXPECT_EQ(scenario_to_json(back), a);
    EXPECT_EQ(back.hubs.size(), s.hubs.size());
    EXPECT_EQ(back.seed, s.seed);
  }
  const auto path = std::filesystem::temp_directory_path() / "ehub_roundtrip.json";
  const Scenario p = preset_scenario(1, Season::winter, 36, 9);
  save_scenario(p, path.string());
  EXPECT_EQ(scenario_to_json(load_scenario(path.string())), scenario_to_json(p));
  std::filesystem::remove(path);
}

TEST(Scenario, SeriesCoverHorizon) {
  const Scenario s = preset_scenario(3, Season::winter, 72, 1);
  for (const auto& h : build_hubs(s)) {
    EXPECT_GE(static_cast<Index>(h.elec_demand.size()), s.duration + s.schedule.T_cl);
    EXPECT_GT(h.annual_demand, 0.0);
  }
  EXPECT_GE(build_tariffs(s).steps(), s.data_steps());
}

TEST(Synthetic, Deterministic) {
  const ProfileSpec p;
  const WeatherSpec w;
  const auto a = generate_synthetic(p, w, 96, 42, "h1");
  const auto b = generate_synthetic(p, w, 96, 42, "h1");
  EXPECT_EQ(a.elec, b.elec);
  EXPECT_EQ(a.heat, b.heat);
  const auto c = generate_synthetic(p, w, 96, 43, "h1");
  EXPECT_NE(a.elec, c.elec);
  for (double v : a.elec) EXPECT_GE(v, 0.0);
  for (double v : a.heat) EXPECT_GE(v, 0.0);
}

TEST(Synthetic, WinterNeedsMoreHeat) {
  const ProfileSpec p;
  WeatherSpec winter, summer;
  winter.start_day = 15;
  summer.start_day = 196;
  const auto w = generate_synthetic(p, winter, 168, 1, "h");
  const auto s = generate_synthetic(p, summer, 168, 1, "h");
  const double mw = std::accumulate(w.heat.begin(), w.heat.end(), 0.0);
  const double ms = std::accumulate(s.heat.begin(), s.heat.end(), 0.0);
  EXPECT_GT(mw, ms);
}

TEST(Synthetic, IrradianceZeroAtNight) {
  for (int day : {15, 105, 196}) {
    WeatherSpec w;
    w.start_day = day;
    const auto irr = generate_irradiance(w, 72, 3);
    for (Index d = 0; d < 3; ++d) {
      EXPECT_DOUBLE_EQ(irr[d * 24], 0.0);
      EXPECT_DOUBLE_EQ(irr[d * 24 + 23], 0.0);
    }
    EXPECT_GT(*std::max_element(irr.begin(), irr.end()), 0.0);
  }
}

TEST(Fnv1a, KnownVector) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
