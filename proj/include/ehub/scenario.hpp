#pragma once

// Scenario configuration (JSON), defaults and synthetic profiles.

#include "ehub/bargaining.hpp"
#include "ehub/consensus.hpp"
#include "ehub/hub_model.hpp"
#include "ehub/schedule.hpp"
#include "ehub/settlement.hpp"
#include "ehub/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ehub {

inline constexpr const char* kScenarioSchema = "ehubsim/1";

struct DeviceConfig {
  std::string type;  // pv, solar_thermal, chp, boiler, heat_pump, battery, water_tank
  std::string name;
  std::map<std::string, double> params;
};

DeviceModel make_device(const DeviceConfig& config);

/// Daily and seasonal demand shape for one hub.
struct ProfileSpec {
  double elec_mean = 10.0;        // kWh per step, yearly mean
  double heat_mean = 10.0;
  double elec_daily_amp = 0.4;    // relative day/night swing
  double heat_daily_amp = 0.2;
  double heat_seasonal_amp = 0.6;  // relative winter/summer swing
  double noise = 0.05;            // relative uniform noise
};

struct WeatherSpec {
  int start_day = 15;           // day of year at t = 0
  double irradiance_peak = 1.0; // clear-sky midsummer noon, per kW installed
  double cloudiness = 0.3;      // max relative reduction per hour
};

struct HubConfig {
  std::string id;
  std::vector<DeviceConfig> devices;
  double eta_p = 1.0;
  double eta_q = 1.0;
  double p_bid_cap = 0.0;
  double q_bid_cap = 0.0;
  std::optional<double> annual_demand;  // kWh, estimated from the profile if absent
  ProfileSpec profile;
  std::vector<double> elec_demand;  // explicit series override the profile
  std::vector<double> heat_demand;
  std::vector<std::vector<double>> initial_states;
};

struct Scenario {
  std::string schema = kScenarioSchema;
  std::string name = "scenario";
  std::uint64_t seed = 1;
  Index duration = 72;
  Schedule schedule;
  TariffRates rates;
  std::vector<int> peak_hours = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  ConsensusParams consensus;
  BargainingParams bargaining;  // its consensus member is overwritten by `consensus`
  SettlementParams settlement;
  WeightMode weights = WeightMode::demand;
  WeatherSpec weather;
  std::vector<double> irradiance;  // explicit override
  std::vector<HubConfig> hubs;
  std::vector<ClusterDef> clusters;
  std::vector<TopologyEvent> events;
  int workers = 1;

  /// Steps of data needed: duration plus one bargaining horizon.
  Index data_steps() const { return duration + schedule.T_cl; }
  /// Throws ValidationError or TopologyError.
  void validate() const;
  BargainingParams bargaining_params() const;
  const HubConfig* hub(const std::string& id) const;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

struct SyntheticSeries {
  std::vector<double> elec;
  std::vector<double> heat;
};

/// Seasonal sinusoid + daily pattern + seeded noise, nonnegative. Deterministic in (spec, seed, key).
SyntheticSeries generate_synthetic(const ProfileSpec& profile, const WeatherSpec& weather, Index steps,
                                   std::uint64_t seed, const std::string& key);
/// Irradiance per kW installed; zero at night.
std::vector<double> generate_irradiance(const WeatherSpec& weather, Index steps, std::uint64_t seed);

/// Hub specs with every series filled for data_steps().
std::vector<HubSpec> build_hubs(const Scenario& scenario);
Tariffs build_tariffs(const Scenario& scenario);
NetworkTopology build_topology(const Scenario& scenario);

/// Desk-scale presets: 3 clusters of 3 hubs, or of 1 larger hub each.
enum class Season { winter, summer, spring };
Scenario preset_scenario(int hubs_per_cluster, Season season, Index duration, std::uint64_t seed);

}  // namespace ehub
