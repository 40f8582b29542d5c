#include "ehub/scenario.hpp"

#include "ehub/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace ehub {

using nlohmann::json;

namespace {

double param(const DeviceConfig& c, const std::string& key, std::optional<double> fallback = std::nullopt) {
  auto it = c.params.find(key);
  if (it != c.params.end()) return it->second;
  if (fallback) return *fallback;
  throw ValidationError("device '" + c.name + "' (" + c.type + "): missing parameter '" + key + "'");
}

}  // namespace

DeviceModel make_device(const DeviceConfig& c) {
  const std::string name = c.name.empty() ? c.type : c.name;
  if (c.type == "pv") return make_pv(name, param(c, "peak"));
  if (c.type == "solar_thermal") return make_solar_thermal(name, param(c, "peak"));
  if (c.type == "chp") return make_chp(name, param(c, "gas"), param(c, "eta_p", 0.35), param(c, "eta_q", 0.5));
  if (c.type == "boiler") return make_boiler(name, param(c, "gas"), param(c, "eta", 0.9));
  if (c.type == "heat_pump") return make_heat_pump(name, param(c, "elec"), param(c, "cop", 3.0));
  if (c.type == "battery")
    return make_battery(name, param(c, "capacity"), param(c, "power"), param(c, "eta_c", 0.95), param(c, "eta_d", 0.95),
                        param(c, "retention", 0.999));
  if (c.type == "water_tank")
    return make_water_tank(name, param(c, "capacity"), param(c, "power"), param(c, "retention", 0.98));
  throw ValidationError("unknown device type '" + c.type + "'");
}

// ---------------------------------------------------------------- validation

BargainingParams Scenario::bargaining_params() const {
  BargainingParams p = bargaining;
  p.consensus = consensus;
  return p;
}

const HubConfig* Scenario::hub(const std::string& id) const {
  for (const auto& h : hubs)
    if (h.id == id) return &h;
  return nullptr;
}

void Scenario::validate() const {
  if (schema != kScenarioSchema) throw ValidationError("schema: expected '" + std::string(kScenarioSchema) + "'");
  if (duration <= 0) throw ValidationError("duration: must be positive");
  schedule.validate();
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ValidationError(std::string(what) + ": must be positive");
  };
  positive(consensus.eps_primal, "consensus.eps_primal");
  positive(consensus.eps_dual, "consensus.eps_dual");
  positive(consensus.rho0, "consensus.rho0");
  if (consensus.rho_growth < 1.0) throw ValidationError("consensus.rho_growth: must be at least 1");
  if (consensus.max_iterations < 1) throw ValidationError("consensus.max_iterations: must be at least 1");
  positive(bargaining.sigma_primal, "bargaining.sigma_primal");
  positive(bargaining.sigma_dual, "bargaining.sigma_dual");
  positive(bargaining.mu0, "bargaining.mu0");
  positive(bargaining.eps_log_relative, "bargaining.eps_log");
  if (bargaining.max_iterations < 1) throw ValidationError("bargaining.max_iterations: must be at least 1");
  if (bargaining.mu_decay < 0.0 || bargaining.mu_decay >= 1.0) throw ValidationError("bargaining.mu_decay: outside [0,1)");
  positive(settlement.W, "settlement.W");
  positive(consensus.solver.tolerance, "solver.tolerance");
  if (workers < 1) throw ValidationError("workers: must be at least 1");
  if (rates.feedin > rates.offpeak || rates.feedin > rates.peak)
    throw ValidationError("tariffs: feed-in above the buy price");
  for (double v : {rates.peak, rates.offpeak, rates.feedin, rates.gas, rates.trading_fee})
    if (v < 0.0) throw ValidationError("tariffs: negative price");
  for (int h : peak_hours)
    if (h < 0 || h > 23) throw ValidationError("tariffs.peak_hours: hour outside 0..23");

  if (hubs.empty()) throw ValidationError("hubs: at least one hub is required");
  std::set<std::string> ids;
  for (const auto& h : hubs) {
    if (h.id.empty()) throw ValidationError("hubs: hub without id");
    if (!ids.insert(h.id).second) throw ValidationError("hubs: duplicate id '" + h.id + "'");
    if (!h.elec_demand.empty() && static_cast<Index>(h.elec_demand.size()) < data_steps())
      throw ValidationError("hubs." + h.id + ".elec_demand: needs " + std::to_string(data_steps()) + " steps");
    if (!h.heat_demand.empty() && static_cast<Index>(h.heat_demand.size()) < data_steps())
      throw ValidationError("hubs." + h.id + ".heat_demand: needs " + std::to_string(data_steps()) + " steps");
    if (h.annual_demand && !(*h.annual_demand > 0.0))
      throw ValidationError("hubs." + h.id + ".annual_demand: must be positive");
    for (const auto& d : h.devices) make_device(d).validate();
  }
  if (!irradiance.empty() && static_cast<Index>(irradiance.size()) < data_steps())
    throw ValidationError("irradiance: needs " + std::to_string(data_steps()) + " steps");

  NetworkTopology topo = build_topology(*this);
  topo.validate();
  for (const auto& c : clusters)
    for (const auto& h : c.hubs)
      if (!ids.count(h)) throw ValidationError("clusters." + c.id + ": unknown hub '" + h + "'");
  if (weights == WeightMode::fixed)
    for (const auto& c : clusters)
      if (!(c.alpha > 0.0)) throw ValidationError("clusters." + c.id + ".alpha: must be positive");
  for (const auto& e : events) {
    validate_event_timing(e, schedule.t_rh);
    if (e.time >= duration) throw ValidationError("events: event after the end of the run");
    if (topo.find(e.cluster) < 0) throw ValidationError("events: unknown cluster '" + e.cluster + "'");
    if (!e.hub.empty() && !ids.count(e.hub)) throw ValidationError("events: unknown hub '" + e.hub + "'");
  }
  // Dry run of the event sequence against the topology.
  for (Index t = 0; t < duration; ++t) apply_events(topo, events, t, schedule.t_rh);
}

// ---------------------------------------------------------------- JSON

namespace {

template <typename T>
T read(const json& j, const std::string& key, const T& fallback, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(path + key + ": " + e.what());
  }
}

template <typename T>
T need(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + key + ": required field missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(path + key + ": " + e.what());
  }
}

const json& object(const json& j, const std::string& key, const std::string& path) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ValidationError(path + key + ": expected an object");
  return j.at(key);
}

std::string weight_name(WeightMode m) {
  switch (m) {
    case WeightMode::demand:
      return "demand";
    case WeightMode::unit:
      return "unit";
    case WeightMode::fixed:
      return "fixed";
  }
  return "demand";
}

WeightMode parse_weights(const std::string& s) {
  if (s == "demand") return WeightMode::demand;
  if (s == "unit") return WeightMode::unit;
  if (s == "fixed") return WeightMode::fixed;
  throw ValidationError("weights: expected demand, unit or fixed");
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("scenario: expected a JSON object");
  Scenario s;
  s.schema = need<std::string>(j, "schema", "");
  if (s.schema != kScenarioSchema) throw ValidationError("schema: expected '" + std::string(kScenarioSchema) + "'");
  s.name = read(j, "name", s.name, "");
  s.seed = read(j, "seed", s.seed, "");
  s.duration = need<Index>(j, "duration", "");
  s.workers = read(j, "workers", s.workers, "");

  const json& sch = object(j, "schedule", "");
  s.schedule.T_cl = read(sch, "T_cl", s.schedule.T_cl, "schedule.");
  s.schedule.T_hb = read(sch, "T_hb", s.schedule.T_hb, "schedule.");
  s.schedule.t_rh = read(sch, "t_rh", s.schedule.t_rh, "schedule.");
  // settlement only at the end of the run unless stated
  s.schedule.t_f = read(sch, "t_f", s.duration, "schedule.");

  const json& tar = object(j, "tariffs", "");
  s.rates.peak = read(tar, "peak", s.rates.peak, "tariffs.");
  s.rates.offpeak = read(tar, "offpeak", s.rates.offpeak, "tariffs.");
  s.rates.feedin = read(tar, "feedin", s.rates.feedin, "tariffs.");
  s.rates.gas = read(tar, "gas", s.rates.gas, "tariffs.");
  s.rates.trading_fee = read(tar, "trading_fee", s.rates.trading_fee, "tariffs.");
  s.peak_hours = read(tar, "peak_hours", s.peak_hours, "tariffs.");

  const json& con = object(j, "consensus", "");
  s.consensus.eps_primal = read(con, "eps_primal", s.consensus.eps_primal, "consensus.");
  s.consensus.eps_dual = read(con, "eps_dual", s.consensus.eps_dual, "consensus.");
  s.consensus.max_iterations = read(con, "max_iterations", s.consensus.max_iterations, "consensus.");
  s.consensus.rho0 = read(con, "rho0", s.consensus.rho0, "consensus.");
  s.consensus.rho_growth = read(con, "rho_growth", s.consensus.rho_growth, "consensus.");
  s.consensus.rho_max = read(con, "rho_max", s.consensus.rho_max, "consensus.");
  s.consensus.rho_carry = read(con, "rho_carry", s.consensus.rho_carry, "consensus.");
  const json& sol = object(j, "solver", "");
  s.consensus.solver.tolerance = read(sol, "tolerance", s.consensus.solver.tolerance, "solver.");
  s.consensus.solver.max_iterations = read(sol, "max_iterations", s.consensus.solver.max_iterations, "solver.");

  const json& bar = object(j, "bargaining", "");
  s.bargaining.sigma_primal = read(bar, "sigma_primal", s.bargaining.sigma_primal, "bargaining.");
  s.bargaining.sigma_dual = read(bar, "sigma_dual", s.bargaining.sigma_dual, "bargaining.");
  s.bargaining.max_iterations = read(bar, "max_iterations", s.bargaining.max_iterations, "bargaining.");
  s.bargaining.mu0 = read(bar, "mu0", s.bargaining.mu0, "bargaining.");
  s.bargaining.mu_decay = read(bar, "mu_decay", s.bargaining.mu_decay, "bargaining.");
  s.bargaining.mu_floor_fraction = read(bar, "mu_floor_fraction", s.bargaining.mu_floor_fraction, "bargaining.");
  s.bargaining.eps_log_relative = read(bar, "eps_log", s.bargaining.eps_log_relative, "bargaining.");
  s.bargaining.normalize_weights = read(bar, "normalize_weights", s.bargaining.normalize_weights, "bargaining.");

  const json& set = object(j, "settlement", "");
  s.settlement.W = read(set, "W", s.settlement.W, "settlement.");
  s.settlement.beta_max = read(set, "beta_max", s.settlement.beta_max, "settlement.");

  s.weights = parse_weights(read<std::string>(j, "weights", "demand", ""));
  const json& w = object(j, "weather", "");
  s.weather.start_day = read(w, "start_day", s.weather.start_day, "weather.");
  s.weather.irradiance_peak = read(w, "irradiance_peak", s.weather.irradiance_peak, "weather.");
  s.weather.cloudiness = read(w, "cloudiness", s.weather.cloudiness, "weather.");
  s.irradiance = read(j, "irradiance", s.irradiance, "");

  if (!j.contains("hubs") || !j.at("hubs").is_array()) throw ValidationError("hubs: expected an array");
  for (std::size_t k = 0; k < j.at("hubs").size(); ++k) {
    const json& hj = j.at("hubs")[k];
    const std::string path = "hubs[" + std::to_string(k) + "].";
    HubConfig h;
    h.id = need<std::string>(hj, "id", path);
    h.eta_p = read(hj, "eta_p", h.eta_p, path);
    h.eta_q = read(hj, "eta_q", h.eta_q, path);
    h.p_bid_cap = read(hj, "p_bid_cap", h.p_bid_cap, path);
    h.q_bid_cap = read(hj, "q_bid_cap", h.q_bid_cap, path);
    if (hj.contains("annual_demand") && !hj.at("annual_demand").is_null())
      h.annual_demand = need<double>(hj, "annual_demand", path);
    const json& pj = object(hj, "profile", path);
    h.profile.elec_mean = read(pj, "elec_mean", h.profile.elec_mean, path + "profile.");
    h.profile.heat_mean = read(pj, "heat_mean", h.profile.heat_mean, path + "profile.");
    h.profile.elec_daily_amp = read(pj, "elec_daily_amp", h.profile.elec_daily_amp, path + "profile.");
    h.profile.heat_daily_amp = read(pj, "heat_daily_amp", h.profile.heat_daily_amp, path + "profile.");
    h.profile.heat_seasonal_amp = read(pj, "heat_seasonal_amp", h.profile.heat_seasonal_amp, path + "profile.");
    h.profile.noise = read(pj, "noise", h.profile.noise, path + "profile.");
    h.elec_demand = read(hj, "elec_demand", h.elec_demand, path);
    h.heat_demand = read(hj, "heat_demand", h.heat_demand, path);
    h.initial_states = read(hj, "initial_states", h.initial_states, path);
    if (hj.contains("devices")) {
      if (!hj.at("devices").is_array()) throw ValidationError(path + "devices: expected an array");
      for (std::size_t d = 0; d < hj.at("devices").size(); ++d) {
        const json& dj = hj.at("devices")[d];
        const std::string dpath = path + "devices[" + std::to_string(d) + "].";
        DeviceConfig dc;
        dc.type = need<std::string>(dj, "type", dpath);
        dc.name = read<std::string>(dj, "name", dc.type, dpath);
        for (const auto& [key, value] : dj.items()) {
          if (key == "type" || key == "name") continue;
          if (!value.is_number()) throw ValidationError(dpath + key + ": expected a number");
          dc.params[key] = value.get<double>();
        }
        h.devices.push_back(std::move(dc));
      }
    }
    s.hubs.push_back(std::move(h));
  }

  if (j.contains("clusters")) {
    if (!j.at("clusters").is_array()) throw ValidationError("clusters: expected an array");
    for (std::size_t k = 0; k < j.at("clusters").size(); ++k) {
      const json& cj = j.at("clusters")[k];
      const std::string path = "clusters[" + std::to_string(k) + "].";
      ClusterDef c;
      c.id = need<std::string>(cj, "id", path);
      c.hubs = read(cj, "hubs", c.hubs, path);
      c.alpha = read(cj, "alpha", c.alpha, path);
      c.active = read(cj, "active", c.active, path);
      s.clusters.push_back(std::move(c));
    }
  }
  if (j.contains("events")) {
    if (!j.at("events").is_array()) throw ValidationError("events: expected an array");
    for (std::size_t k = 0; k < j.at("events").size(); ++k) {
      const json& ej = j.at("events")[k];
      const std::string path = "events[" + std::to_string(k) + "].";
      TopologyEvent e;
      e.kind = parse_event_kind(need<std::string>(ej, "kind", path));
      e.time = need<Index>(ej, "time", path);
      e.hub = read<std::string>(ej, "hub", "", path);
      e.cluster = need<std::string>(ej, "cluster", path);
      s.events.push_back(std::move(e));
    }
  }
  s.validate();
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema"] = s.schema;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["duration"] = s.duration;
  j["workers"] = s.workers;
  j["schedule"] = {{"T_cl", s.schedule.T_cl}, {"T_hb", s.schedule.T_hb}, {"t_rh", s.schedule.t_rh}, {"t_f", s.schedule.t_f}};
  j["tariffs"] = {{"peak", s.rates.peak},       {"offpeak", s.rates.offpeak},
                  {"feedin", s.rates.feedin},   {"gas", s.rates.gas},
                  {"trading_fee", s.rates.trading_fee}, {"peak_hours", s.peak_hours}};
  j["consensus"] = {{"eps_primal", s.consensus.eps_primal}, {"eps_dual", s.consensus.eps_dual},
                    {"max_iterations", s.consensus.max_iterations}, {"rho0", s.consensus.rho0},
                    {"rho_growth", s.consensus.rho_growth}, {"rho_max", s.consensus.rho_max},
                    {"rho_carry", s.consensus.rho_carry}};
  j["solver"] = {{"tolerance", s.consensus.solver.tolerance}, {"max_iterations", s.consensus.solver.max_iterations}};
  j["bargaining"] = {{"sigma_primal", s.bargaining.sigma_primal}, {"sigma_dual", s.bargaining.sigma_dual},
                     {"max_iterations", s.bargaining.max_iterations}, {"mu0", s.bargaining.mu0},
                     {"mu_decay", s.bargaining.mu_decay}, {"mu_floor_fraction", s.bargaining.mu_floor_fraction},
                     {"eps_log", s.bargaining.eps_log_relative}, {"normalize_weights", s.bargaining.normalize_weights}};
  j["settlement"] = {{"W", s.settlement.W}, {"beta_max", s.settlement.beta_max}};
  j["weights"] = weight_name(s.weights);
  j["weather"] = {{"start_day", s.weather.start_day}, {"irradiance_peak", s.weather.irradiance_peak},
                  {"cloudiness", s.weather.cloudiness}};
  if (!s.irradiance.empty()) j["irradiance"] = s.irradiance;
  j["hubs"] = json::array();
  for (const auto& h : s.hubs) {
    json hj;
    hj["id"] = h.id;
    hj["eta_p"] = h.eta_p;
    hj["eta_q"] = h.eta_q;
    hj["p_bid_cap"] = h.p_bid_cap;
    hj["q_bid_cap"] = h.q_bid_cap;
    if (h.annual_demand) hj["annual_demand"] = *h.annual_demand;
    hj["profile"] = {{"elec_mean", h.profile.elec_mean},
                     {"heat_mean", h.profile.heat_mean},
                     {"elec_daily_amp", h.profile.elec_daily_amp},
                     {"heat_daily_amp", h.profile.heat_daily_amp},
                     {"heat_seasonal_amp", h.profile.heat_seasonal_amp},
                     {"noise", h.profile.noise}};
    if (!h.elec_demand.empty()) hj["elec_demand"] = h.elec_demand;
    if (!h.heat_demand.empty()) hj["heat_demand"] = h.heat_demand;
    if (!h.initial_states.empty()) hj["initial_states"] = h.initial_states;
    hj["devices"] = json::array();
    for (const auto& d : h.devices) {
      json dj;
      dj["type"] = d.type;
      dj["name"] = d.name;
      for (const auto& [k, v] : d.params) dj[k] = v;
      hj["devices"].push_back(dj);
    }
    j["hubs"].push_back(hj);
  }
  j["clusters"] = json::array();
  for (const auto& c : s.clusters)
    j["clusters"].push_back({{"id", c.id}, {"hubs", c.hubs}, {"alpha", c.alpha}, {"active", c.active}});
  j["events"] = json::array();
  for (const auto& e : s.events) {
    json ej = {{"kind", to_string(e.kind)}, {"time", e.time}, {"cluster", e.cluster}};
    if (!e.hub.empty()) ej["hub"] = e.hub;
    j["events"].push_back(ej);
  }
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << scenario_to_json(scenario);
  if (!out) throw Error("write failed for '" + path + "'");
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------- synthetic data

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double day_of_year(const WeatherSpec& w, Index t) { return w.start_day + static_cast<double>(t) / 24.0; }

// +1 in midwinter, -1 in midsummer
double winter_index(double day) { return std::cos(kTwoPi * (day - 15.0) / 365.0); }

}  // namespace

SyntheticSeries generate_synthetic(const ProfileSpec& p, const WeatherSpec& weather, Index steps, std::uint64_t seed,
                                   const std::string& key) {
  if (p.elec_mean < 0.0 || p.heat_mean < 0.0 || p.noise < 0.0)
    throw ValidationError("profile: negative scale parameter");
  std::mt19937_64 rng(seed ^ fnv1a(key));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SyntheticSeries out;
  out.elec.reserve(static_cast<std::size_t>(steps));
  out.heat.reserve(static_cast<std::size_t>(steps));
  for (Index t = 0; t < steps; ++t) {
    const double hour = static_cast<double>(t % 24);
    const double day = day_of_year(weather, t);
    const double daily_e = -std::cos(kTwoPi * (hour - 2.0) / 24.0);
    const double daily_q = std::cos(kTwoPi * (hour - 6.0) / 24.0);
    const double season = 1.0 + p.heat_seasonal_amp * winter_index(day);
    const double e = p.elec_mean * (1.0 + p.elec_daily_amp * daily_e) * (1.0 + p.noise * u(rng));
    const double q = p.heat_mean * season * (1.0 + p.heat_daily_amp * daily_q) * (1.0 + p.noise * u(rng));
    out.elec.push_back(std::max(0.0, e));
    out.heat.push_back(std::max(0.0, q));
  }
  return out;
}

std::vector<double> generate_irradiance(const WeatherSpec& w, Index steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ fnv1a("irradiance"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (Index t = 0; t < steps; ++t) {
    const double hour = static_cast<double>(t % 24);
    const double day = day_of_year(w, t);
    const double summer = -winter_index(day);  // -1 winter .. +1 summer
    const double daylen = 12.0 + 4.0 * summer;
    const double sunrise = 12.0 - 0.5 * daylen;
    const double x = (hour + 0.5 - sunrise) / daylen;
    const double cloud = 1.0 - w.cloudiness * u(rng);
    double v = 0.0;
    if (x > 0.0 && x < 1.0) v = w.irradiance_peak * (0.6 + 0.4 * summer) * std::sin(std::numbers::pi * x) * cloud;
    out.push_back(v);
  }
  return out;
}

std::vector<HubSpec> build_hubs(const Scenario& s) {
  const Index steps = s.data_steps();
  const std::vector<double> irr = s.irradiance.empty() ? generate_irradiance(s.weather, steps, s.seed) : s.irradiance;
  std::vector<HubSpec> out;
  for (const auto& hc : s.hubs) {
    HubSpec h;
    h.id = hc.id;
    for (const auto& d : hc.devices) h.devices.push_back(make_device(d));
    h.eta_p = hc.eta_p;
    h.eta_q = hc.eta_q;
    h.p_bid_cap = hc.p_bid_cap;
    h.q_bid_cap = hc.q_bid_cap;
    const SyntheticSeries syn = generate_synthetic(hc.profile, s.weather, steps, s.seed, hc.id);
    h.elec_demand = hc.elec_demand.empty() ? syn.elec : hc.elec_demand;
    h.heat_demand = hc.heat_demand.empty() ? syn.heat : hc.heat_demand;
    for (const auto& st : hc.initial_states) h.initial_states.push_back(Eigen::Map<const Eigen::VectorXd>(st.data(), static_cast<Index>(st.size())));
    h.disturbances["irradiance"] = irr;
    if (hc.annual_demand) {
      h.annual_demand = *hc.annual_demand;
    } else {
      double sum = 0.0;
      for (Index t = 0; t < steps; ++t) sum += h.elec_demand[t] + h.heat_demand[t];
      h.annual_demand = sum / static_cast<double>(steps) * 8760.0;
    }
    h.validate(steps);
    out.push_back(std::move(h));
  }
  return out;
}

Tariffs build_tariffs(const Scenario& s) { return make_tariffs(s.rates, s.data_steps(), s.peak_hours); }

NetworkTopology build_topology(const Scenario& s) {
  NetworkTopology t;
  t.clusters = s.clusters;
  t.weights = s.weights;
  return t;
}

// ---------------------------------------------------------------- presets

namespace {

DeviceConfig dev(std::string type, std::map<std::string, double> params) {
  DeviceConfig d;
  d.type = type;
  d.name = std::move(type);
  d.params = std::move(params);
  return d;
}

HubConfig hub(std::string id, std::vector<DeviceConfig> devices, double elec, double heat) {
  HubConfig h;
  h.id = std::move(id);
  h.devices = std::move(devices);
  h.eta_p = 0.95;
  h.eta_q = 0.9;
  h.p_bid_cap = 30.0;
  h.q_bid_cap = 15.0;
  h.profile.elec_mean = elec;
  h.profile.heat_mean = heat;
  return h;
}

}  // namespace

Scenario preset_scenario(int hubs_per_cluster, Season season, Index duration, std::uint64_t seed) {
  if (hubs_per_cluster != 1 && hubs_per_cluster != 3) throw ValidationError("preset: 1 or 3 hubs per cluster");
  Scenario s;
  s.name = hubs_per_cluster == 1 ? "desk3" : "desk9";
  s.seed = seed;
  s.duration = duration;
  s.schedule.t_f = duration;
  s.weather.start_day = season == Season::winter ? 15 : season == Season::summer ? 196 : 105;
  s.name += season == Season::winter ? "-winter" : season == Season::summer ? "-summer" : "-spring";

  // solar cluster, CHP cluster, heat pump cluster
  std::vector<std::vector<HubConfig>> groups = {
      {hub("h1", {dev("pv", {{"peak", 40}}), dev("boiler", {{"gas", 40}}), dev("battery", {{"capacity", 30}, {"power", 10}})}, 14, 12),
       hub("h2", {dev("pv", {{"peak", 20}}), dev("solar_thermal", {{"peak", 15}}), dev("boiler", {{"gas", 35}}),
                  dev("water_tank", {{"capacity", 30}, {"power", 10}})}, 10, 10),
       hub("h3", {dev("heat_pump", {{"elec", 8}, {"cop", 3.5}}), dev("boiler", {{"gas", 25}})}, 12, 10)},
      {hub("h4", {dev("chp", {{"gas", 70}, {"eta_p", 0.35}, {"eta_q", 0.5}}), dev("boiler", {{"gas", 35}})}, 10, 16),
       hub("h5", {dev("chp", {{"gas", 35}, {"eta_p", 0.33}, {"eta_q", 0.5}}), dev("boiler", {{"gas", 35}}),
                  dev("water_tank", {{"capacity", 40}, {"power", 15}})}, 8, 14),
       hub("h6", {dev("pv", {{"peak", 10}}), dev("boiler", {{"gas", 40}})}, 12, 12)},
      {hub("h7", {dev("heat_pump", {{"elec", 12}, {"cop", 3.0}}), dev("boiler", {{"gas", 30}})}, 25, 15),
       hub("h8", {dev("heat_pump", {{"elec", 8}, {"cop", 3.2}}), dev("pv", {{"peak", 15}}), dev("boiler", {{"gas", 25}}),
                  dev("battery", {{"capacity", 20}, {"power", 8}})}, 15, 10),
       hub("h9", {dev("boiler", {{"gas", 45}})}, 20, 15)}};
  // single-hub clusters: one larger, strongly complementary hub each
  std::vector<HubConfig> singles = {
      hub("h1", {dev("pv", {{"peak", 40}}), dev("boiler", {{"gas", 40}})}, 10, 10),
      hub("h4", {dev("chp", {{"gas", 80}, {"eta_p", 0.35}, {"eta_q", 0.5}}), dev("boiler", {{"gas", 40}}),
                 dev("pv", {{"peak", 10}})}, 8, 20),
      hub("h7", {dev("heat_pump", {{"elec", 10}, {"cop", 3.0}}), dev("boiler", {{"gas", 30}})}, 25, 12)};
  for (auto& h : singles) h.p_bid_cap = 40.0;
  const char* names[] = {"solar", "chp", "heatpump"};
  for (std::size_t m = 0; m < groups.size(); ++m) {
    ClusterDef c;
    c.id = names[m];
    for (const auto& h : hubs_per_cluster == 3 ? groups[m] : std::vector<HubConfig>{singles[m]}) {
      s.hubs.push_back(h);
      c.hubs.push_back(h.id);
    }
    s.clusters.push_back(c);
  }
  return s;
}

}  // namespace ehub
