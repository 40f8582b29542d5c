#pragma once

#include "ehub/solver.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace ehub {

// Input channel layout shared by every device.
enum Channel : int { kGasIn = 0, kElecIn = 1, kHeatIn = 2, kElecOut = 3, kHeatOut = 4 };
inline constexpr int kChannels = 5;

using ChannelVector = Eigen::Matrix<double, kChannels, 1>;

/// x+ = A x + B u + D d with box state bounds and a polyhedral input set.
struct DeviceModel {
  std::string name;
  std::string kind;
  int state_dim = 0;
  Eigen::MatrixXd A;  // state_dim x state_dim
  Eigen::MatrixXd B;  // state_dim x 5
  Eigen::MatrixXd D;  // state_dim x 1
  Eigen::VectorXd state_lower;
  Eigen::VectorXd state_upper;
  ChannelVector input_lower = ChannelVector::Zero();
  ChannelVector input_upper = ChannelVector::Zero();
  Eigen::MatrixXd G;  // G u <= h
  Eigen::VectorXd h;
  Eigen::MatrixXd E;  // E u = f
  Eigen::VectorXd f;
  // Availability: u[channel] <= scale * profile[t] (e.g. irradiance).
  std::string disturbance_key;
  int disturbance_channel = -1;
  double disturbance_scale = 0.0;

  void validate() const;
};

// Presets. Capacities in kWh per step, efficiencies unitless.
DeviceModel make_pv(const std::string& name, double peak_kw);
DeviceModel make_solar_thermal(const std::string& name, double peak_kw);
DeviceModel make_chp(const std::string& name, double gas_kw, double eta_p, double eta_q);
DeviceModel make_boiler(const std::string& name, double gas_kw, double eta);
DeviceModel make_heat_pump(const std::string& name, double elec_kw, double cop);
DeviceModel make_battery(const std::string& name, double capacity, double power, double eta_c,
                         double eta_d, double retention);
DeviceModel make_water_tank(const std::string& name, double capacity, double power, double retention);

struct HubSpec {
  std::string id;
  std::vector<DeviceModel> devices;
  std::vector<double> elec_demand;
  std::vector<double> heat_demand;
  double eta_p = 1.0;
  double eta_q = 1.0;
  double p_bid_cap = 0.0;
  double q_bid_cap = 0.0;
  std::vector<Eigen::VectorXd> initial_states;
  double annual_demand = 0.0;
  std::map<std::string, std::vector<double>> disturbances;

  /// Throws ValidationError; `steps` is the number of covered time steps required.
  void validate(Index steps) const;
  std::vector<Eigen::VectorXd> default_states() const;
};

struct Tariffs {
  std::vector<double> elec_buy;
  std::vector<double> elec_feedin;
  std::vector<double> gas;
  std::vector<double> trading_fee;
  std::vector<int> peak_hours;

  Index steps() const { return static_cast<Index>(elec_buy.size()); }
  void validate(Index steps) const;
  Tariffs scaled(double factor) const;
};

struct TariffRates {
  double peak = 0.27;
  double offpeak = 0.22;
  double feedin = 0.12;
  double gas = 0.115;
  double trading_fee = 0.02;
};

/// Hourly series: hour of day is t % 24.
Tariffs make_tariffs(const TariffRates& rates, Index steps, const std::vector<int>& peak_hours);

struct Horizon {
  Index start = 0;
  Index length = 0;
};

/// Variable indices of one hub inside a ConvexSubproblem.
struct HubLayout {
  Horizon horizon;
  std::vector<int> state_dims;
  std::vector<Index> u_base;  // per device: u_base + 5 t + channel
  std::vector<Index> x_base;  // per device: x_base + state_dim t + k (state after step t)
  Index e_out_base = 0;
  Index e_in_base = 0;
  Index gas_base = 0;
  Index p_out_base = 0;  // import split
  Index p_in_base = 0;   // export split
  Index q_out_base = 0;
  Index q_in_base = 0;
  Index p_net_base = 0;
  Index q_net_base = 0;
  Index first = 0;
  Index last = 0;  // one past

  Index T() const { return horizon.length; }
  Index u(std::size_t n, Index t, int ch) const { return u_base[n] + kChannels * t + ch; }
  Index x(std::size_t n, Index t, int k) const { return x_base[n] + state_dims[n] * t + k; }
  Index e_out(Index t) const { return e_out_base + t; }
  Index e_in(Index t) const { return e_in_base + t; }
  Index gas(Index t) const { return gas_base + t; }
  Index p_out(Index t) const { return p_out_base + t; }
  Index p_in(Index t) const { return p_in_base + t; }
  Index q_out(Index t) const { return q_out_base + t; }
  Index q_in(Index t) const { return q_in_base + t; }
  Index p_net(Index t) const { return p_net_base + t; }
  Index q_net(Index t) const { return q_net_base + t; }
};

struct ConstraintBlock {
  HubLayout layout;
  ConvexSubproblem problem;
};

/// Appends the hub's feasible set over the horizon. Trade caps may be
/// overridden (pass 0 for an islanded hub).
HubLayout append_feasible_set(ConvexSubproblem& problem, const HubSpec& hub, Horizon horizon,
                              const std::vector<Eigen::VectorXd>& initial_states, double p_cap,
                              double q_cap);

ConstraintBlock build_feasible_set(const HubSpec& hub, Horizon horizon,
                                   const std::vector<Eigen::VectorXd>& initial_states);

/// Adds scale * J_grid to the objective.
void add_grid_cost(ConvexSubproblem& problem, const HubLayout& layout, const Tariffs& tariffs,
                   double scale = 1.0);

/// Linear J_grid as terms plus constant 0, for use in equality rows.
std::vector<Term> grid_cost_terms(const HubLayout& layout, const Tariffs& tariffs, double scale = 1.0);

struct HubPlan {
  Horizon horizon;
  std::vector<std::vector<ChannelVector>> u;    // [device][t]
  std::vector<std::vector<Eigen::VectorXd>> x;  // [device][t], state after step t
  std::vector<double> e_out;
  std::vector<double> e_in;
  std::vector<double> gas;
  std::vector<double> p_bid_out;
  std::vector<double> p_bid_in;
  std::vector<double> q_bid_out;
  std::vector<double> q_bid_in;

  double p_bid(Index t) const { return p_bid_out[t] - p_bid_in[t]; }
  double q_bid(Index t) const { return q_bid_out[t] - q_bid_in[t]; }
  Index T() const { return horizon.length; }
};

HubPlan extract_plan(const HubLayout& layout, const Eigen::VectorXd& solution);

/// Largest absolute violation of the electricity, heat and gas balances.
double balance_violation(const HubSpec& hub, const HubPlan& plan);

double grid_cost(const HubPlan& plan, const Tariffs& tariffs);
/// Cost of step t of the plan (t relative to the plan start).
double realized_step_cost(const HubPlan& plan, Index t, const Tariffs& tariffs);

/// States after applying the first step of a plan.
std::vector<Eigen::VectorXd> first_step_states(const HubPlan& plan);

}  // namespace ehub
