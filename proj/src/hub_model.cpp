#include "ehub/hub_model.hpp"

#include "ehub/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ehub {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

DeviceModel stateless(const std::string& name, const std::string& kind) {
  DeviceModel d;
  d.name = name;
  d.kind = kind;
  d.A.resize(0, 0);
  d.B.resize(0, kChannels);
  d.D.resize(0, 1);
  d.E.resize(0, kChannels);
  d.G.resize(0, kChannels);
  return d;
}

DeviceModel storage(const std::string& name, const std::string& kind, double capacity, double retention) {
  DeviceModel d = stateless(name, kind);
  d.state_dim = 1;
  d.A = Eigen::MatrixXd::Constant(1, 1, retention);
  d.B = Eigen::MatrixXd::Zero(1, kChannels);
  d.D = Eigen::MatrixXd::Zero(1, 1);
  d.state_lower = Eigen::VectorXd::Zero(1);
  d.state_upper = Eigen::VectorXd::Constant(1, capacity);
  return d;
}

}  // namespace

void DeviceModel::validate() const {
  const std::string who = "device '" + name + "': ";
  require(state_dim >= 0, who + "negative state dimension");
  require(A.rows() == state_dim && A.cols() == state_dim, who + "A has wrong shape");
  require(B.rows() == state_dim && B.cols() == kChannels, who + "B has wrong shape");
  require(D.rows() == state_dim && D.cols() == 1, who + "D has wrong shape");
  require(state_lower.size() == state_dim && state_upper.size() == state_dim, who + "state box has wrong size");
  for (int k = 0; k < state_dim; ++k) require(state_lower[k] <= state_upper[k], who + "state lower > upper");
  require(G.cols() == kChannels && G.rows() == h.size(), who + "inequality block has wrong shape");
  require(E.cols() == kChannels && E.rows() == f.size(), who + "equality block has wrong shape");
  // every device may idle
  for (int c = 0; c < kChannels; ++c)
    require(input_lower[c] <= 0.0 && input_upper[c] >= 0.0, who + "idle input outside channel bounds");
  for (Index r = 0; r < h.size(); ++r) require(h[r] >= 0.0, who + "idle input violates G u <= h");
  for (Index r = 0; r < f.size(); ++r) require(f[r] == 0.0, who + "idle input violates E u = f");
  if (disturbance_channel >= 0) {
    require(disturbance_channel < kChannels, who + "bad disturbance channel");
    require(!disturbance_key.empty(), who + "disturbance channel without profile key");
    require(disturbance_scale >= 0.0, who + "negative disturbance scale");
  }
}

DeviceModel make_pv(const std::string& name, double peak_kw) {
  require(peak_kw >= 0.0, "pv capacity must be nonnegative");
  DeviceModel d = stateless(name, "pv");
  d.input_upper[kElecOut] = peak_kw;
  d.disturbance_key = "irradiance";
  d.disturbance_channel = kElecOut;
  d.disturbance_scale = peak_kw;
  return d;
}

DeviceModel make_solar_thermal(const std::string& name, double peak_kw) {
  require(peak_kw >= 0.0, "solar thermal capacity must be nonnegative");
  DeviceModel d = stateless(name, "solar_thermal");
  d.input_upper[kHeatOut] = peak_kw;
  d.disturbance_key = "irradiance";
  d.disturbance_channel = kHeatOut;
  d.disturbance_scale = peak_kw;
  return d;
}

DeviceModel make_chp(const std::string& name, double gas_kw, double eta_p, double eta_q) {
  require(gas_kw >= 0.0 && eta_p > 0.0 && eta_q > 0.0 && eta_p + eta_q <= 1.0, "bad chp parameters");
  DeviceModel d = stateless(name, "chp");
  d.input_upper[kGasIn] = gas_kw;
  d.input_upper[kElecOut] = eta_p * gas_kw;
  d.input_upper[kHeatOut] = eta_q * gas_kw;
  d.E = Eigen::MatrixXd::Zero(2, kChannels);
  d.E(0, kElecOut) = 1.0;
  d.E(0, kGasIn) = -eta_p;
  d.E(1, kHeatOut) = 1.0;
  d.E(1, kGasIn) = -eta_q;
  d.f = Eigen::VectorXd::Zero(2);
  return d;
}

DeviceModel make_boiler(const std::string& name, double gas_kw, double eta) {
  require(gas_kw >= 0.0 && eta > 0.0 && eta <= 1.0, "bad boiler parameters");
  DeviceModel d = stateless(name, "boiler");
  d.input_upper[kGasIn] = gas_kw;
  d.input_upper[kHeatOut] = eta * gas_kw;
  d.E = Eigen::MatrixXd::Zero(1, kChannels);
  d.E(0, kHeatOut) = 1.0;
  d.E(0, kGasIn) = -eta;
  d.f = Eigen::VectorXd::Zero(1);
  return d;
}

DeviceModel make_heat_pump(const std::string& name, double elec_kw, double cop) {
  require(elec_kw >= 0.0 && cop > 0.0, "bad heat pump parameters");
  DeviceModel d = stateless(name, "heat_pump");
  d.input_upper[kElecIn] = elec_kw;
  d.input_upper[kHeatOut] = cop * elec_kw;
  d.E = Eigen::MatrixXd::Zero(1, kChannels);
  d.E(0, kHeatOut) = 1.0;
  d.E(0, kElecIn) = -cop;
  d.f = Eigen::VectorXd::Zero(1);
  return d;
}

DeviceModel make_battery(const std::string& name, double capacity, double power, double eta_c,
                         double eta_d, double retention) {
  require(capacity >= 0.0 && power >= 0.0, "bad battery size");
  require(eta_c > 0.0 && eta_c <= 1.0 && eta_d > 0.0 && eta_d <= 1.0, "bad battery efficiency");
  require(retention > 0.0 && retention <= 1.0, "bad battery retention");
  DeviceModel d = storage(name, "battery", capacity, retention);
  d.B(0, kElecIn) = eta_c;
  d.B(0, kElecOut) = -1.0 / eta_d;
  d.input_upper[kElecIn] = power;
  d.input_upper[kElecOut] = power;
  return d;
}

DeviceModel make_water_tank(const std::string& name, double capacity, double power, double retention) {
  require(capacity >= 0.0 && power >= 0.0, "bad water tank size");
  require(retention > 0.0 && retention <= 1.0, "bad water tank retention");
  DeviceModel d = storage(name, "water_tank", capacity, retention);
  d.B(0, kHeatIn) = 1.0;
  d.B(0, kHeatOut) = -1.0;
  d.input_upper[kHeatIn] = power;
  d.input_upper[kHeatOut] = power;
  return d;
}

void HubSpec::validate(Index steps) const {
  const std::string who = "hub '" + id + "': ";
  require(!id.empty(), "hub without id");
  require(static_cast<Index>(elec_demand.size()) >= steps, who + "electricity demand series too short");
  require(static_cast<Index>(heat_demand.size()) >= steps, who + "heat demand series too short");
  require(eta_p > 0.0 && eta_p <= 1.0, who + "eta_p outside (0,1]");
  require(eta_q > 0.0 && eta_q <= 1.0, who + "eta_q outside (0,1]");
  require(p_bid_cap >= 0.0 && q_bid_cap >= 0.0, who + "negative trade cap");
  for (Index t = 0; t < steps; ++t)
    require(elec_demand[t] >= 0.0 && heat_demand[t] >= 0.0, who + "negative demand");
  require(initial_states.empty() || initial_states.size() == devices.size(), who + "initial state count mismatch");
  for (std::size_t n = 0; n < devices.size(); ++n) {
    const auto& d = devices[n];
    d.validate();
    if (!initial_states.empty())
      require(initial_states[n].size() == d.state_dim, who + "initial state of '" + d.name + "' has wrong size");
    if (!d.disturbance_key.empty()) {
      auto it = disturbances.find(d.disturbance_key);
      require(it != disturbances.end(), who + "missing disturbance profile '" + d.disturbance_key + "'");
      require(static_cast<Index>(it->second.size()) >= steps, who + "disturbance profile too short");
    }
  }
}

std::vector<Eigen::VectorXd> HubSpec::default_states() const {
  if (!initial_states.empty()) return initial_states;
  std::vector<Eigen::VectorXd> s;
  for (const auto& d : devices) s.push_back(0.5 * (d.state_lower + d.state_upper));
  return s;
}

void Tariffs::validate(Index steps) const {
  require(static_cast<Index>(elec_buy.size()) >= steps && static_cast<Index>(elec_feedin.size()) >= steps &&
              static_cast<Index>(gas.size()) >= steps && static_cast<Index>(trading_fee.size()) >= steps,
          "tariff series do not cover the horizon");
  for (Index t = 0; t < steps; ++t) {
    require(elec_buy[t] >= 0 && elec_feedin[t] >= 0 && gas[t] >= 0 && trading_fee[t] >= 0, "negative tariff");
    require(elec_feedin[t] <= elec_buy[t], "feed-in tariff above purchase price");
  }
}

Tariffs Tariffs::scaled(double factor) const {
  Tariffs out = *this;
  for (auto* v : {&out.elec_buy, &out.elec_feedin, &out.gas, &out.trading_fee})
    for (auto& x : *v) x *= factor;
  return out;
}

Tariffs make_tariffs(const TariffRates& rates, Index steps, const std::vector<int>& peak_hours) {
  Tariffs t;
  t.peak_hours = peak_hours;
  for (Index k = 0; k < steps; ++k) {
    const int hour = static_cast<int>(k % 24);
    const bool peak = std::find(peak_hours.begin(), peak_hours.end(), hour) != peak_hours.end();
    t.elec_buy.push_back(peak ? rates.peak : rates.offpeak);
    t.elec_feedin.push_back(rates.feedin);
    t.gas.push_back(rates.gas);
    t.trading_fee.push_back(rates.trading_fee);
  }
  return t;
}

HubLayout append_feasible_set(ConvexSubproblem& p, const HubSpec& hub, Horizon hz,
                              const std::vector<Eigen::VectorXd>& x0, double p_cap, double q_cap) {
  const Index T = hz.length;
  require(T > 0, "empty horizon");
  require(hz.start >= 0, "negative horizon start");
  require(x0.size() == hub.devices.size(), "hub '" + hub.id + "': initial state count mismatch");
  require(static_cast<Index>(hub.elec_demand.size()) >= hz.start + T &&
              static_cast<Index>(hub.heat_demand.size()) >= hz.start + T,
          "hub '" + hub.id + "': demand series too short");

  HubLayout L;
  L.horizon = hz;
  L.first = p.num_vars();
  const std::size_t nd = hub.devices.size();

  for (std::size_t n = 0; n < nd; ++n) {
    const auto& d = hub.devices[n];
    require(x0[n].size() == d.state_dim, "initial state of '" + d.name + "' has wrong size");
    L.state_dims.push_back(d.state_dim);
    const std::vector<double>* prof = nullptr;
    if (!d.disturbance_key.empty()) {
      auto it = hub.disturbances.find(d.disturbance_key);
      if (it != hub.disturbances.end()) prof = &it->second;
      require(prof && static_cast<Index>(prof->size()) >= hz.start + T,
              "hub '" + hub.id + "': disturbance '" + d.disturbance_key + "' does not cover horizon");
    }
    L.u_base.push_back(p.num_vars());
    for (Index t = 0; t < T; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        double hi = d.input_upper[c];
        if (c == d.disturbance_channel) {
          const double avail = (*prof)[hz.start + t];
          hi = std::min(hi, avail > 1e-9 ? d.disturbance_scale * avail : 0.0);
        }
        p.add_variable(d.input_lower[c], hi);
      }
    }
    L.x_base.push_back(p.num_vars());
    for (Index t = 0; t < T; ++t)
      for (int k = 0; k < d.state_dim; ++k) p.add_variable(d.state_lower[k], d.state_upper[k]);
  }
  L.e_out_base = p.add_variables(T, 0.0, kInf);
  L.e_in_base = p.add_variables(T, 0.0, kInf);
  L.gas_base = p.add_variables(T, 0.0, kInf);
  L.p_out_base = p.add_variables(T, 0.0, p_cap);
  L.p_in_base = p.add_variables(T, 0.0, p_cap);
  L.q_out_base = p.add_variables(T, 0.0, q_cap);
  L.q_in_base = p.add_variables(T, 0.0, q_cap);
  L.p_net_base = p.add_variables(T, -p_cap, p_cap);
  L.q_net_base = p.add_variables(T, -q_cap, q_cap);
  L.last = p.num_vars();

  for (std::size_t n = 0; n < nd; ++n) {
    const auto& d = hub.devices[n];
    double dist_scale = 0.0;
    const std::vector<double>* prof = nullptr;
    if (!d.disturbance_key.empty()) prof = &hub.disturbances.at(d.disturbance_key);
    for (Index t = 0; t < T; ++t) {
      for (Index r = 0; r < d.E.rows(); ++r) {
        std::vector<Term> row;
        for (int c = 0; c < kChannels; ++c)
          if (d.E(r, c) != 0.0) row.push_back({L.u(n, t, c), d.E(r, c)});
        p.add_equality(std::move(row), d.f[r]);
      }
      for (Index r = 0; r < d.G.rows(); ++r) {
        std::vector<Term> row;
        for (int c = 0; c < kChannels; ++c)
          if (d.G(r, c) != 0.0) row.push_back({L.u(n, t, c), d.G(r, c)});
        p.add_inequality(std::move(row), d.h[r]);
      }
      dist_scale = prof ? (*prof)[hz.start + t] : 0.0;
      // x_{t+1} - A x_t - B u_t = D d_t  (x_0 is data)
      for (int k = 0; k < d.state_dim; ++k) {
        std::vector<Term> row{{L.x(n, t, k), 1.0}};
        double rhs = d.D(k, 0) * dist_scale;
        for (int j = 0; j < d.state_dim; ++j) {
          if (d.A(k, j) == 0.0) continue;
          if (t == 0)
            rhs += d.A(k, j) * x0[n][j];
          else
            row.push_back({L.x(n, t - 1, j), -d.A(k, j)});
        }
        for (int c = 0; c < kChannels; ++c)
          if (d.B(k, c) != 0.0) row.push_back({L.u(n, t, c), -d.B(k, c)});
        p.add_equality(std::move(row), rhs);
      }
    }
  }

  for (Index t = 0; t < T; ++t) {
    std::vector<Term> elec{{L.e_out(t), 1.0}, {L.e_in(t), -1.0}, {L.p_out(t), hub.eta_p}, {L.p_in(t), -1.0}};
    std::vector<Term> heat{{L.q_out(t), hub.eta_q}, {L.q_in(t), -1.0}};
    std::vector<Term> gas{{L.gas(t), 1.0}};
    for (std::size_t n = 0; n < nd; ++n) {
      elec.push_back({L.u(n, t, kElecOut), 1.0});
      elec.push_back({L.u(n, t, kElecIn), -1.0});
      heat.push_back({L.u(n, t, kHeatOut), 1.0});
      heat.push_back({L.u(n, t, kHeatIn), -1.0});
      gas.push_back({L.u(n, t, kGasIn), -1.0});
    }
    p.add_equality(std::move(elec), hub.elec_demand[hz.start + t]);
    p.add_equality(std::move(heat), hub.heat_demand[hz.start + t]);
    p.add_equality(std::move(gas), 0.0);
    p.add_equality({{L.p_net(t), 1.0}, {L.p_out(t), -1.0}, {L.p_in(t), 1.0}}, 0.0);
    p.add_equality({{L.q_net(t), 1.0}, {L.q_out(t), -1.0}, {L.q_in(t), 1.0}}, 0.0);
  }
  return L;
}

ConstraintBlock build_feasible_set(const HubSpec& hub, Horizon horizon,
                                   const std::vector<Eigen::VectorXd>& initial_states) {
  ConstraintBlock block;
  block.layout = append_feasible_set(block.problem, hub, horizon, initial_states, hub.p_bid_cap, hub.q_bid_cap);
  return block;
}

std::vector<Term> grid_cost_terms(const HubLayout& L, const Tariffs& tar, double scale) {
  const Index t0 = L.horizon.start;
  require(tar.steps() >= t0 + L.T(), "tariffs do not cover the horizon");
  std::vector<Term> terms;
  for (Index t = 0; t < L.T(); ++t) {
    terms.push_back({L.e_out(t), scale * tar.elec_buy[t0 + t]});
    terms.push_back({L.e_in(t), -scale * tar.elec_feedin[t0 + t]});
    terms.push_back({L.gas(t), scale * tar.gas[t0 + t]});
    terms.push_back({L.p_out(t), scale * tar.trading_fee[t0 + t]});
    terms.push_back({L.p_in(t), scale * tar.trading_fee[t0 + t]});
  }
  return terms;
}

void add_grid_cost(ConvexSubproblem& p, const HubLayout& L, const Tariffs& tar, double scale) {
  for (const auto& term : grid_cost_terms(L, tar, scale)) p.add_linear(term.var, term.coef);
}

HubPlan extract_plan(const HubLayout& L, const Eigen::VectorXd& x) {
  HubPlan plan;
  plan.horizon = L.horizon;
  const Index T = L.T();
  const std::size_t nd = L.u_base.size();
  plan.u.assign(nd, {});
  plan.x.assign(nd, {});
  for (std::size_t n = 0; n < nd; ++n) {
    for (Index t = 0; t < T; ++t) {
      ChannelVector u;
      for (int c = 0; c < kChannels; ++c) u[c] = x[L.u(n, t, c)];
      plan.u[n].push_back(u);
      Eigen::VectorXd s(L.state_dims[n]);
      for (int k = 0; k < L.state_dims[n]; ++k) s[k] = x[L.x(n, t, k)];
      plan.x[n].push_back(s);
    }
  }
  for (Index t = 0; t < T; ++t) {
    plan.e_out.push_back(x[L.e_out(t)]);
    plan.e_in.push_back(x[L.e_in(t)]);
    plan.gas.push_back(x[L.gas(t)]);
    plan.p_bid_out.push_back(x[L.p_out(t)]);
    plan.p_bid_in.push_back(x[L.p_in(t)]);
    plan.q_bid_out.push_back(x[L.q_out(t)]);
    plan.q_bid_in.push_back(x[L.q_in(t)]);
  }
  return plan;
}

double balance_violation(const HubSpec& hub, const HubPlan& plan) {
  double v = 0.0;
  for (Index t = 0; t < plan.T(); ++t) {
    double elec = plan.e_out[t] - plan.e_in[t] + hub.eta_p * plan.p_bid_out[t] - plan.p_bid_in[t];
    double heat = hub.eta_q * plan.q_bid_out[t] - plan.q_bid_in[t];
    double gas = plan.gas[t];
    for (std::size_t n = 0; n < plan.u.size(); ++n) {
      const auto& u = plan.u[n][t];
      elec += u[kElecOut] - u[kElecIn];
      heat += u[kHeatOut] - u[kHeatIn];
      gas -= u[kGasIn];
    }
    const Index a = plan.horizon.start + t;
    v = std::max({v, std::abs(elec - hub.elec_demand[a]), std::abs(heat - hub.heat_demand[a]), std::abs(gas)});
  }
  return v;
}

double realized_step_cost(const HubPlan& plan, Index t, const Tariffs& tar) {
  require(t >= 0 && t < plan.T(), "step outside plan");
  const Index a = plan.horizon.start + t;
  require(tar.steps() > a, "tariffs do not cover the plan");
  const double tol = -1e-9;
  require(plan.e_out[t] >= tol && plan.e_in[t] >= tol && plan.gas[t] >= tol && plan.p_bid_out[t] >= tol &&
              plan.p_bid_in[t] >= tol,
          "negative entry in plan");
  return tar.elec_buy[a] * plan.e_out[t] - tar.elec_feedin[a] * plan.e_in[t] + tar.gas[a] * plan.gas[t] +
         tar.trading_fee[a] * (plan.p_bid_out[t] + plan.p_bid_in[t]);
}

double grid_cost(const HubPlan& plan, const Tariffs& tar) {
  double c = 0.0;
  for (Index t = 0; t < plan.T(); ++t) c += realized_step_cost(plan, t, tar);
  return c;
}

std::vector<Eigen::VectorXd> first_step_states(const HubPlan& plan) {
  std::vector<Eigen::VectorXd> s;
  for (const auto& traj : plan.x) s.push_back(traj.front());
  return s;
}

}  // namespace ehub
