#include "ehub/orchestrator.hpp"

#include "ehub/baselines.hpp"
#include "ehub/errors.hpp"
#include "ehub/log.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ehub {

std::string to_string(Controller c) {
  switch (c) {
    case Controller::clustered:
      return "clustered";
    case Controller::centralized:
      return "centralized";
    case Controller::decentralized:
      return "decentralized";
  }
  return "clustered";
}

Controller parse_controller(const std::string& s) {
  if (s == "clustered") return Controller::clustered;
  if (s == "centralized") return Controller::centralized;
  if (s == "decentralized") return Controller::decentralized;
  throw ValidationError("unknown controller '" + s + "'");
}

double ResultSet::total_grid() const {
  double s = 0.0;
  for (const auto& h : hubs) s += h.J_grid;
  return s;
}

double ResultSet::total_dec() const {
  double s = 0.0;
  for (const auto& h : hubs) s += h.J_dec;
  return s;
}

const HubTotals& ResultSet::hub(const std::string& id) const {
  for (const auto& h : hubs)
    if (h.hub == id) return h;
  throw ValidationError("no results for hub '" + id + "'");
}

namespace {

// Moves the trade part of a dual vector [P (T); C] forward by `shift` steps.
Eigen::VectorXd shift_dual(const Eigen::VectorXd& v, Index shift) {
  const Index T = v.size() - 1;
  Eigen::VectorXd out = v;
  for (Index k = 0; k < T; ++k) out[k] = v[std::min(k + shift, T - 1)];
  return out;
}

// Proportional split of `amount` over |weights|; equal split when all are zero.
std::vector<double> split(double amount, const std::vector<double>& weights) {
  std::vector<double> out(weights.size(), 0.0);
  if (weights.empty()) return out;
  double total = 0.0;
  for (double w : weights) total += std::abs(w);
  for (std::size_t k = 0; k < weights.size(); ++k)
    out[k] = total > 0.0 ? amount * std::abs(weights[k]) / total : amount / static_cast<double>(weights.size());
  return out;
}

constexpr double kBackupHeatEfficiency = 0.9;

}  // namespace

Simulation::Simulation(const Scenario& scenario, Controller controller)
    : scenario_(scenario), controller_(controller) {
  scenario_.validate();
  hubs_ = build_hubs(scenario_);
  tariffs_ = build_tariffs(scenario_);
  topology_ = build_topology(scenario_);
  bargaining_ = scenario_.bargaining_params();
  for (const auto& h : hubs_) {
    states_.push_back(h.default_states());
    shadow_.push_back(h.default_states());
    HubTotals tot;
    tot.hub = h.id;
    totals_.push_back(tot);
  }
  left_cluster_.assign(hubs_.size(), {});
  results_.scenario = scenario_.name;
  results_.seed = scenario_.seed;
  results_.controller = controller_;
  results_.duration = scenario_.duration;
}

std::size_t Simulation::hub_index(const std::string& id) const {
  for (std::size_t i = 0; i < hubs_.size(); ++i)
    if (hubs_[i].id == id) return i;
  throw TopologyError("unknown hub '" + id + "'");
}

std::vector<std::size_t> Simulation::members(const ClusterDef& c) const {
  std::vector<std::size_t> out;
  for (const auto& h : c.hubs) out.push_back(hub_index(h));
  return out;
}

Horizon Simulation::horizon_at(Index t) const {
  return {t, scenario_.schedule.bargaining_step(t) ? scenario_.schedule.T_cl : scenario_.schedule.T_hb};
}

Eigen::VectorXd Simulation::obligation(const std::string& cluster, Index t, Index length) const {
  Eigen::VectorXd P = Eigen::VectorXd::Zero(length);
  auto it = obligations_.find(cluster);
  if (it == obligations_.end()) return P;
  const Obligation& o = it->second;
  for (Index k = 0; k < length; ++k) {
    const Index idx = t + k - o.start;
    if (idx >= 0 && idx < o.P.size()) P[k] = o.P[idx];
  }
  return P;
}

void Simulation::begin_step() {
  if (began_) return;
  began_ = true;
  if (controller_ == Controller::clustered && t_ > 0 && t_ % scenario_.schedule.t_f == 0) settle_window();

  const EventOutcome out = apply_events(topology_, scenario_.events, t_, scenario_.schedule.t_rh);
  for (const auto& e : out.applied) {
    results_.events.push_back(e);
    log_msg(1, "t=%ld event %s hub=%s cluster=%s", static_cast<long>(t_), to_string(e.kind).c_str(), e.hub.c_str(),
            e.cluster.c_str());
  }
  for (const auto& e : out.applied) {
    if (e.kind == EventKind::hub_leave) {
      const std::size_t i = hub_index(e.hub);
      auto& acct = ledger_.cluster(e.cluster).account(e.hub);
      acct.left = true;
      left_cluster_[i] = e.cluster;
    } else if (e.kind == EventKind::hub_join) {
      left_cluster_[hub_index(e.hub)].clear();
    } else if (e.kind == EventKind::cluster_leave) {
      interim_.erase(e.cluster);
      interim_time_.erase(e.cluster);
      obligations_.erase(e.cluster);
    }
  }
  // Only the coordinators of clusters whose membership changed are reconfigured.
  for (const auto& id : out.changed_clusters) {
    auto it = interim_.find(id);
    if (it == interim_.end()) continue;
    const int m = topology_.find(id);
    const auto& c = topology_.clusters[static_cast<std::size_t>(m)];
    it->second = remap_state(it->second, c.hubs, 0, it->second.T, it->second.with_dj);
  }
  if (out.reweight) reweight_due_ = true;
}

void Simulation::step() {
  begin_step();
  finish_step();
}

void Simulation::finish_step() {
  if (done()) throw ValidationError("simulation already finished");
  begin_step();
  std::vector<HubPlan> plans(hubs_.size());
  std::vector<std::string> cluster_of(hubs_.size());
  switch (controller_) {
    case Controller::clustered:
      clustered_step(plans, cluster_of);
      break;
    case Controller::centralized:
      centralized_step(plans, cluster_of);
      break;
    case Controller::decentralized:
      for (std::size_t i = 0; i < hubs_.size(); ++i)
        plans[i] = solve_decentralized(hubs_[i], horizon_at(t_), states_[i], tariffs_, scenario_.consensus.solver)
                       .plans.front();
      break;
  }
  apply(plans, cluster_of);
  ++t_;
  began_ = false;
}

void Simulation::clustered_step(std::vector<HubPlan>& plans, std::vector<std::string>& cluster_of) {
  std::vector<char> planned(hubs_.size(), 0);
  if (scenario_.schedule.bargaining_step(t_)) {
    if (reweight_due_) {
      std::map<std::string, double> annual;
      for (const auto& h : hubs_) annual[h.id] = h.annual_demand;
      reweight(topology_, annual);
      reweight_due_ = false;
    }
    run_game(plans, planned);
  } else {
    const Horizon hz{t_, scenario_.schedule.T_hb};
    for (const auto& c : topology_.clusters) {
      if (!c.active) continue;
      interim(c, hz, obligation(c.id, t_, hz.length), plans, planned, true);
    }
  }
  for (const auto& c : topology_.clusters)
    if (c.active)
      for (std::size_t i : members(c)) cluster_of[i] = c.id;
  for (std::size_t i = 0; i < hubs_.size(); ++i) {
    if (planned[i]) continue;
    plans[i] =
        solve_decentralized(hubs_[i], horizon_at(t_), states_[i], tariffs_, scenario_.consensus.solver).plans.front();
  }
}

void Simulation::run_game(std::vector<HubPlan>& plans, std::vector<char>& planned) {
  const Schedule& sch = scenario_.schedule;
  const Horizon hz{t_, sch.T_cl};
  GameRecord game;
  game.t = t_;

  std::vector<const ClusterDef*> participants;
  for (const auto& c : topology_.clusters) {
    if (!c.active) continue;
    double cap = 0.0;
    for (std::size_t i : members(c)) cap += hubs_[i].p_bid_cap;
    if (cap > 0.0) participants.push_back(&c);
  }

  if (participants.size() >= 2) {
    std::vector<BargainingCluster> clusters;
    std::vector<std::string> ids;
    for (const ClusterDef* c : participants) {
      BargainingCluster bc;
      bc.id = c->id;
      bc.alpha = c->alpha;
      for (std::size_t i : members(*c)) {
        const BaselineResult dec = solve_decentralized(hubs_[i], hz, states_[i], tariffs_, scenario_.consensus.solver);
        bc.members.push_back({&hubs_[i], states_[i], dec.total});
      }
      clusters.push_back(std::move(bc));
      ids.push_back(c->id);
      game.participants.push_back(c->id);
    }

    BargainingWarmStart warm;
    const BargainingWarmStart* warm_ptr = nullptr;
    if (warm_.valid && warm_ids_ == ids) {
      const Index shift = t_ - warm_time_;
      warm.valid = true;
      warm.duals = warm_.duals;
      for (auto* v : {&warm.duals.y, &warm.duals.d, &warm.duals.z})
        for (auto& x : *v) x = shift_dual(x, shift);
      for (std::size_t m = 0; m < participants.size(); ++m)
        warm.inner.push_back(remap_state(warm_.inner[m], participants[m]->hubs, shift, sch.T_cl, true));
      warm_ptr = &warm;
    }

    const BargainingResult res = run_bargaining(clusters, tariffs_, hz, bargaining_, warm_ptr);
    for (const auto& row : res.trace) results_.trace.push_back({t_, row});
    game.converged = res.converged;
    game.fallback = res.fallback;
    game.iterations = res.iterations;
    game.bids = res.bids;
    log_msg(1, "t=%ld bargaining %s after %d iterations", static_cast<long>(t_),
            res.converged ? "converged" : "hit the iteration limit", res.iterations);

    if (res.converged) {
      for (std::size_t m = 0; m < participants.size(); ++m) {
        const std::string& id = participants[m]->id;
        obligations_[id] = {t_, res.bids[m].P};
        bids_[id][t_] = res.bids[m].C;
        const auto idx = members(*participants[m]);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          plans[idx[k]] = res.plans[m][k];
          planned[idx[k]] = 1;
        }
        interim_[id] = res.inner[m];
        interim_time_[id] = t_;
      }
      warm_.valid = true;
      warm_.duals = res.duals;
      warm_.inner = res.inner;
      warm_ids_ = ids;
      warm_time_ = t_;
    } else {
      ++results_.fallbacks;
      warm_.valid = false;
    }
  }

  // Clusters outside the game (or after a fallback) trade only internally.
  for (const auto& c : topology_.clusters) {
    if (!c.active) continue;
    const auto idx = members(c);
    if (std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return planned[i] != 0; })) continue;
    obligations_[c.id] = {t_, Eigen::VectorXd::Zero(sch.T_cl)};
    bids_[c.id][t_] = 0.0;
    interim(c, hz, Eigen::VectorXd::Zero(sch.T_cl), plans, planned, true);
  }

  for (const auto& c : topology_.clusters) {
    if (!c.active) continue;
    const double c_avg = average_bid(bids_[c.id], t_, sch);
    ledger_.accumulate(c.id, c_avg);
    game.c_avg[c.id] = c_avg;
  }
  results_.games.push_back(std::move(game));
}

void Simulation::interim(const ClusterDef& c, Horizon hz, const Eigen::VectorXd& P, std::vector<HubPlan>& plans,
                         std::vector<char>& planned, bool record) {
  const auto idx = members(c);
  ClusterContext ctx;
  for (std::size_t i : idx) ctx.members.push_back({&hubs_[i], states_[i], 0.0});
  ctx.tariffs = &tariffs_;
  ctx.horizon = hz;
  ctx.params = scenario_.consensus;
  ClusterSolver solver(std::move(ctx), InterimMode{P});

  ConsensusState state;
  auto it = interim_.find(c.id);
  if (it != interim_.end())
    state = remap_state(it->second, c.hubs, t_ - interim_time_[c.id], hz.length, false);
  else
    state = make_consensus_state(c.hubs, hz.length, false, scenario_.consensus.rho0);
  const ClusterRun run = solver.run(state);
  interim_[c.id] = std::move(state);
  interim_time_[c.id] = t_;
  interim_converged_[c.id] = run.converged;
  if (record && !run.converged) {
    ++results_.interim_limit_hits;
    log_msg(1, "t=%ld cluster %s: interim consensus hit the iteration limit", static_cast<long>(t_), c.id.c_str());
  }
  for (std::size_t k = 0; k < idx.size(); ++k) {
    plans[idx[k]] = run.plans[k];
    planned[idx[k]] = 1;
  }
}

void Simulation::centralized_step(std::vector<HubPlan>& plans, std::vector<std::string>& cluster_of) {
  std::vector<CentralizedMember> cm;
  for (std::size_t i = 0; i < hubs_.size(); ++i) {
    CentralizedMember m;
    m.hub = &hubs_[i];
    m.x0 = states_[i];
    m.trades_electricity = false;
    m.heat_group = -1;
    cm.push_back(std::move(m));
  }
  for (std::size_t m = 0; m < topology_.clusters.size(); ++m) {
    const auto& c = topology_.clusters[m];
    if (!c.active) continue;
    for (std::size_t i : members(c)) {
      cm[i].trades_electricity = hubs_[i].p_bid_cap > 0.0;
      cm[i].heat_group = static_cast<int>(m);
      cluster_of[i] = c.id;
    }
  }
  // The network optimum always looks a full bargaining horizon ahead.
  const BaselineResult r =
      solve_centralized(cm, {t_, scenario_.schedule.T_cl}, tariffs_, scenario_.consensus.solver);
  plans = r.plans;
}

void Simulation::apply(const std::vector<HubPlan>& plans, const std::vector<std::string>& cluster_of) {
  const std::size_t N = hubs_.size();
  std::vector<double> mismatch(N, 0.0);

  if (controller_ == Controller::clustered) {
    struct Flow {
      std::string id;
      std::vector<std::size_t> idx;
      double P = 0.0;
      double planned = 0.0;
      double heat = 0.0;
      double extra = 0.0;  // share of the market residual
    };
    std::vector<Flow> flows;
    double residual = 0.0, pos = 0.0, neg = 0.0;
    for (const auto& c : topology_.clusters) {
      if (!c.active) continue;
      Flow f;
      f.id = c.id;
      f.idx = members(c);
      f.P = obligation(c.id, t_, 1)[0];
      for (std::size_t i : f.idx) {
        f.planned += plans[i].p_bid(0);
        f.heat += plans[i].q_bid(0);
      }
      residual += f.P;
      if (f.P > 0.0) pos += f.P;
      if (f.P < 0.0) neg -= f.P;
      flows.push_back(std::move(f));
    }
    // Importers lack what exporters did not deliver, or exporters sell the excess.
    for (auto& f : flows) {
      if (residual > 0.0 && f.P > 0.0) f.extra = residual * f.P / pos;
      if (residual < 0.0 && f.P < 0.0) f.extra = residual * (-f.P) / neg;
    }
    const double buy = tariffs_.elec_buy[t_];
    const double sell = tariffs_.elec_feedin[t_];
    const double gas = tariffs_.gas[t_];
    for (const auto& f : flows) {
      MismatchRecord rec;
      rec.t = t_;
      rec.cluster = f.id;
      rec.obligation = f.P;
      rec.planned = f.planned;
      rec.elec_delta = (f.planned - f.P) + f.extra;
      rec.elec_cost = rec.elec_delta > 0.0 ? rec.elec_delta * buy : rec.elec_delta * sell;
      if (f.heat > 0.0) {
        rec.heat_shortage = f.heat;
        rec.heat_cost = f.heat * gas / kBackupHeatEfficiency;
      } else {
        rec.heat_waste = -f.heat;
      }
      auto cv = interim_converged_.find(f.id);
      rec.converged = cv == interim_converged_.end() || cv->second;

      std::vector<double> pw, qw;
      for (std::size_t i : f.idx) {
        pw.push_back(plans[i].p_bid(0));
        qw.push_back(std::max(0.0, plans[i].q_bid(0)));
      }
      const auto es = split(rec.elec_cost, pw);
      const auto hs = split(rec.heat_cost, qw);
      for (std::size_t k = 0; k < f.idx.size(); ++k) mismatch[f.idx[k]] += es[k] + hs[k];
      if (std::abs(rec.elec_delta) > 1e-6 || rec.heat_shortage > 1e-6 || rec.heat_waste > 1e-6 || !rec.converged)
        results_.mismatch.push_back(rec);
    }
    interim_converged_.clear();
  }

  for (std::size_t i = 0; i < N; ++i) {
    const HubPlan& plan = plans[i];
    const double step_cost = realized_step_cost(plan, 0, tariffs_);
    double dec_cost = step_cost;
    if (controller_ == Controller::decentralized) {
      shadow_[i] = first_step_states(plan);
    } else {
      const BaselineResult dec =
          solve_decentralized(hubs_[i], horizon_at(t_), shadow_[i], tariffs_, scenario_.consensus.solver);
      dec_cost = realized_step_cost(dec.plans.front(), 0, tariffs_);
      shadow_[i] = first_step_states(dec.plans.front());
    }
    states_[i] = first_step_states(plan);
    const double cost = step_cost + mismatch[i];
    totals_[i].J_grid += cost;
    totals_[i].J_dec += dec_cost;

    if (controller_ == Controller::clustered) {
      if (!cluster_of[i].empty()) {
        auto& acct = ledger_.cluster(cluster_of[i]).account(hubs_[i].id);
        acct.J_grid_in += cost;
        acct.J_dec_in += dec_cost;
      } else if (!left_cluster_[i].empty()) {
        ledger_.cluster(left_cluster_[i]).account(hubs_[i].id).J_dec_out += dec_cost;
      }
    }

    StepRecord rec;
    rec.t = t_;
    rec.hub = hubs_[i].id;
    rec.cluster = cluster_of[i];
    rec.e_out = plan.e_out[0];
    rec.e_in = plan.e_in[0];
    rec.gas = plan.gas[0];
    rec.p_bid = plan.p_bid(0);
    rec.q_bid = plan.q_bid(0);
    rec.grid_cost = step_cost;
    rec.mismatch_cost = mismatch[i];
    rec.dec_cost = dec_cost;
    results_.timeseries.push_back(rec);
    for (std::size_t n = 0; n < hubs_[i].devices.size(); ++n) {
      DeviceRecord d;
      d.t = t_;
      d.hub = hubs_[i].id;
      d.device = hubs_[i].devices[n].name;
      d.u = plan.u[n][0];
      d.state = plan.x[n][0].size() > 0 ? plan.x[n][0][0] : 0.0;
      results_.devices.push_back(d);
    }
  }
}

void Simulation::settle_window() {
  for (auto& [id, ledger] : ledger_.clusters) {
    if (ledger.hubs.empty()) {
      if (std::abs(ledger.C_bar) > 0.0)
        log_msg(1, "cluster %s: %.6f CHF accumulated without members to settle", id.c_str(), ledger.C_bar);
      continue;
    }
    ClusterSettlement s = settle(ledger, scenario_.settlement);
    s.window_start = ledger_.window_start;
    s.window_end = t_;
    for (const auto& h : s.hubs) {
      auto& tot = totals_[hub_index(h.hub)];
      tot.c_bid += h.c_bid;
      tot.c_pen += h.c_pen;
    }
    if (s.beta_positive) log_msg(1, "cluster %s: positive beta %.6f in window ending %ld", id.c_str(), s.beta,
                                 static_cast<long>(t_));
    results_.settlements.push_back(std::move(s));
  }
  ledger_.reset(t_);
  for (auto& l : left_cluster_) l.clear();
}

ResultSet Simulation::finish() {
  if (controller_ == Controller::clustered && t_ > ledger_.window_start) settle_window();
  results_.hubs = totals_;
  return results_;
}

ResultSet run_simulation(const Scenario& scenario, Controller controller) {
  Simulation sim(scenario, controller);
  while (!sim.done()) {
    log_msg(2, "t=%ld", static_cast<long>(sim.time()));
    sim.step();
  }
  return sim.finish();
}

}  // namespace ehub
