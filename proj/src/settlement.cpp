#include "ehub/settlement.hpp"

#include "ehub/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ehub {

HubAccount& ClusterLedger::account(const std::string& hub) {
  for (auto& a : hubs)
    if (a.hub == hub) return a;
  hubs.push_back({});
  hubs.back().hub = hub;
  return hubs.back();
}

const HubAccount* ClusterLedger::find(const std::string& hub) const {
  for (const auto& a : hubs)
    if (a.hub == hub) return &a;
  return nullptr;
}

bool ClusterLedger::any_departure() const {
  return std::any_of(hubs.begin(), hubs.end(), [](const HubAccount& a) { return a.left; });
}

namespace {

ClusterSettlement start(const ClusterLedger& ledger) {
  ClusterSettlement s;
  s.cluster = ledger.cluster;
  s.C_bar = ledger.C_bar;
  for (const auto& a : ledger.hubs) {
    HubSettlement h;
    h.hub = a.hub;
    h.J_grid_in = a.J_grid_in;
    h.J_dec_in = a.J_dec_in;
    h.J_dec_out = a.J_dec_out;
    s.hubs.push_back(h);
  }
  return s;
}

void finish(ClusterSettlement& s) {
  for (auto& h : s.hubs) h.beta = (h.J_grid_in + h.c_bid - h.J_dec_in) / h.J_dec_in;
  s.beta_positive = s.beta > 0.0;
}

}  // namespace

ClusterSettlement distribute_costs(const ClusterLedger& ledger) {
  if (ledger.hubs.empty()) throw ValidationError("cluster '" + ledger.cluster + "': nothing to settle");
  ClusterSettlement s = start(ledger);
  double sum_dec = 0.0, sum_grid = 0.0;
  for (const auto& h : s.hubs) {
    if (!(h.J_dec_in > 0.0))
      throw ValidationError("cluster '" + ledger.cluster + "': hub '" + h.hub + "' has nonpositive J_dec");
    sum_dec += h.J_dec_in;
    sum_grid += h.J_grid_in;
  }
  s.beta = (ledger.C_bar + sum_grid - sum_dec) / sum_dec;
  for (auto& h : s.hubs) h.c_bid = (1.0 + s.beta) * h.J_dec_in - h.J_grid_in;
  finish(s);
  return s;
}

ClusterSettlement distribute_costs_pnp(const ClusterLedger& ledger, const SettlementParams& params) {
  if (!(params.W > 0.0)) throw ValidationError("settlement: W must be positive");
  double sum_out = 0.0;
  for (const auto& a : ledger.hubs) sum_out += a.J_dec_out;
  // no leaver to charge: gamma is forced to zero
  if (!(sum_out > 0.0)) return distribute_costs(ledger);

  ClusterSettlement s = start(ledger);
  s.pnp = true;
  double sum_dec = 0.0, sum_grid = 0.0;
  for (const auto& h : s.hubs) {
    if (h.J_dec_in < 0.0)
      throw ValidationError("cluster '" + ledger.cluster + "': hub '" + h.hub + "' has negative J_dec_in");
    sum_dec += h.J_dec_in;
    sum_grid += h.J_grid_in;
  }
  if (!(sum_dec > 0.0)) throw ValidationError("cluster '" + ledger.cluster + "': sum of J_dec_in is not positive");

  // beta(gamma) = (C - gamma + sum_grid - sum_dec) / sum_dec is affine and decreasing.
  const double gamma_free = 1.0 / (2.0 * params.W * sum_dec);
  const double gamma_min = ledger.C_bar + sum_grid - sum_dec - params.beta_max * sum_dec;
  s.gamma = std::max(gamma_free, gamma_min);
  s.beta = (ledger.C_bar - s.gamma + sum_grid - sum_dec) / sum_dec;
  for (auto& h : s.hubs) {
    h.c_bid = (1.0 + s.beta) * h.J_dec_in - h.J_grid_in;
    h.c_pen = s.gamma * h.J_dec_out / sum_out;
  }
  for (auto& h : s.hubs)
    h.beta = h.J_dec_in > 0.0 ? (h.J_grid_in + h.c_bid - h.J_dec_in) / h.J_dec_in : s.beta;
  s.beta_positive = s.beta > 0.0;
  return s;
}

ClusterSettlement settle(const ClusterLedger& ledger, const SettlementParams& params) {
  return ledger.any_departure() ? distribute_costs_pnp(ledger, params) : distribute_costs(ledger);
}

ClusterLedger& SettlementLedger::cluster(const std::string& id) {
  auto [it, inserted] = clusters.try_emplace(id);
  if (inserted) it->second.cluster = id;
  return it->second;
}

void SettlementLedger::accumulate(const std::string& cluster_id, double c_avg) { cluster(cluster_id).C_bar += c_avg; }

void SettlementLedger::reset(Index t) {
  for (auto& [id, c] : clusters) {
    c.C_bar = 0.0;
    c.hubs.clear();
  }
  window_start = t;
}

}  // namespace ehub
