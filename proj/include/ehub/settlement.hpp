#pragma once

// Distribution of a cluster's accumulated trading cost among its hubs so that
// every hub sees the same relative benefit, with a penalty variant for hubs
// that left the cluster during the window.

#include "ehub/hub_model.hpp"

#include <map>
#include <string>
#include <vector>

namespace ehub {

struct HubAccount {
  std::string hub;
  double J_grid_in = 0.0;  // realized cost while a member
  double J_dec_in = 0.0;   // shadow decentralized cost while a member
  double J_dec_out = 0.0;  // shadow decentralized cost after leaving, same window
  bool left = false;
};

struct ClusterLedger {
  std::string cluster;
  double C_bar = 0.0;
  std::vector<HubAccount> hubs;  // in insertion order

  HubAccount& account(const std::string& hub);
  const HubAccount* find(const std::string& hub) const;
  bool any_departure() const;
};

struct SettlementParams {
  double W = 1e-3;  // penalty regularization, 1/CHF^2
  double beta_max = 0.0;
};

struct HubSettlement {
  std::string hub;
  double J_grid_in = 0.0;
  double J_dec_in = 0.0;
  double J_dec_out = 0.0;
  double c_bid = 0.0;
  double c_pen = 0.0;
  double beta = 0.0;  // (J_grid_in + c_bid - J_dec_in) / J_dec_in
};

struct ClusterSettlement {
  std::string cluster;
  Index window_start = 0;
  Index window_end = 0;
  double C_bar = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool pnp = false;
  bool beta_positive = false;  // trading lost money in this window
  std::vector<HubSettlement> hubs;
};

/// beta = (C + sum J_grid - sum J_dec) / sum J_dec;  c_i = (1 + beta) J_dec_i - J_grid_i.
ClusterSettlement distribute_costs(const ClusterLedger& ledger);

/// min beta + W gamma^2 subject to sum c + gamma = C, beta <= beta_max; the
/// penalty gamma is split over leavers pro rata to J_dec_out.
ClusterSettlement distribute_costs_pnp(const ClusterLedger& ledger, const SettlementParams& params);

/// Picks the variant: the penalty form only when some hub left.
ClusterSettlement settle(const ClusterLedger& ledger, const SettlementParams& params);

struct SettlementLedger {
  std::map<std::string, ClusterLedger> clusters;
  Index window_start = 0;

  ClusterLedger& cluster(const std::string& id);
  void accumulate(const std::string& cluster_id, double c_avg);
  /// Zeroes every accumulator and account and opens a new window at t.
  void reset(Index t);
};

}  // namespace ehub
