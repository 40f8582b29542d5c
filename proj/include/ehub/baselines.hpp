#pragma once

// Single-shot reference problems: isolated hubs (no trading) and the
// network-wide optimum with trade balance constraints.

#include "ehub/hub_model.hpp"
#include "ehub/solver.hpp"

#include <vector>

namespace ehub {

struct BaselineResult {
  std::vector<HubPlan> plans;
  std::vector<double> costs;  // J_dec or J_grid per hub
  double total = 0.0;
  int iterations = 0;
};

/// Isolated dispatch with trade caps forced to zero.
BaselineResult solve_decentralized(const HubSpec& hub, Horizon horizon, const std::vector<Eigen::VectorXd>& x0,
                                   const Tariffs& tariffs, const SolveOptions& options = {});

struct CentralizedMember {
  const HubSpec* hub = nullptr;
  std::vector<Eigen::VectorXd> x0;
  bool trades_electricity = true;
  int heat_group = 0;  // hubs with the same non-negative group may trade heat; -1 disables
};

/// Network optimum: sum of p_bid over electricity traders is zero at every
/// step, and so is the sum of q_bid inside every heat group.
BaselineResult solve_centralized(const std::vector<CentralizedMember>& members, Horizon horizon,
                                 const Tariffs& tariffs, const SolveOptions& options = {});

}  // namespace ehub
