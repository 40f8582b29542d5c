#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include "ehub/bargaining.hpp"
#include "ehub/baselines.hpp"
#include "ehub/hub_model.hpp"

#include <string>
#include <vector>

namespace ehub::fixtures {

/// Clear-sky half sine between 6 and 18 h, zero at night.
std::vector<double> day_irradiance(Index steps);

HubSpec boiler_hub(const std::string& id, double heat_demand, Index steps);

/// Three complementary single-hub clusters (solar, CHP, heat pump).
std::vector<HubSpec> trio_hubs(Index steps);

/// Nash bargaining game solved as one convex program: hub feasible sets,
/// sum_m P_m = 0, sum_m C_m = 0, maximise sum alpha_m ln(dJ_m - C_m).
struct DirectGame {
  std::vector<Eigen::VectorXd> P;
  std::vector<double> C;
  std::vector<double> dJ;
  double j_nbg = 0.0;
  bool ok = false;

  double surplus(std::size_t m) const { return dJ[m] - C[m]; }
};

DirectGame solve_game_direct(const std::vector<BargainingCluster>& clusters, const Tariffs& tariffs, Horizon horizon);

/// Bargaining clusters with J_dec filled in from the decentralized baseline.
std::vector<BargainingCluster> make_game(const std::vector<std::vector<const HubSpec*>>& clusters,
                                         const std::vector<double>& alpha, const Tariffs& tariffs, Horizon horizon);

/// Dense brute-force QP oracle: enumerates active sets of the inequalities
/// (bounds included). For strictly convex problems with few rows.
struct DenseQp {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
};

Eigen::VectorXd brute_force_qp(const DenseQp& qp, double* objective = nullptr);

}  // namespace ehub::fixtures
