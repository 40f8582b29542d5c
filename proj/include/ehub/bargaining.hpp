#pragma once

// Inter-cluster bargaining by dual consensus ADMM. Each coordinator holds a
// dual estimate y_m of the prices on [P; C]; the inner consensus loop solves
// its cluster problem for the current global trade value z_m.

#include "ehub/consensus.hpp"
#include "ehub/hub_model.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace ehub {

struct BargainingParams {
  double sigma_primal = 0.003;
  double sigma_dual = 0.003;
  int max_iterations = 200;
  double mu0 = 2000.0;
  double mu_decay = 0.03;
  double mu_floor_fraction = 0.01;
  double eps_log_relative = 1e-6;
  bool normalize_weights = true;  // divide alpha by its mean; the bargaining solution is unchanged
  ConsensusParams consensus;
};

struct ClusterBid {
  std::string cluster;
  Eigen::VectorXd P;
  double C = 0.0;
  double dJ = 0.0;
  double alpha = 1.0;

  double surplus() const { return dJ - C; }
};

struct DualAdmmState {
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::VectorXd> d;
  std::vector<Eigen::VectorXd> z;
  std::vector<std::vector<int>> neighbors;
  double mu = 2000.0;
  int iteration = 0;
  std::vector<double> r_norm;
  std::vector<double> s_norm;

  std::size_t clusters() const { return y.size(); }
};

/// Complete graph on M clusters.
std::vector<std::vector<int>> complete_graph(int M);

DualAdmmState make_dual_state(int M, Index T, double mu0, std::vector<std::vector<int>> neighbors = {});

struct OuterUpdate {
  Eigen::VectorXd d;
  Eigen::VectorXd z;
};

/// d' = d + mu sum_n (y_m - y_n);  z' = mu sum_n (y_m + y_n) - d'.
OuterUpdate outer_update(const Eigen::VectorXd& y_m, const Eigen::VectorXd& d_m,
                         const std::vector<Eigen::VectorXd>& neighbor_y, double mu);
OuterUpdate outer_update(const DualAdmmState& state, int m);

/// y' = ([P; C] + z) / (2 mu count).
Eigen::VectorXd dual_recovery(const Eigen::VectorXd& P, double C, const Eigen::VectorXd& z, double mu, int count);

struct BargainingResiduals {
  std::vector<double> r;  // ||r_m||
  std::vector<double> s;  // ||s_m||
  bool converged = false;
};

/// r_m = 1/2 [(y_m - y_n)]_n and s_m = mu/2 [(dy_m + dy_n)]_n, on the new duals.
BargainingResiduals bargaining_residuals(const std::vector<Eigen::VectorXd>& y_prev,
                                         const std::vector<Eigen::VectorXd>& y_next,
                                         const std::vector<std::vector<int>>& neighbors, double mu, double sigma_primal,
                                         double sigma_dual);

struct Welfare {
  double wf = 0.0;     // prod surplus^alpha
  double j_nbg = 0.0;  // -sum alpha ln surplus
};

Welfare welfare(const std::vector<ClusterBid>& bids);

struct BargainingCluster {
  std::string id;
  double alpha = 1.0;
  std::vector<ClusterMember> members;
};

struct TraceRow {
  int iteration = 0;
  std::string cluster;
  double mu = 0.0;
  double P_total = 0.0;  // sum over the horizon of P_m
  double C = 0.0;
  double dJ = 0.0;
  double y_norm = 0.0;
  double r_norm = 0.0;
  double s_norm = 0.0;
  double max_abs_sum_P = 0.0;  // network: max_t |sum_m P_m(t)|
  double sum_C = 0.0;
  int inner_iterations = 0;
  bool inner_converged = false;
};

struct BargainingWarmStart {
  DualAdmmState duals;
  std::vector<ConsensusState> inner;
  bool valid = false;
};

struct BargainingResult {
  bool converged = false;
  bool fallback = false;
  int iterations = 0;
  std::vector<ClusterBid> bids;
  std::vector<std::vector<HubPlan>> plans;  // [cluster][hub], hubs' local plans
  std::vector<std::vector<double>> grid_costs;
  std::vector<ConsensusState> inner;
  DualAdmmState duals;
  std::vector<TraceRow> trace;
};

/// Runs the game over `horizon`. Every member must carry J_dec for that horizon.
/// A warm start with matching cluster count seeds duals and inner states.
BargainingResult run_bargaining(const std::vector<BargainingCluster>& clusters, const Tariffs& tariffs,
                                Horizon horizon, const BargainingParams& params,
                                const BargainingWarmStart* warm = nullptr);

}  // namespace ehub
