#pragma once

// Intra-cluster consensus between a cluster coordinator and its hubs, in
// bargaining mode (coordinator carries the Nash term) or interim mode
// (cluster trade fixed, hubs minimise their grid cost).

#include "ehub/consensus_admm.hpp"
#include "ehub/hub_model.hpp"
#include "ehub/solver.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ehub {

struct ConsensusParams {
  double eps_primal = 0.05;
  double eps_dual = 0.03;
  int max_iterations = 200;
  double rho0 = 1e-3;
  double rho_growth = 1.02;
  double rho_max = 1e6;
  bool rho_carry = false;  // keep rho across runs instead of restarting at rho0
  int workers = 1;
  SolveOptions solver;
};

struct BargainingMode {
  Eigen::VectorXd z;  // [P (T); C]
  double mu = 2000.0;
  int count = 1;  // neighbours in the bargaining graph; 0 pins P = C = 0
  double alpha = 1.0;
  double eps_log = 1e-6;
};

struct InterimMode {
  Eigen::VectorXd P;  // fixed cluster trade over the horizon
};

using ClusterProblemMode = std::variant<BargainingMode, InterimMode>;

/// One hub's data for a horizon.
struct ClusterMember {
  const HubSpec* hub = nullptr;
  std::vector<Eigen::VectorXd> x0;
  double J_dec = 0.0;  // over the same horizon; used in bargaining mode
};

/// Shared variables of a cluster. Per hub the block is [p (T), q (T), dJ (optional)].
/// Agents 0..N-1 are the hubs, agent N is the coordinator.
struct ConsensusState {
  std::vector<std::string> hub_ids;
  Index T = 0;
  bool with_dj = false;
  ConsensusLayout layout;
  ConsensusIterate iterate;
  bool converged = false;
  int rounds = 0;  // total rounds ever run on this state

  Index block() const { return 2 * T + (with_dj ? 1 : 0); }
  std::size_t hubs() const { return hub_ids.size(); }
  Index p_index(std::size_t i, Index t) const { return static_cast<Index>(i) * block() + t; }
  Index q_index(std::size_t i, Index t) const { return static_cast<Index>(i) * block() + T + t; }
  Index dj_index(std::size_t i) const { return static_cast<Index>(i) * block() + 2 * T; }

  double z_p(std::size_t i, Index t) const { return iterate.z[p_index(i, t)]; }
  double z_q(std::size_t i, Index t) const { return iterate.z[q_index(i, t)]; }
  double z_j(std::size_t i) const { return iterate.z[dj_index(i)]; }
  /// Hub i's own copy.
  const Eigen::VectorXd& local(std::size_t i) const { return iterate.copies[i]; }
  /// Coordinator's copy of hub i's block.
  Eigen::VectorXd coordinator_block(std::size_t i) const {
    return iterate.copies.back().segment(static_cast<Index>(i) * block(), block());
  }
};

/// Cold start: z, copies and duals at zero.
ConsensusState make_consensus_state(std::vector<std::string> hub_ids, Index T, bool with_dj, double rho0);

/// Maps a state onto a new horizon: time index t of the result reads t + shift
/// of the source (the last value is held past the end). Hubs are matched by id,
/// new hubs start at zero. dJ entries are kept when both carry them.
ConsensusState remap_state(const ConsensusState& src, const std::vector<std::string>& hub_ids, Index shift,
                           Index T, bool with_dj);

struct HubSolution {
  HubPlan plan;
  Eigen::VectorXd shared;  // the hub's copy
  double grid_cost = 0.0;
  Eigen::VectorXd x;       // raw solution, reusable as warm start
};

/// Prebuilt hub problem for one horizon (feasible set plus mode-dependent fixed parts).
struct HubAgent {
  const HubSpec* hub = nullptr;
  const Tariffs* tariffs = nullptr;
  ConvexSubproblem base;
  HubLayout layout;
  std::vector<Index> shared_vars;
  Eigen::VectorXd last_x;
};

HubAgent make_hub_agent(const ClusterMember& member, const Tariffs& tariffs, Horizon horizon, bool bargaining);

/// Augmented Lagrangian hub problem: bargaining mode ties dJ = J_dec - J_grid(plan);
/// interim mode adds J_grid to the objective.
HubSolution hub_subproblem(HubAgent& agent, const Eigen::VectorXd& z, const Eigen::VectorXd& lambda, double rho,
                           const SolveOptions& options = {});

struct CoordinatorSolution {
  Eigen::VectorXd copies;  // all hub blocks
  Eigen::VectorXd P;
  double C = 0.0;
  double dJ = 0.0;
};

CoordinatorSolution coordinator_subproblem(std::size_t hubs, Index T, const Eigen::VectorXd& z,
                                           const Eigen::VectorXd& lambda, double rho, const ClusterProblemMode& mode,
                                           const SolveOptions& options = {});

/// A cluster's consensus problem over one horizon.
struct ClusterContext {
  std::vector<ClusterMember> members;
  const Tariffs* tariffs = nullptr;
  Horizon horizon;
  ConsensusParams params;
};

struct ClusterRun {
  std::vector<HubPlan> plans;
  std::vector<double> grid_costs;
  CoordinatorSolution coordinator;
  bool converged = false;
  int iterations = 0;
};

/// Reusable solver state for repeated runs on the same horizon.
class ClusterSolver {
 public:
  ClusterSolver(ClusterContext context, ClusterProblemMode mode);

  void set_mode(ClusterProblemMode mode) { mode_ = std::move(mode); }
  const ClusterProblemMode& mode() const { return mode_; }
  const ClusterContext& context() const { return ctx_; }

  /// One ADMM sweep on the state.
  void round(ConsensusState& state);
  /// Runs to tolerance or the iteration limit.
  ClusterRun run(ConsensusState& state);

  const ClusterRun& last() const { return last_; }

 private:
  ConsensusSettings settings() const;
  ClusterContext ctx_;
  ClusterProblemMode mode_;
  std::vector<HubAgent> agents_;
  ClusterRun last_;
};

void consensus_round(ClusterSolver& solver, ConsensusState& state);
ClusterRun run_consensus(ClusterSolver& solver, ConsensusState& state);

}  // namespace ehub
