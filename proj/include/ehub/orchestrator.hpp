#pragma once

// Receding-horizon driver: bargaining every t_rh steps over T_cl, interim
// consensus under fixed cluster trades in between, settlement every t_f steps.

#include "ehub/bargaining.hpp"
#include "ehub/consensus.hpp"
#include "ehub/hub_model.hpp"
#include "ehub/scenario.hpp"
#include "ehub/schedule.hpp"
#include "ehub/settlement.hpp"
#include "ehub/topology.hpp"

#include <map>
#include <string>
#include <vector>

namespace ehub {

enum class Controller { clustered, centralized, decentralized };

std::string to_string(Controller c);
Controller parse_controller(const std::string& s);

struct StepRecord {
  Index t = 0;
  std::string hub;
  std::string cluster;  // empty while the hub operates alone
  double e_out = 0.0;
  double e_in = 0.0;
  double gas = 0.0;
  double p_bid = 0.0;
  double q_bid = 0.0;
  double grid_cost = 0.0;      // planned step cost
  double mismatch_cost = 0.0;  // share of the grid-absorbed mismatch
  double dec_cost = 0.0;       // shadow decentralized step cost
};

struct DeviceRecord {
  Index t = 0;
  std::string hub;
  std::string device;
  ChannelVector u = ChannelVector::Zero();
  double state = 0.0;  // first state component after the step, 0 for stateless devices
};

struct MismatchRecord {
  Index t = 0;
  std::string cluster;
  double obligation = 0.0;  // fixed cluster trade P*
  double planned = 0.0;     // sum of hub trades
  double elec_delta = 0.0;  // bought (+) or sold (-) at the grid, cluster plus market share
  double elec_cost = 0.0;
  double heat_shortage = 0.0;
  double heat_cost = 0.0;
  double heat_waste = 0.0;
  bool converged = true;  // interim consensus reached tolerance
};

struct GameRecord {
  Index t = 0;
  std::vector<std::string> participants;
  bool converged = false;
  bool fallback = false;
  int iterations = 0;
  std::vector<ClusterBid> bids;
  std::map<std::string, double> c_avg;  // per active cluster
};

struct TraceRecord {
  Index game_t = 0;
  TraceRow row;
};

struct HubTotals {
  std::string hub;
  double J_grid = 0.0;  // realized, mismatch included
  double J_dec = 0.0;   // shadow decentralized
  double c_bid = 0.0;
  double c_pen = 0.0;
};

struct ResultSet {
  std::string scenario;
  std::uint64_t seed = 0;
  Controller controller = Controller::clustered;
  Index duration = 0;
  std::vector<StepRecord> timeseries;
  std::vector<DeviceRecord> devices;
  std::vector<TraceRecord> trace;
  std::vector<GameRecord> games;
  std::vector<ClusterSettlement> settlements;
  std::vector<MismatchRecord> mismatch;
  std::vector<TopologyEvent> events;
  std::vector<HubTotals> hubs;  // scenario order
  int fallbacks = 0;
  int interim_limit_hits = 0;

  double total_grid() const;
  double total_dec() const;
  const HubTotals& hub(const std::string& id) const;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, Controller controller = Controller::clustered);

  Index time() const { return t_; }
  bool done() const { return t_ >= scenario_.duration; }

  /// Settlement due at t and topology events. Solves nothing.
  void begin_step();
  /// Plans, applies the first inputs, accounts costs, advances the clock.
  void finish_step();
  void step();

  /// Settles the open window and returns everything recorded.
  ResultSet finish();

  const NetworkTopology& topology() const { return topology_; }
  const std::map<std::string, ConsensusState>& interim_states() const { return interim_; }
  const std::vector<HubSpec>& hubs() const { return hubs_; }
  const Tariffs& tariffs() const { return tariffs_; }

 private:
  struct Obligation {
    Index start = 0;
    Eigen::VectorXd P;
  };
  struct InterimCache {
    ConsensusState state;
    Index solved_at = 0;
  };

  std::size_t hub_index(const std::string& id) const;
  std::vector<std::size_t> members(const ClusterDef& c) const;
  Horizon horizon_at(Index t) const;
  Eigen::VectorXd obligation(const std::string& cluster, Index t, Index length) const;

  void settle_window();
  void clustered_step(std::vector<HubPlan>& plans, std::vector<std::string>& cluster_of);
  void run_game(std::vector<HubPlan>& plans, std::vector<char>& planned);
  void interim(const ClusterDef& c, Horizon hz, const Eigen::VectorXd& P, std::vector<HubPlan>& plans,
               std::vector<char>& planned, bool record);
  void centralized_step(std::vector<HubPlan>& plans, std::vector<std::string>& cluster_of);
  void apply(const std::vector<HubPlan>& plans, const std::vector<std::string>& cluster_of);

  Scenario scenario_;
  Controller controller_;
  std::vector<HubSpec> hubs_;
  Tariffs tariffs_;
  NetworkTopology topology_;
  BargainingParams bargaining_;
  Index t_ = 0;
  bool began_ = false;
  bool reweight_due_ = true;

  std::vector<std::vector<Eigen::VectorXd>> states_;
  std::vector<std::vector<Eigen::VectorXd>> shadow_;
  std::vector<HubTotals> totals_;
  std::vector<std::string> left_cluster_;  // cluster a hub left during the open window

  SettlementLedger ledger_;
  std::map<std::string, BidHistory> bids_;
  std::map<std::string, Obligation> obligations_;
  std::map<std::string, ConsensusState> interim_;
  std::map<std::string, Index> interim_time_;
  BargainingWarmStart warm_;
  std::vector<std::string> warm_ids_;
  Index warm_time_ = 0;
  std::map<std::string, bool> interim_converged_;

  ResultSet results_;
};

/// Runs the whole scenario with one controller.
ResultSet run_simulation(const Scenario& scenario, Controller controller = Controller::clustered);

}  // namespace ehub
