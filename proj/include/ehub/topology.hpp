#pragma once

// Cluster membership and scheduled plug-and-play events.

#include "ehub/hub_model.hpp"

#include <map>
#include <string>
#include <vector>

namespace ehub {

struct ClusterDef {
  std::string id;
  std::vector<std::string> hubs;
  double alpha = 1.0;
  bool active = true;  // inactive clusters are defined but not yet part of the network
};

enum class WeightMode { demand, unit, fixed };

struct NetworkTopology {
  std::vector<ClusterDef> clusters;
  WeightMode weights = WeightMode::demand;

  /// Index of the active or inactive cluster with this id, or -1.
  int find(const std::string& cluster_id) const;
  /// Cluster holding the hub, or -1.
  int cluster_of(const std::string& hub_id) const;
  std::vector<std::string> active_ids() const;
  /// Throws TopologyError on duplicate ids or hubs in more than one cluster.
  void validate() const;
};

enum class EventKind { hub_join, hub_leave, cluster_join, cluster_leave };

std::string to_string(EventKind kind);
EventKind parse_event_kind(const std::string& s);

struct TopologyEvent {
  EventKind kind = EventKind::hub_join;
  Index time = 0;
  std::string hub;  // empty for cluster events
  std::string cluster;
};

/// Cluster events must fall on bargaining boundaries.
void validate_event_timing(const TopologyEvent& e, Index t_rh);

struct EventOutcome {
  std::vector<TopologyEvent> applied;
  std::vector<std::string> changed_clusters;  // clusters whose membership or activity changed
  std::vector<std::string> hubs_joined;
  std::vector<std::string> hubs_left;
  std::vector<std::string> clusters_joined;
  std::vector<std::string> clusters_left;
  bool reweight = false;  // weights are due at the next boundary
};

/// Applies every event with time == t, in list order. Only the clusters named
/// by the events change.
EventOutcome apply_events(NetworkTopology& topology, const std::vector<TopologyEvent>& events, Index t, Index t_rh);

/// alpha_m from the annual demand of the members: the sum in MWh rounded to an
/// integer (at least 1). Unit mode sets 1, fixed mode keeps configured values.
void reweight(NetworkTopology& topology, const std::map<std::string, double>& annual_demand_kwh);

}  // namespace ehub
