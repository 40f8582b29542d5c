#include "ehub/topology.hpp"

#include "ehub/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ehub {

int NetworkTopology::find(const std::string& cluster_id) const {
  for (std::size_t m = 0; m < clusters.size(); ++m)
    if (clusters[m].id == cluster_id) return static_cast<int>(m);
  return -1;
}

int NetworkTopology::cluster_of(const std::string& hub_id) const {
  for (std::size_t m = 0; m < clusters.size(); ++m) {
    const auto& h = clusters[m].hubs;
    if (std::find(h.begin(), h.end(), hub_id) != h.end()) return static_cast<int>(m);
  }
  return -1;
}

std::vector<std::string> NetworkTopology::active_ids() const {
  std::vector<std::string> out;
  for (const auto& c : clusters)
    if (c.active) out.push_back(c.id);
  return out;
}

void NetworkTopology::validate() const {
  std::set<std::string> ids, hubs;
  for (const auto& c : clusters) {
    if (c.id.empty()) throw TopologyError("cluster with empty id");
    if (!ids.insert(c.id).second) throw TopologyError("duplicate cluster id '" + c.id + "'");
    if (c.active && c.hubs.empty()) throw TopologyError("active cluster '" + c.id + "' has no hubs");
    if (c.active && !(c.alpha > 0.0)) throw TopologyError("cluster '" + c.id + "' needs a positive weight");
    for (const auto& h : c.hubs)
      if (!hubs.insert(h).second) throw TopologyError("hub '" + h + "' belongs to more than one cluster");
  }
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::hub_join:
      return "hub_join";
    case EventKind::hub_leave:
      return "hub_leave";
    case EventKind::cluster_join:
      return "cluster_join";
    case EventKind::cluster_leave:
      return "cluster_leave";
  }
  return "?";
}

EventKind parse_event_kind(const std::string& s) {
  if (s == "hub_join") return EventKind::hub_join;
  if (s == "hub_leave") return EventKind::hub_leave;
  if (s == "cluster_join") return EventKind::cluster_join;
  if (s == "cluster_leave") return EventKind::cluster_leave;
  throw ValidationError("unknown event kind '" + s + "'");
}

void validate_event_timing(const TopologyEvent& e, Index t_rh) {
  if (e.time < 0) throw TopologyError("event at negative time");
  const bool cluster_event = e.kind == EventKind::cluster_join || e.kind == EventKind::cluster_leave;
  if (cluster_event && e.time % t_rh != 0)
    throw TopologyError(to_string(e.kind) + " of '" + e.cluster + "' at t=" + std::to_string(e.time) +
                        " is not on a bargaining boundary (multiple of " + std::to_string(t_rh) + ")");
  if (!cluster_event && e.hub.empty()) throw TopologyError(to_string(e.kind) + " without hub id");
  if (e.cluster.empty()) throw TopologyError(to_string(e.kind) + " without cluster id");
}

namespace {

void mark(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

EventOutcome apply_events(NetworkTopology& topology, const std::vector<TopologyEvent>& events, Index t, Index t_rh) {
  EventOutcome out;
  for (const auto& e : events) {
    if (e.time != t) continue;
    validate_event_timing(e, t_rh);
    const int m = topology.find(e.cluster);
    if (m < 0) throw TopologyError("event names unknown cluster '" + e.cluster + "'");
    auto& c = topology.clusters[static_cast<std::size_t>(m)];
    switch (e.kind) {
      case EventKind::hub_join: {
        const int cur = topology.cluster_of(e.hub);
        if (cur >= 0)
          throw TopologyError("hub '" + e.hub + "' already belongs to '" +
                              topology.clusters[static_cast<std::size_t>(cur)].id + "'");
        c.hubs.push_back(e.hub);
        mark(out.hubs_joined, e.hub);
        break;
      }
      case EventKind::hub_leave: {
        auto it = std::find(c.hubs.begin(), c.hubs.end(), e.hub);
        if (it == c.hubs.end()) throw TopologyError("hub '" + e.hub + "' is not in cluster '" + c.id + "'");
        if (c.active && c.hubs.size() == 1)
          throw TopologyError("last hub cannot leave cluster '" + c.id + "'; schedule a cluster_leave instead");
        c.hubs.erase(it);
        mark(out.hubs_left, e.hub);
        break;
      }
      case EventKind::cluster_join:
        if (c.active) throw TopologyError("cluster '" + c.id + "' is already active");
        if (c.hubs.empty()) throw TopologyError("cluster '" + c.id + "' joins without hubs");
        c.active = true;
        mark(out.clusters_joined, c.id);
        break;
      case EventKind::cluster_leave:
        if (!c.active) throw TopologyError("cluster '" + c.id + "' is not active");
        c.active = false;
        mark(out.clusters_left, c.id);
        break;
    }
    mark(out.changed_clusters, c.id);
    out.applied.push_back(e);
    out.reweight = true;
  }
  return out;
}

void reweight(NetworkTopology& topology, const std::map<std::string, double>& annual_demand_kwh) {
  for (auto& c : topology.clusters) {
    if (!c.active) continue;
    if (c.hubs.empty()) throw TopologyError("cluster '" + c.id + "' has no hubs; weight undefined");
    switch (topology.weights) {
      case WeightMode::unit:
        c.alpha = 1.0;
        break;
      case WeightMode::fixed:
        break;
      case WeightMode::demand: {
        double sum = 0.0;
        for (const auto& h : c.hubs) {
          auto it = annual_demand_kwh.find(h);
          if (it == annual_demand_kwh.end() || !(it->second > 0.0))
            throw ValidationError("hub '" + h + "' needs a positive annual demand for weighting");
          sum += it->second;
        }
        c.alpha = std::max(1.0, std::round(sum / 1000.0));
        break;
      }
    }
  }
}

}  // namespace ehub
