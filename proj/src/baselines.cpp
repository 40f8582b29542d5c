#include "ehub/baselines.hpp"

#include "ehub/errors.hpp"

#include <map>

namespace ehub {

BaselineResult solve_decentralized(const HubSpec& hub, Horizon horizon, const std::vector<Eigen::VectorXd>& x0,
                                   const Tariffs& tariffs, const SolveOptions& options) {
  ConvexSubproblem p;
  const HubLayout L = append_feasible_set(p, hub, horizon, x0, 0.0, 0.0);
  add_grid_cost(p, L, tariffs);
  const SolveReport rep = solve(p, options);
  if (!rep.ok()) throw InfeasibleError("hub '" + hub.id + "': decentralized problem " + to_string(rep.status));
  BaselineResult r;
  r.plans.push_back(extract_plan(L, rep.x));
  r.costs.push_back(grid_cost(r.plans.back(), tariffs));
  r.total = r.costs.back();
  r.iterations = rep.iterations;
  return r;
}

BaselineResult solve_centralized(const std::vector<CentralizedMember>& members, Horizon horizon,
                                 const Tariffs& tariffs, const SolveOptions& options) {
  ConvexSubproblem p;
  std::vector<HubLayout> layouts;
  for (const auto& m : members) {
    if (!m.hub) throw ValidationError("centralized member without hub");
    const double pc = m.trades_electricity ? m.hub->p_bid_cap : 0.0;
    const double qc = m.heat_group >= 0 ? m.hub->q_bid_cap : 0.0;
    layouts.push_back(append_feasible_set(p, *m.hub, horizon, m.x0, pc, qc));
    add_grid_cost(p, layouts.back(), tariffs);
  }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (members[i].heat_group >= 0) groups[members[i].heat_group].push_back(i);
  for (Index t = 0; t < horizon.length; ++t) {
    std::vector<Term> elec;
    for (std::size_t i = 0; i < members.size(); ++i)
      if (members[i].trades_electricity) elec.push_back({layouts[i].p_net(t), 1.0});
    if (!elec.empty()) p.add_equality(std::move(elec), 0.0);
    for (const auto& [g, idx] : groups) {
      std::vector<Term> heat;
      for (auto i : idx) heat.push_back({layouts[i].q_net(t), 1.0});
      p.add_equality(std::move(heat), 0.0);
    }
  }
  const SolveReport rep = solve(p, options);
  if (!rep.ok()) throw InfeasibleError("centralized problem " + to_string(rep.status));
  BaselineResult r;
  for (std::size_t i = 0; i < members.size(); ++i) {
    r.plans.push_back(extract_plan(layouts[i], rep.x));
    r.costs.push_back(grid_cost(r.plans.back(), tariffs));
    r.total += r.costs.back();
  }
  r.iterations = rep.iterations;
  return r;
}

}  // namespace ehub
