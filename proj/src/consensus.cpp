#include "ehub/consensus.hpp"

#include "ehub/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ehub {

namespace {

ConsensusLayout cluster_layout(std::size_t hubs, Index block) {
  ConsensusLayout layout;
  layout.global_size = static_cast<Index>(hubs) * block;
  std::vector<Index> all;
  for (std::size_t i = 0; i < hubs; ++i) {
    std::vector<Index> idx;
    for (Index k = 0; k < block; ++k) idx.push_back(static_cast<Index>(i) * block + k);
    all.insert(all.end(), idx.begin(), idx.end());
    layout.agent_indices.push_back(std::move(idx));
  }
  layout.agent_indices.push_back(std::move(all));
  return layout;
}

// Copies one hub block between states of different horizons.
void remap_block(const Eigen::VectorXd& src, Index src_T, bool src_dj, Index shift, Eigen::Ref<Eigen::VectorXd> dst,
                 Index T, bool dj) {
  for (Index t = 0; t < T; ++t) {
    const Index s = std::min(t + shift, src_T - 1);
    dst[t] = s >= 0 ? src[s] : 0.0;
    dst[T + t] = s >= 0 ? src[src_T + s] : 0.0;
  }
  if (dj) dst[2 * T] = src_dj ? src[2 * src_T] : 0.0;
}

}  // namespace

ConsensusState make_consensus_state(std::vector<std::string> hub_ids, Index T, bool with_dj, double rho0) {
  if (T <= 0) throw ValidationError("consensus horizon must be positive");
  ConsensusState s;
  s.hub_ids = std::move(hub_ids);
  s.T = T;
  s.with_dj = with_dj;
  s.layout = cluster_layout(s.hub_ids.size(), s.block());
  s.iterate.reset(s.layout, rho0);
  return s;
}

ConsensusState remap_state(const ConsensusState& src, const std::vector<std::string>& hub_ids, Index shift, Index T,
                           bool with_dj) {
  ConsensusState out = make_consensus_state(hub_ids, T, with_dj, src.iterate.rho);
  out.rounds = src.rounds;
  out.converged = false;
  const Index nb = out.block();
  const Index sb = src.block();
  const std::size_t coord = out.hubs();
  const std::size_t src_coord = src.hubs();
  for (std::size_t i = 0; i < out.hubs(); ++i) {
    auto it = std::find(src.hub_ids.begin(), src.hub_ids.end(), hub_ids[i]);
    if (it == src.hub_ids.end()) continue;
    const auto j = static_cast<std::size_t>(it - src.hub_ids.begin());
    const Index oi = static_cast<Index>(i) * nb;
    const Index sj = static_cast<Index>(j) * sb;
    remap_block(src.iterate.z.segment(sj, sb), src.T, src.with_dj, shift, out.iterate.z.segment(oi, nb), T, with_dj);
    remap_block(src.iterate.copies[j], src.T, src.with_dj, shift, out.iterate.copies[i], T, with_dj);
    remap_block(src.iterate.duals[j], src.T, src.with_dj, shift, out.iterate.duals[i], T, with_dj);
    remap_block(src.iterate.copies[src_coord].segment(sj, sb), src.T, src.with_dj, shift,
                out.iterate.copies[coord].segment(oi, nb), T, with_dj);
    remap_block(src.iterate.duals[src_coord].segment(sj, sb), src.T, src.with_dj, shift,
                out.iterate.duals[coord].segment(oi, nb), T, with_dj);
  }
  return out;
}

HubAgent make_hub_agent(const ClusterMember& member, const Tariffs& tariffs, Horizon horizon, bool bargaining) {
  if (!member.hub) throw ValidationError("cluster member without hub");
  HubAgent a;
  a.hub = member.hub;
  a.tariffs = &tariffs;
  a.layout = append_feasible_set(a.base, *member.hub, horizon, member.x0, member.hub->p_bid_cap,
                                 member.hub->q_bid_cap);
  const Index T = horizon.length;
  for (Index t = 0; t < T; ++t) a.shared_vars.push_back(a.layout.p_net(t));
  for (Index t = 0; t < T; ++t) a.shared_vars.push_back(a.layout.q_net(t));
  if (bargaining) {
    const Index dj = a.base.add_variable();
    auto row = grid_cost_terms(a.layout, tariffs);
    row.push_back({dj, 1.0});
    a.base.add_equality(std::move(row), member.J_dec);
    a.shared_vars.push_back(dj);
  } else {
    add_grid_cost(a.base, a.layout, tariffs);
  }
  return a;
}

HubSolution hub_subproblem(HubAgent& agent, const Eigen::VectorXd& z, const Eigen::VectorXd& lambda, double rho,
                           const SolveOptions& options) {
  const auto n = static_cast<Index>(agent.shared_vars.size());
  if (z.size() != n || lambda.size() != n) throw ValidationError("hub subproblem: shared vector size mismatch");
  ConvexSubproblem p = agent.base;
  for (Index k = 0; k < n; ++k) {
    p.add_linear(agent.shared_vars[k], lambda[k]);
    p.add_proximal(agent.shared_vars[k], rho, z[k]);
  }
  SolveReport rep = solve(p, options);
  if (!rep.ok()) {
    SolveOptions retry = options;
    retry.max_iterations = 4 * options.max_iterations;
    rep = solve(p, retry);
  }
  if (!rep.ok())
    throw InfeasibleError("hub '" + agent.hub->id + "': subproblem " + to_string(rep.status));
  HubSolution out;
  out.plan = extract_plan(agent.layout, rep.x);
  out.shared.resize(n);
  for (Index k = 0; k < n; ++k) out.shared[k] = rep.x[agent.shared_vars[k]];
  out.grid_cost = grid_cost(out.plan, *agent.tariffs);
  out.x = rep.x;
  agent.last_x = rep.x;
  return out;
}

CoordinatorSolution coordinator_subproblem(std::size_t hubs, Index T, const Eigen::VectorXd& z,
                                           const Eigen::VectorXd& lambda, double rho, const ClusterProblemMode& mode,
                                           const SolveOptions& options) {
  const bool bargaining = std::holds_alternative<BargainingMode>(mode);
  const Index b = 2 * T + (bargaining ? 1 : 0);
  const auto N = static_cast<Index>(hubs);
  if (z.size() != N * b || lambda.size() != N * b) throw ValidationError("coordinator: shared vector size mismatch");
  if (!(rho > 0.0)) throw ValidationError("coordinator: rho must be positive");
  CoordinatorSolution out;

  if (!bargaining) {
    const auto& P = std::get<InterimMode>(mode).P;
    if (P.size() < T) throw ValidationError("interim trade profile shorter than horizon");
    if (N == 0) {
      if (P.head(T).cwiseAbs().maxCoeff() > 0.0) throw TopologyError("fixed cluster trade without hubs");
      out.copies.resize(0);
      out.P = P.head(T);
      return out;
    }
    // Euclidean projection of z - lambda/rho onto the cluster-sum planes.
    out.copies = z - lambda / rho;
    for (Index t = 0; t < T; ++t) {
      double sp = 0.0, sq = 0.0;
      for (Index i = 0; i < N; ++i) {
        sp += out.copies[i * b + t];
        sq += out.copies[i * b + T + t];
      }
      const double np = (sp - P[t]) / static_cast<double>(N);
      const double nq = sq / static_cast<double>(N);
      for (Index i = 0; i < N; ++i) {
        out.copies[i * b + t] -= np;
        out.copies[i * b + T + t] -= nq;
      }
    }
    out.P = P.head(T);
    return out;
  }

  const auto& bm = std::get<BargainingMode>(mode);
  if (bm.z.size() != T + 1) throw ValidationError("coordinator: bargaining z has wrong size");
  if (N == 0) throw TopologyError("bargaining cluster without hubs");
  ConvexSubproblem p(N * b);
  const Index Pv = p.add_variables(T);
  const Index Cv = p.add_variable();
  const Index Dv = p.add_variable();
  for (Index k = 0; k < N * b; ++k) {
    p.add_linear(k, lambda[k]);
    p.add_proximal(k, rho, z[k]);
  }
  if (bm.count <= 0) {
    for (Index t = 0; t < T; ++t) p.set_bounds(Pv + t, 0.0, 0.0);
    p.set_bounds(Cv, 0.0, 0.0);
  } else {
    const double w = 1.0 / (2.0 * bm.mu * bm.count);  // 1/(4 mu N) * ||.||^2 == w/2 * ||.||^2
    for (Index t = 0; t < T; ++t) p.add_proximal(Pv + t, w, -bm.z[t]);
    p.add_proximal(Cv, w, -bm.z[T]);
  }
  p.add_log_term({bm.alpha, {{Dv, 1.0}, {Cv, -1.0}}, 0.0, bm.eps_log});
  for (Index t = 0; t < T; ++t) {
    std::vector<Term> rp{{Pv + t, -1.0}};
    std::vector<Term> rq;
    for (Index i = 0; i < N; ++i) {
      rp.push_back({i * b + t, 1.0});
      rq.push_back({i * b + T + t, 1.0});
    }
    p.add_equality(std::move(rp), 0.0);
    p.add_equality(std::move(rq), 0.0);
  }
  std::vector<Term> rj{{Dv, -1.0}};
  for (Index i = 0; i < N; ++i) rj.push_back({i * b + 2 * T, 1.0});
  p.add_equality(std::move(rj), 0.0);

  SolveReport rep = solve(p, options);
  if (!rep.ok()) {
    SolveOptions retry = options;
    retry.max_iterations = 4 * options.max_iterations;
    rep = solve(p, retry);
  }
  if (!rep.ok()) throw InfeasibleError("cluster coordinator: subproblem " + to_string(rep.status));
  out.copies = rep.x.head(N * b);
  out.P = rep.x.segment(Pv, T);
  out.C = rep.x[Cv];
  out.dJ = rep.x[Dv];
  return out;
}

ClusterSolver::ClusterSolver(ClusterContext context, ClusterProblemMode mode)
    : ctx_(std::move(context)), mode_(std::move(mode)) {
  if (!ctx_.tariffs) throw ValidationError("cluster context without tariffs");
  const bool bargaining = std::holds_alternative<BargainingMode>(mode_);
  for (const auto& m : ctx_.members) agents_.push_back(make_hub_agent(m, *ctx_.tariffs, ctx_.horizon, bargaining));
  last_.plans.resize(agents_.size());
  last_.grid_costs.assign(agents_.size(), 0.0);
}

ConsensusSettings ClusterSolver::settings() const {
  ConsensusSettings s;
  s.eps_primal = ctx_.params.eps_primal;
  s.eps_dual = ctx_.params.eps_dual;
  s.max_iterations = ctx_.params.max_iterations;
  s.rho_growth = ctx_.params.rho_growth;
  s.rho_max = ctx_.params.rho_max;
  s.workers = ctx_.params.workers;
  return s;
}

void ClusterSolver::round(ConsensusState& state) {
  const bool bargaining = std::holds_alternative<BargainingMode>(mode_);
  if (state.hubs() != agents_.size() || state.T != ctx_.horizon.length || state.with_dj != bargaining)
    throw ValidationError("consensus state does not match the cluster problem");
  const std::size_t N = agents_.size();
  auto solve_agent = [&](std::size_t a, const Eigen::VectorXd& z, const Eigen::VectorXd& lam,
                         double rho) -> Eigen::VectorXd {
    if (a < N) {
      HubSolution h = hub_subproblem(agents_[a], z, lam, rho, ctx_.params.solver);
      last_.plans[a] = std::move(h.plan);
      last_.grid_costs[a] = h.grid_cost;
      return h.shared;
    }
    last_.coordinator = coordinator_subproblem(N, state.T, z, lam, rho, mode_, ctx_.params.solver);
    return last_.coordinator.copies;
  };
  consensus_round(state.layout, state.iterate, solve_agent, settings());
  ++state.rounds;
}

ClusterRun ClusterSolver::run(ConsensusState& state) {
  if (!ctx_.params.rho_carry) state.iterate.rho = ctx_.params.rho0;
  const ConsensusSettings s = settings();
  int it = 0;
  bool ok = false;
  while (it < s.max_iterations) {
    round(state);
    ++it;
    if (state.iterate.primal_sq <= s.eps_primal && state.iterate.dual_sq <= s.eps_dual) {
      ok = true;
      break;
    }
  }
  state.iterate.iterations = it;
  state.converged = ok;
  last_.converged = ok;
  last_.iterations = it;
  return last_;
}

void consensus_round(ClusterSolver& solver, ConsensusState& state) { solver.round(state); }

ClusterRun run_consensus(ClusterSolver& solver, ConsensusState& state) { return solver.run(state); }

}  // namespace ehub
