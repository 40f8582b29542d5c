#include "ehub/bargaining.hpp"

#include "ehub/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ehub {

std::vector<std::vector<int>> complete_graph(int M) {
  std::vector<std::vector<int>> g(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n)
      if (n != m) g[static_cast<std::size_t>(m)].push_back(n);
  return g;
}

DualAdmmState make_dual_state(int M, Index T, double mu0, std::vector<std::vector<int>> neighbors) {
  if (!(mu0 > 0.0)) throw ValidationError("mu must be positive");
  DualAdmmState s;
  s.neighbors = neighbors.empty() ? complete_graph(M) : std::move(neighbors);
  if (static_cast<int>(s.neighbors.size()) != M) throw ValidationError("neighbour list size mismatch");
  for (int m = 0; m < M; ++m)
    for (int n : s.neighbors[static_cast<std::size_t>(m)]) {
      if (n < 0 || n >= M || n == m) throw ValidationError("bad neighbour index");
      const auto& back = s.neighbors[static_cast<std::size_t>(n)];
      if (std::find(back.begin(), back.end(), m) == back.end())
        throw ValidationError("neighbour graph is not symmetric");
    }
  s.y.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(T + 1));
  s.d = s.y;
  s.z = s.y;
  s.mu = mu0;
  s.r_norm.assign(static_cast<std::size_t>(M), 0.0);
  s.s_norm.assign(static_cast<std::size_t>(M), 0.0);
  return s;
}

OuterUpdate outer_update(const Eigen::VectorXd& y_m, const Eigen::VectorXd& d_m,
                         const std::vector<Eigen::VectorXd>& neighbor_y, double mu) {
  OuterUpdate out;
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(y_m.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(y_m.size());
  for (const auto& yn : neighbor_y) {
    if (yn.size() != y_m.size()) throw ProtocolError("neighbour dual has wrong dimension");
    diff += y_m - yn;
    sum += y_m + yn;
  }
  out.d = d_m + mu * diff;
  out.z = mu * sum - out.d;
  return out;
}

OuterUpdate outer_update(const DualAdmmState& state, int m) {
  const auto& nb = state.neighbors.at(static_cast<std::size_t>(m));
  std::vector<Eigen::VectorXd> ys;
  for (int n : nb) {
    if (n < 0 || static_cast<std::size_t>(n) >= state.y.size()) throw ProtocolError("missing neighbour message");
    ys.push_back(state.y[static_cast<std::size_t>(n)]);
  }
  return outer_update(state.y[static_cast<std::size_t>(m)], state.d[static_cast<std::size_t>(m)], ys, state.mu);
}

Eigen::VectorXd dual_recovery(const Eigen::VectorXd& P, double C, const Eigen::VectorXd& z, double mu, int count) {
  if (z.size() != P.size() + 1) throw ValidationError("dual recovery: dimension mismatch");
  if (count < 1) throw ValidationError("dual recovery: count must be at least 1");
  Eigen::VectorXd x(P.size() + 1);
  x.head(P.size()) = P;
  x[P.size()] = C;
  return (x + z) / (2.0 * mu * count);
}

BargainingResiduals bargaining_residuals(const std::vector<Eigen::VectorXd>& y_prev,
                                         const std::vector<Eigen::VectorXd>& y_next,
                                         const std::vector<std::vector<int>>& neighbors, double mu, double sigma_primal,
                                         double sigma_dual) {
  const std::size_t M = y_next.size();
  if (y_prev.size() != M || neighbors.size() != M) throw ValidationError("residuals: cluster count mismatch");
  BargainingResiduals res;
  res.r.assign(M, 0.0);
  res.s.assign(M, 0.0);
  res.converged = true;
  for (std::size_t m = 0; m < M; ++m) {
    double r2 = 0.0, s2 = 0.0;
    for (int n : neighbors[m]) {
      const auto un = static_cast<std::size_t>(n);
      r2 += (0.5 * (y_next[m] - y_next[un])).squaredNorm();
      s2 += (0.5 * mu * ((y_next[m] - y_prev[m]) + (y_next[un] - y_prev[un]))).squaredNorm();
    }
    res.r[m] = std::sqrt(r2);
    res.s[m] = std::sqrt(s2);
    if (res.r[m] > sigma_primal || res.s[m] > sigma_dual) res.converged = false;
  }
  return res;
}

Welfare welfare(const std::vector<ClusterBid>& bids) {
  Welfare w;
  double log_wf = 0.0;
  for (const auto& b : bids) {
    const double s = b.surplus();
    if (!(s > 0.0)) throw ValidationError("welfare undefined: nonpositive surplus for cluster '" + b.cluster + "'");
    log_wf += b.alpha * std::log(s);
  }
  w.j_nbg = -log_wf;
  w.wf = std::exp(log_wf);
  return w;
}

BargainingResult run_bargaining(const std::vector<BargainingCluster>& clusters, const Tariffs& tariffs,
                                Horizon horizon, const BargainingParams& params, const BargainingWarmStart* warm) {
  const int M = static_cast<int>(clusters.size());
  const Index T = horizon.length;
  if (M < 1) throw ValidationError("bargaining needs at least one cluster");

  double alpha_scale = 1.0;
  if (params.normalize_weights) {
    double sum = 0.0;
    for (const auto& c : clusters) sum += c.alpha;
    alpha_scale = M / sum;
  }

  BargainingResult result;
  DualAdmmState st;
  std::vector<ConsensusState> inner;
  if (warm && warm->valid && static_cast<int>(warm->duals.clusters()) == M &&
      static_cast<int>(warm->inner.size()) == M) {
    st = warm->duals;
    st.mu = params.mu0;
    st.iteration = 0;
    inner = warm->inner;
  } else {
    st = make_dual_state(M, T, params.mu0);
    for (const auto& c : clusters) {
      std::vector<std::string> ids;
      for (const auto& mb : c.members) ids.push_back(mb.hub->id);
      inner.push_back(make_consensus_state(ids, T, true, params.consensus.rho0));
    }
  }

  std::vector<ClusterSolver> solvers;
  for (int m = 0; m < M; ++m) {
    ClusterContext ctx;
    ctx.members = clusters[static_cast<std::size_t>(m)].members;
    ctx.tariffs = &tariffs;
    ctx.horizon = horizon;
    ctx.params = params.consensus;
    solvers.emplace_back(std::move(ctx), BargainingMode{});
  }

  std::vector<ClusterBid> bids(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    bids[static_cast<std::size_t>(m)].cluster = clusters[static_cast<std::size_t>(m)].id;
    bids[static_cast<std::size_t>(m)].alpha = clusters[static_cast<std::size_t>(m)].alpha;
    bids[static_cast<std::size_t>(m)].P = Eigen::VectorXd::Zero(T);
  }
  std::vector<ClusterRun> runs(static_cast<std::size_t>(M));
  const double mu_floor = params.mu_floor_fraction * params.mu0;

  for (int k = 0; k < params.max_iterations; ++k) {
    std::vector<Eigen::VectorXd> y_next(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
      const auto um = static_cast<std::size_t>(m);
      const OuterUpdate ou = outer_update(st, m);
      st.d[um] = ou.d;
      st.z[um] = ou.z;
      const int count = static_cast<int>(st.neighbors[um].size());
      BargainingMode mode;
      mode.z = ou.z;
      mode.mu = st.mu;
      mode.count = count;
      mode.alpha = clusters[um].alpha * alpha_scale;
      mode.eps_log = params.eps_log_relative * std::max(1.0, std::abs(bids[um].dJ));
      solvers[um].set_mode(mode);
      runs[um] = solvers[um].run(inner[um]);
      const auto& co = runs[um].coordinator;
      bids[um].P = co.P;
      bids[um].C = co.C;
      bids[um].dJ = co.dJ;
      y_next[um] = count > 0 ? dual_recovery(co.P, co.C, ou.z, st.mu, count) : Eigen::VectorXd::Zero(T + 1);
    }
    const BargainingResiduals res =
        bargaining_residuals(st.y, y_next, st.neighbors, st.mu, params.sigma_primal, params.sigma_dual);
    st.y = y_next;
    st.r_norm = res.r;
    st.s_norm = res.s;
    st.iteration = k + 1;

    double max_sum_p = 0.0, sum_c = 0.0;
    for (Index t = 0; t < T; ++t) {
      double s = 0.0;
      for (const auto& b : bids) s += b.P[t];
      max_sum_p = std::max(max_sum_p, std::abs(s));
    }
    for (const auto& b : bids) sum_c += b.C;
    for (int m = 0; m < M; ++m) {
      const auto um = static_cast<std::size_t>(m);
      TraceRow row;
      row.iteration = k + 1;
      row.cluster = clusters[um].id;
      row.mu = st.mu;
      row.P_total = bids[um].P.sum();
      row.C = bids[um].C;
      row.dJ = bids[um].dJ;
      row.y_norm = st.y[um].norm();
      row.r_norm = res.r[um];
      row.s_norm = res.s[um];
      row.max_abs_sum_P = max_sum_p;
      row.sum_C = sum_c;
      row.inner_iterations = runs[um].iterations;
      row.inner_converged = runs[um].converged;
      result.trace.push_back(row);
    }
    result.iterations = k + 1;
    if (res.converged) {
      result.converged = true;
      break;
    }
    st.mu = std::max(st.mu * (1.0 - params.mu_decay), mu_floor);
  }

  result.bids = bids;
  result.duals = st;
  result.inner = inner;
  for (int m = 0; m < M; ++m) {
    result.plans.push_back(runs[static_cast<std::size_t>(m)].plans);
    result.grid_costs.push_back(runs[static_cast<std::size_t>(m)].grid_costs);
  }
  if (!result.converged) {
    result.fallback = true;
    for (auto& b : result.bids) {
      b.P.setZero();
      b.C = 0.0;
    }
  }
  return result;
}

}  // namespace ehub
