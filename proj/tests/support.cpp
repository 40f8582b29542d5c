#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

namespace ehub::fixtures {

std::vector<double> day_irradiance(Index steps) {
  std::vector<double> v;
  for (Index t = 0; t < steps; ++t) {
    const int h = static_cast<int>(t % 24);
    const double s = std::sin(std::numbers::pi * (h - 6) / 12.0);
    v.push_back(h >= 6 && h <= 18 ? std::max(0.0, s) : 0.0);
  }
  return v;
}

HubSpec boiler_hub(const std::string& id, double heat_demand, Index steps) {
  HubSpec h;
  h.id = id;
  h.devices = {make_boiler("boiler", 50.0, 0.9)};
  h.elec_demand.assign(static_cast<std::size_t>(steps), 0.0);
  h.heat_demand.assign(static_cast<std::size_t>(steps), heat_demand);
  return h;
}

std::vector<HubSpec> trio_hubs(Index steps) {
  const auto irr = day_irradiance(steps);
  HubSpec a, b, c;
  a.id = "h1";
  a.devices = {make_pv("pv", 60), make_boiler("boiler", 40, 0.9)};
  b.id = "h2";
  b.devices = {make_chp("chp", 40, 0.3, 0.5), make_boiler("boiler", 40, 0.9), make_pv("pv", 10)};
  c.id = "h3";
  c.devices = {make_heat_pump("hp", 10, 3.0), make_boiler("boiler", 30, 0.9)};
  for (HubSpec* h : {&a, &b, &c}) {
    h->disturbances["irradiance"] = irr;
    h->eta_p = 0.95;
    h->eta_q = 0.9;
    h->p_bid_cap = 40;
    h->q_bid_cap = 0;
  }
  for (Index t = 0; t < steps; ++t) {
    const int hr = static_cast<int>(t % 24);
    const double day = hr >= 7 && hr <= 20 ? 1.0 : 0.4;
    a.elec_demand.push_back(5 * day);
    a.heat_demand.push_back(8);
    b.elec_demand.push_back(15 * day);
    b.heat_demand.push_back(15);
    c.elec_demand.push_back(25 * day);
    c.heat_demand.push_back(12);
  }
  return {a, b, c};
}

std::vector<BargainingCluster> make_game(const std::vector<std::vector<const HubSpec*>>& clusters,
                                         const std::vector<double>& alpha, const Tariffs& tariffs, Horizon horizon) {
  std::vector<BargainingCluster> out;
  for (std::size_t m = 0; m < clusters.size(); ++m) {
    BargainingCluster bc;
    bc.id = "c" + std::to_string(m + 1);
    bc.alpha = alpha[m];
    for (const HubSpec* h : clusters[m]) {
      const auto x0 = h->default_states();
      bc.members.push_back({h, x0, solve_decentralized(*h, horizon, x0, tariffs).total});
    }
    out.push_back(std::move(bc));
  }
  return out;
}

DirectGame solve_game_direct(const std::vector<BargainingCluster>& clusters, const Tariffs& tariffs,
                             Horizon horizon) {
  const Index T = horizon.length;
  const std::size_t M = clusters.size();
  ConvexSubproblem p;
  std::vector<Index> Pv(M), Cv(M);
  std::vector<std::vector<HubLayout>> layouts(M);
  for (std::size_t m = 0; m < M; ++m) {
    for (const auto& mem : clusters[m].members)
      layouts[m].push_back(append_feasible_set(p, *mem.hub, horizon, mem.x0, mem.hub->p_bid_cap, mem.hub->q_bid_cap));
    Pv[m] = p.add_variables(T);
    Cv[m] = p.add_variable();
    for (Index t = 0; t < T; ++t) {
      std::vector<Term> rp{{Pv[m] + t, -1.0}}, rq;
      for (const auto& L : layouts[m]) {
        rp.push_back({L.p_net(t), 1.0});
        rq.push_back({L.q_net(t), 1.0});
      }
      p.add_equality(rp, 0.0);
      p.add_equality(rq, 0.0);
    }
    LogTerm lt;
    lt.weight = clusters[m].alpha;
    lt.offset = 0.0;
    for (std::size_t i = 0; i < layouts[m].size(); ++i) {
      lt.offset += clusters[m].members[i].J_dec;
      for (const Term& term : grid_cost_terms(layouts[m][i], tariffs, -1.0)) lt.terms.push_back(term);
    }
    lt.terms.push_back({Cv[m], -1.0});
    lt.floor = 1e-9;
    p.add_log_term(lt);
  }
  for (Index t = 0; t < T; ++t) {
    std::vector<Term> row;
    for (std::size_t m = 0; m < M; ++m) row.push_back({Pv[m] + t, 1.0});
    p.add_equality(row, 0.0);
  }
  std::vector<Term> crow;
  for (std::size_t m = 0; m < M; ++m) crow.push_back({Cv[m], 1.0});
  p.add_equality(crow, 0.0);

  SolveOptions opt;
  opt.tolerance = 1e-9;
  opt.max_iterations = 200;
  const SolveReport rep = solve(p, opt);
  DirectGame g;
  g.ok = rep.ok();
  for (std::size_t m = 0; m < M; ++m) {
    g.P.push_back(rep.x.segment(Pv[m], T));
    g.C.push_back(rep.x[Cv[m]]);
    double dj = 0.0;
    for (std::size_t i = 0; i < layouts[m].size(); ++i)
      dj += clusters[m].members[i].J_dec - grid_cost(extract_plan(layouts[m][i], rep.x), tariffs);
    g.dJ.push_back(dj);
    g.j_nbg -= clusters[m].alpha * std::log(dj - g.C.back());
  }
  return g;
}

Eigen::VectorXd brute_force_qp(const DenseQp& qp, double* objective) {
  const Index n = qp.Q.rows();
  const Index me = qp.A.rows();
  const Index mi = qp.G.rows();
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << mi); ++mask) {
    std::vector<Index> act;
    for (Index k = 0; k < mi; ++k)
      if (mask & (1L << k)) act.push_back(k);
    const Index ma = me + static_cast<Index>(act.size());
    if (ma > n) continue;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + ma, n + ma);
    Eigen::VectorXd rhs(n + ma);
    K.topLeftCorner(n, n) = qp.Q;
    rhs.head(n) = -qp.c;
    for (Index r = 0; r < ma; ++r) {
      const Eigen::VectorXd row = r < me ? Eigen::VectorXd(qp.A.row(r).transpose())
                                         : Eigen::VectorXd(qp.G.row(act[static_cast<std::size_t>(r - me)]).transpose());
      K.block(0, n + r, n, 1) = row;
      K.block(n + r, 0, 1, n) = row.transpose();
      rhs[n + r] = r < me ? qp.b[r] : qp.h[act[static_cast<std::size_t>(r - me)]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rank() < n + ma) continue;
    const Eigen::VectorXd x = lu.solve(rhs).head(n);
    if (mi > 0 && ((qp.G * x - qp.h).array() > 1e-9).any()) continue;
    const double obj = 0.5 * x.dot(qp.Q * x) + qp.c.dot(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  if (objective) *objective = best_obj;
  return best;
}

}  // namespace ehub::fixtures
