#include "ehub/baselines.hpp"
#include "ehub/consensus.hpp"
#include "ehub/consensus_admm.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ehub;

namespace {

const std::vector<int> kPeak = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};

// (x - a)^2 + lambda x + rho/2 (x - z)^2
Eigen::VectorXd scalar_local(double a, const Eigen::VectorXd& z, const Eigen::VectorXd& lambda, double rho) {
  Eigen::VectorXd x(1);
  x[0] = (2.0 * a - lambda[0] + rho * z[0]) / (2.0 + rho);
  return x;
}

ConsensusLayout two_agent_scalar() {
  ConsensusLayout l;
  l.global_size = 1;
  l.agent_indices = {{0}, {0}};
  return l;
}

// Producer with cheap PV and a consumer, one peak step.
std::vector<HubSpec> producer_consumer() {
  HubSpec prod, cons;
  prod.id = "prod";
  prod.devices = {make_pv("pv", 10.0)};
  prod.disturbances["irradiance"] = std::vector<double>(24, 1.0);
  prod.elec_demand.assign(24, 2.0);
  prod.heat_demand.assign(24, 0.0);
  cons.id = "cons";
  cons.elec_demand.assign(24, 6.0);
  cons.heat_demand.assign(24, 0.0);
  for (HubSpec* h : {&prod, &cons}) {
    h->eta_p = 1.0;
    h->p_bid_cap = 20.0;
  }
  return {prod, cons};
}

}  // namespace

TEST(ConsensusAdmm, ScalarToyConvergesToTwo) {
  const ConsensusLayout l = two_agent_scalar();
  ConsensusIterate it;
  it.reset(l, 1e-3);
  ConsensusSettings s;  // 0.05 / 0.03, 200 rounds, 2% growth
  auto local = [](std::size_t a, const Eigen::VectorXd& z, const Eigen::VectorXd& lam, double rho) {
    return scalar_local(a == 0 ? 1.0 : 3.0, z, lam, rho);
  };
  // z is the mean of the copies and the duals sum to zero, so z settles within a few rounds
  for (int w = 0; w < 200; ++w) {
    consensus_round(l, it, local, s);
    if (w >= 2) EXPECT_NEAR(it.z[0], 2.0, 1e-4) << "round " << w + 1;
  }
  EXPECT_NEAR(it.z[0], 2.0, 1e-12);
}

TEST(ConsensusAdmm, ScalarToyResidualStopRound) {
  // the copies only agree once the duals reach +-2; with rho0 = 1e-3 and 2% growth
  // the squared primal residual drops below 0.05 at round 219
  const ConsensusLayout l = two_agent_scalar();
  ConsensusIterate it;
  it.reset(l, 1e-3);
  ConsensusSettings s;
  s.max_iterations = 400;
  const bool ok = run_consensus_admm(
      l, it, [](std::size_t a, const Eigen::VectorXd& z, const Eigen::VectorXd& lam, double rho) {
        return scalar_local(a == 0 ? 1.0 : 3.0, z, lam, rho);
      },
      s);
  EXPECT_TRUE(ok);
  EXPECT_EQ(it.iterations, 219);
  EXPECT_NEAR(it.z[0], 2.0, 1e-12);
}

TEST(ConsensusAdmm, RoundIdentities) {
  const ConsensusLayout l = two_agent_scalar();
  ConsensusIterate it;
  it.reset(l, 0.5);
  ConsensusSettings s;
  auto local = [](std::size_t a, const Eigen::VectorXd& z, const Eigen::VectorXd& lam, double rho) {
    return scalar_local(a == 0 ? 1.0 : 3.0, z, lam, rho);
  };
  for (int w = 0; w < 20; ++w) {
    const auto duals = it.duals;
    const double rho = it.rho;
    consensus_round(l, it, local, s);
    EXPECT_DOUBLE_EQ(it.z[0], 0.5 * (it.copies[0][0] + it.copies[1][0]));
    for (int a = 0; a < 2; ++a)
      EXPECT_NEAR(it.duals[a][0] - duals[a][0], rho * (it.copies[a][0] - it.z[0]), 1e-15);
    EXPECT_DOUBLE_EQ(it.rho, rho * 1.02);
  }
}

TEST(ConsensusAdmm, ConsensualStartIsFixedPoint) {
  const ConsensusLayout l = two_agent_scalar();
  ConsensusIterate it;
  it.reset(l, 0.1);
  it.z[0] = 2.0;
  it.copies = {Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 2.0)};
  it.duals = {Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, 2.0)};  // lambda = 2(z - a)
  ConsensusSettings s;
  const bool ok = run_consensus_admm(
      l, it, [](std::size_t a, const Eigen::VectorXd& z, const Eigen::VectorXd& lam, double rho) {
        return scalar_local(a == 0 ? 1.0 : 3.0, z, lam, rho);
      },
      s);
  EXPECT_TRUE(ok);
  EXPECT_EQ(it.iterations, 1);
  EXPECT_DOUBLE_EQ(it.primal_sq, 0.0);
  EXPECT_DOUBLE_EQ(it.dual_sq, 0.0);
}

TEST(Coordinator, InterimZeroIsZero) {
  const Index T = 3;
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * 2 * T);
  const CoordinatorSolution c = coordinator_subproblem(2, T, z, z, 1.0, InterimMode{Eigen::VectorXd::Zero(T)});
  EXPECT_LE(c.copies.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Coordinator, HeatCopiesAreProjection) {
  // T = 1, blocks [p, q] per hub; P fixed at 0
  for (const Eigen::Vector3d zq : {Eigen::Vector3d(4, -3, -1), Eigen::Vector3d(5, -3, -1)}) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
    for (int i = 0; i < 3; ++i) z[2 * i + 1] = zq[i];
    const Eigen::VectorXd lam = Eigen::VectorXd::Zero(6);
    const CoordinatorSolution c = coordinator_subproblem(3, 1, z, lam, 0.7, InterimMode{Eigen::VectorXd::Zero(1)});
    const Eigen::Vector3d proj = zq - Eigen::Vector3d::Constant(zq.mean());
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(c.copies[2 * i + 1], proj[i], 1e-7);
      EXPECT_NEAR(c.copies[2 * i], 0.0, 1e-7);
    }
  }
}

TEST(Coordinator, LoneBargainerCannotTrade) {
  const Index T = 2;
  const Index b = 2 * T + 1;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * b);
  z[b - 1] = 3.0;  // dJ of hub 0
  BargainingMode mode;
  mode.z = Eigen::VectorXd::Constant(T + 1, 5.0);
  mode.count = 0;
  const CoordinatorSolution c = coordinator_subproblem(2, T, z, Eigen::VectorXd::Zero(2 * b), 1.0, mode);
  EXPECT_NEAR(c.C, 0.0, 1e-8);
  EXPECT_LE(c.P.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(HubSubproblem, StrongPenaltyRemovesTrades) {
  const auto hubs = producer_consumer();
  const Tariffs t = make_tariffs({}, 24, kPeak);
  ClusterMember m{&hubs[0], hubs[0].default_states(), 0.0};
  HubAgent a = make_hub_agent(m, t, {10, 2}, false);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  const HubSolution s = hub_subproblem(a, z, z, 1e6, {});
  EXPECT_LE(s.shared.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Interim, SingleHubFixedZeroMatchesDecentralized) {
  const auto hubs = fixtures::trio_hubs(48);
  const Tariffs t = make_tariffs({}, 48, kPeak);
  const Horizon hz{0, 12};
  for (const auto& h : hubs) {
    ClusterContext ctx;
    ctx.members = {{&h, h.default_states(), 0.0}};
    ctx.tariffs = &t;
    ctx.horizon = hz;
    ClusterSolver solver(ctx, InterimMode{Eigen::VectorXd::Zero(12)});
    ConsensusState st = make_consensus_state({h.id}, 12, false, ctx.params.rho0);
    const ClusterRun run = solver.run(st);
    EXPECT_TRUE(run.converged) << h.id;
    const double dec = solve_decentralized(h, hz, h.default_states(), t).total;
    EXPECT_NEAR(run.grid_costs[0], dec, 1e-3 * std::abs(dec)) << h.id;

    HubSpec capped = h;
    capped.p_bid_cap = capped.q_bid_cap = 0.0;
    ClusterContext c2 = ctx;
    c2.members = {{&capped, capped.default_states(), 0.0}};
    ClusterSolver s2(c2, InterimMode{Eigen::VectorXd::Zero(12)});
    ConsensusState st2 = make_consensus_state({h.id}, 12, false, ctx.params.rho0);
    EXPECT_NEAR(s2.run(st2).grid_costs[0], dec, 1e-6 * std::abs(dec)) << h.id;
  }
}

TEST(Interim, TwoHubBargainingInnerLoopFindsCentralTransfer) {
  const auto hubs = producer_consumer();
  const Tariffs t = make_tariffs({}, 24, kPeak);
  const Horizon hz{10, 1};
  ClusterContext ctx;
  for (const auto& h : hubs)
    ctx.members.push_back({&h, h.default_states(), solve_decentralized(h, hz, h.default_states(), t).total});
  ctx.tariffs = &t;
  ctx.horizon = hz;
  ctx.params.eps_primal = 1e-8;
  ctx.params.eps_dual = 1e-8;
  ctx.params.max_iterations = 2000;
  BargainingMode mode;
  mode.z = Eigen::VectorXd::Zero(2);
  mode.count = 0;
  ClusterSolver solver(ctx, mode);
  ConsensusState st = make_consensus_state({"prod", "cons"}, 1, true, ctx.params.rho0);
  const ClusterRun run = solver.run(st);
  ASSERT_TRUE(run.converged);
  const BaselineResult cen =
      solve_centralized({{&hubs[0], hubs[0].default_states(), true, 0}, {&hubs[1], hubs[1].default_states(), true, 0}}, hz, t);
  EXPECT_NEAR(st.z_p(1, 0), cen.plans[1].p_bid(0), 1e-3);
  EXPECT_NEAR(st.z_p(0, 0), cen.plans[0].p_bid(0), 1e-3);
  EXPECT_NEAR(st.z_p(1, 0), 6.0, 1e-3);
}

TEST(ConsensusProperty, ClusterRoundIdentities) {
  const auto hubs = fixtures::trio_hubs(48);
  const Tariffs t = make_tariffs({}, 48, kPeak);
  ClusterContext ctx;
  for (const auto& h : hubs) ctx.members.push_back({&h, h.default_states(), 0.0});
  ctx.tariffs = &t;
  ctx.horizon = {0, 4};
  Eigen::VectorXd P(4);
  P << 3.0, -2.0, 0.0, 1.0;
  ClusterSolver solver(ctx, InterimMode{P});
  ConsensusState st = make_consensus_state({"h1", "h2", "h3"}, 4, false, 0.01);
  double last_rho = st.iterate.rho;
  for (int w = 0; w < 15; ++w) {
    const auto duals = st.iterate.duals;
    const double rho = st.iterate.rho;
    solver.round(st);
    for (std::size_t i = 0; i < 3; ++i)
      for (Index k = 0; k < st.block(); ++k) {
        const Index g = static_cast<Index>(i) * st.block() + k;
        const double hub = st.local(i)[k];
        const double coord = st.iterate.copies.back()[g];
        EXPECT_DOUBLE_EQ(st.iterate.z[g], 0.5 * (hub + coord));
        EXPECT_NEAR(st.iterate.duals[i][k] - duals[i][k], rho * (hub - st.iterate.z[g]), 1e-12);
      }
    EXPECT_GE(st.iterate.rho, last_rho);
    last_rho = st.iterate.rho;
  }
}

TEST(ConsensusProperty, ConvergedInterimHonoursTrade) {
  const auto hubs = fixtures::trio_hubs(48);
  const Tariffs t = make_tariffs({}, 48, kPeak);
  ClusterContext ctx;
  for (const auto& h : hubs) ctx.members.push_back({&h, h.default_states(), 0.0});
  ctx.tariffs = &t;
  ctx.horizon = {0, 6};
  const Eigen::VectorXd P = Eigen::VectorXd::Constant(6, -2.0);
  ClusterSolver solver(ctx, InterimMode{P});
  ConsensusState st = make_consensus_state({"h1", "h2", "h3"}, 6, false, ctx.params.rho0);
  const ClusterRun run = solver.run(st);
  ASSERT_TRUE(run.converged);
  // squared residual below eps_p bounds every deviation by sqrt(eps_p) per hub pair
  const double tol = 3.0 * std::sqrt(ctx.params.eps_primal);
  for (Index k = 0; k < 6; ++k) {
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      sp += st.z_p(i, k);
      sq += st.z_q(i, k);
    }
    EXPECT_NEAR(sp, P[k], tol);
    EXPECT_NEAR(sq, 0.0, tol);
  }
}

TEST(RemapState, ShiftsAndMatchesIds) {
  ConsensusState s = make_consensus_state({"a", "b"}, 3, false, 0.1);
  for (Index k = 0; k < s.iterate.z.size(); ++k) s.iterate.z[k] = static_cast<double>(k);
  const ConsensusState r = remap_state(s, {"b", "c"}, 1, 2, false);
  // b's p block was [6,7,8], q block [9,10,11]
  EXPECT_DOUBLE_EQ(r.z_p(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(r.z_p(0, 1), 8.0);
  EXPECT_DOUBLE_EQ(r.z_q(0, 0), 10.0);
  EXPECT_DOUBLE_EQ(r.z_p(1, 0), 0.0);
}
