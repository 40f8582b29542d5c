#include "ehub/baselines.hpp"
#include "ehub/errors.hpp"
#include "ehub/hub_model.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace ehub;

namespace {

const std::vector<int> kPeak = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};

HubPlan empty_plan(Index T) {
  HubPlan p;
  p.horizon = {0, T};
  p.e_out.assign(T, 0.0);
  p.e_in.assign(T, 0.0);
  p.gas.assign(T, 0.0);
  p.p_bid_out.assign(T, 0.0);
  p.p_bid_in.assign(T, 0.0);
  p.q_bid_out.assign(T, 0.0);
  p.q_bid_in.assign(T, 0.0);
  return p;
}

}  // namespace

TEST(Tariffs, TableValues) {
  const Tariffs t = make_tariffs({}, 24, kPeak);
  EXPECT_DOUBLE_EQ(t.elec_buy[10], 0.27);
  EXPECT_DOUBLE_EQ(t.elec_buy[3], 0.22);
  EXPECT_DOUBLE_EQ(t.elec_buy[19], 0.27);
  EXPECT_DOUBLE_EQ(t.elec_buy[20], 0.22);
  EXPECT_DOUBLE_EQ(t.elec_feedin[0], 0.12);
  EXPECT_DOUBLE_EQ(t.gas[0], 0.115);
  EXPECT_DOUBLE_EQ(t.trading_fee[0], 0.02);
}

TEST(GridCost, PeakPurchase) {
  const Tariffs t = make_tariffs({}, 24, kPeak);
  HubPlan p = empty_plan(1);
  p.horizon.start = 10;
  p.e_out[0] = 10.0;
  EXPECT_NEAR(grid_cost(p, t), 2.70, 1e-12);
  EXPECT_NEAR(realized_step_cost(p, 0, t), 2.70, 1e-12);
}

TEST(GridCost, ZeroPlanIsFree) {
  const Tariffs t = make_tariffs({}, 24, kPeak);
  EXPECT_DOUBLE_EQ(grid_cost(empty_plan(5), t), 0.0);
  EXPECT_DOUBLE_EQ(realized_step_cost(empty_plan(5), 3, t), 0.0);
}

TEST(GridCost, TradingFee) {
  const Tariffs t = make_tariffs({}, 24, kPeak);
  HubPlan p = empty_plan(1);
  p.p_bid_out[0] = 5.0;
  EXPECT_NEAR(grid_cost(p, t), 0.10, 1e-12);
  EXPECT_NEAR(realized_step_cost(p, 0, t), 0.10, 1e-12);
}

TEST(FeasibleSet, BoilerUniqueGas) {
  const HubSpec h = fixtures::boiler_hub("b", 9.0, 1);
  ConstraintBlock blk = build_feasible_set(h, {0, 1}, h.default_states());
  const Tariffs t = make_tariffs({}, 1, kPeak);
  add_grid_cost(blk.problem, blk.layout, t);
  const SolveReport r = solve(blk.problem);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.x[blk.layout.gas(0)], 10.0, 1e-6);
  // the gas row alone pins g: minimising and maximising g agree
  ConstraintBlock up = build_feasible_set(h, {0, 1}, h.default_states());
  up.problem.add_linear(up.layout.gas(0), -1.0);
  const SolveReport r2 = solve(up.problem);
  ASSERT_TRUE(r2.ok());
  EXPECT_NEAR(r2.x[up.layout.gas(0)], 10.0, 1e-6);
}

TEST(FeasibleSet, IdleHubAcceptsZeroPlan) {
  HubSpec h;
  h.id = "idle";
  h.devices = {make_boiler("b", 10, 0.9), make_battery("bat", 10, 5, 0.95, 0.95, 0.999)};
  h.elec_demand.assign(4, 0.0);
  h.heat_demand.assign(4, 0.0);
  auto empty = h.default_states();
  for (auto& x : empty) x.setZero();
  const ConstraintBlock blk = build_feasible_set(h, {0, 4}, empty);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(blk.problem.num_vars());
  EXPECT_LE(blk.problem.max_violation(zero), 1e-12);
}

TEST(FeasibleSet, ImportIsCreditedAtUnitEfficiency) {
  // consumer with 6 kWh demand and caps: an import of 6 covers it without the grid
  HubSpec h;
  h.id = "c";
  h.eta_p = 1.0;
  h.p_bid_cap = 10.0;
  h.elec_demand = {6.0};
  h.heat_demand = {0.0};
  ConstraintBlock blk = build_feasible_set(h, {0, 1}, h.default_states());
  blk.problem.set_bounds(blk.layout.p_net(0), 6.0, 6.0);
  const Tariffs t = make_tariffs({}, 1, kPeak);
  add_grid_cost(blk.problem, blk.layout, t);
  const SolveReport r = solve(blk.problem);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.x[blk.layout.e_out(0)], 0.0, 1e-6);
  EXPECT_NEAR(r.x[blk.layout.e_in(0)], 0.0, 1e-6);
}

TEST(FeasibleSet, Deterministic) {
  const auto hubs = fixtures::trio_hubs(24);
  const ConstraintBlock a = build_feasible_set(hubs[1], {0, 24}, hubs[1].default_states());
  const ConstraintBlock b = build_feasible_set(hubs[1], {0, 24}, hubs[1].default_states());
  EXPECT_EQ(a.problem.lower(), b.problem.lower());
  EXPECT_EQ(a.problem.upper(), b.problem.upper());
  EXPECT_EQ(a.problem.equality_rhs(), b.problem.equality_rhs());
  EXPECT_EQ(a.problem.inequality_rhs(), b.problem.inequality_rhs());
  ASSERT_EQ(a.problem.equality_rows().size(), b.problem.equality_rows().size());
  for (std::size_t r = 0; r < a.problem.equality_rows().size(); ++r) {
    const auto& ra = a.problem.equality_rows()[r];
    const auto& rb = b.problem.equality_rows()[r];
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t k = 0; k < ra.size(); ++k) {
      EXPECT_EQ(ra[k].var, rb[k].var);
      EXPECT_EQ(ra[k].coef, rb[k].coef);
    }
  }
}

TEST(FeasibleSet, ShortSeriesRejected) {
  HubSpec h = fixtures::boiler_hub("b", 9.0, 3);
  EXPECT_THROW(h.validate(5), ValidationError);
}

TEST(HubModelProperty, SolvedPlansBalanceAndDoNotBuyAndSell) {
  const auto hubs = fixtures::trio_hubs(48);
  const Tariffs t = make_tariffs({}, 48, kPeak);
  std::vector<CentralizedMember> cm;
  for (const auto& h : hubs) cm.push_back({&h, h.default_states(), true, -1});
  const BaselineResult cen = solve_centralized(cm, {0, 24}, t);
  for (std::size_t i = 0; i < hubs.size(); ++i) {
    double peak = 1.0;
    for (Index k = 0; k < 24; ++k) peak = std::max({peak, hubs[i].elec_demand[k], hubs[i].heat_demand[k]});
    EXPECT_LE(balance_violation(hubs[i], cen.plans[i]), 1e-6 * peak);
    // zero up to the interior-point stopping gap (about 1e-3 kWh per side)
    for (Index k = 0; k < 24; ++k)
      EXPECT_LE(cen.plans[i].p_bid_out[k] * cen.plans[i].p_bid_in[k], 1e-5) << hubs[i].id << " t=" << k;
  }
  for (const auto& h : hubs) {
    const BaselineResult dec = solve_decentralized(h, {0, 24}, h.default_states(), t);
    EXPECT_LE(balance_violation(h, dec.plans[0]), 1e-6 * 25.0);
  }
}

TEST(HubModel, FirstStepStatesFollowPlan) {
  HubSpec h;
  h.id = "bat";
  h.devices = {make_battery("bat", 20, 10, 1.0, 1.0, 1.0)};
  h.elec_demand = {0, 0, 10};
  h.heat_demand = {0, 0, 0};
  const Tariffs t = make_tariffs({}, 3, {2});
  const BaselineResult r = solve_decentralized(h, {0, 3}, h.default_states(), t);
  const auto x1 = first_step_states(r.plans[0]);
  ASSERT_EQ(x1.size(), 1u);
  EXPECT_NEAR(x1[0][0], r.plans[0].x[0][0][0], 1e-12);
}
