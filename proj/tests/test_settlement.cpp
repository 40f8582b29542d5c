#include "ehub/errors.hpp"
#include "ehub/settlement.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ehub;

namespace {

ClusterLedger ledger(double C, std::vector<std::array<double, 3>> rows, std::vector<bool> left = {}) {
  ClusterLedger l;
  l.cluster = "m";
  l.C_bar = C;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    HubAccount& a = l.account("h" + std::to_string(i + 1));
    a.J_grid_in = rows[i][0];
    a.J_dec_in = rows[i][1];
    a.J_dec_out = rows[i][2];
    a.left = i < left.size() && left[i];
  }
  return l;
}

double sum_c(const ClusterSettlement& s) {
  double c = 0.0;
  for (const auto& h : s.hubs) c += h.c_bid;
  return c;
}

}  // namespace

TEST(DistributeCosts, TwoHubOracle) {
  const ClusterSettlement s = distribute_costs(ledger(3.0, {{90, 100, 0}, {48, 50, 0}}));
  EXPECT_NEAR(s.beta, -0.06, 1e-15);
  EXPECT_NEAR(s.hubs[0].c_bid, 4.0, 1e-12);
  EXPECT_NEAR(s.hubs[1].c_bid, -1.0, 1e-12);
}

TEST(DistributeCosts, ZeroBenefit) {
  const ClusterSettlement s = distribute_costs(ledger(12.0, {{90, 100, 0}, {48, 50, 0}}));
  EXPECT_NEAR(s.beta, 0.0, 1e-15);
  EXPECT_NEAR(s.hubs[0].c_bid, 10.0, 1e-12);
  EXPECT_NEAR(s.hubs[1].c_bid, 2.0, 1e-12);
}

TEST(DistributeCosts, HubBidsSumToClusterBid) {
  const ClusterSettlement s = distribute_costs(ledger(-575.0, {{4000, 4100, 0}, {9000, 8700, 0}, {2500, 2900, 0}}));
  EXPECT_NEAR(sum_c(s), -575.0, 1e-9);
}

TEST(DistributeCosts, NoGamesInWindow) {
  const ClusterSettlement s = distribute_costs(ledger(0.0, {{90, 100, 0}, {48, 50, 0}}));
  EXPECT_NEAR(s.beta, (138.0 - 150.0) / 150.0, 1e-15);
}

TEST(DistributeCosts, RejectsNonPositiveDecentralizedCost) {
  EXPECT_THROW(distribute_costs(ledger(1.0, {{1, 0, 0}})), ValidationError);
}

TEST(DistributeCostsPnp, ReducesWithoutLeavers) {
  const ClusterLedger l = ledger(3.0, {{90, 100, 0}, {48, 50, 0}});
  const ClusterSettlement a = distribute_costs(l);
  const ClusterSettlement b = distribute_costs_pnp(l, {});
  EXPECT_DOUBLE_EQ(b.gamma, 0.0);
  EXPECT_DOUBLE_EQ(a.beta, b.beta);
  for (std::size_t i = 0; i < a.hubs.size(); ++i) EXPECT_DOUBLE_EQ(a.hubs[i].c_bid, b.hubs[i].c_bid);
}

TEST(DistributeCostsPnp, ClosedFormOracle) {
  const ClusterLedger l = ledger(0.0, {{95, 100, 0}, {95, 100, 0}, {0, 0, 50}}, {false, false, true});
  const ClusterSettlement s = distribute_costs_pnp(l, {0.0025, 0.0});
  EXPECT_TRUE(s.pnp);
  EXPECT_NEAR(s.gamma, 1.0, 1e-12);
  EXPECT_NEAR(s.beta, -0.055, 1e-12);
  EXPECT_NEAR(s.hubs[2].c_pen, 1.0, 1e-12);
  // grid search over gamma on beta + W gamma^2
  double best = 1e9, best_g = 0.0;
  for (int k = 0; k <= 40000; ++k) {
    const double g = k * 1e-4;
    const double beta = (0.0 - g + 190.0 - 200.0) / 200.0;
    if (beta > 0.0) continue;
    const double f = beta + 0.0025 * g * g;
    if (f < best) {
      best = f;
      best_g = g;
    }
  }
  EXPECT_NEAR(best_g, s.gamma, 2e-4);
}

TEST(DistributeCostsPnp, LargeWeightRecoversPlainSplit) {
  const ClusterLedger l = ledger(-4.0, {{95, 100, 0}, {95, 100, 0}, {0, 0, 50}}, {false, false, true});
  const ClusterSettlement s = distribute_costs_pnp(l, {1e12, 0.0});
  EXPECT_LT(s.gamma, 1e-9);
  EXPECT_NEAR(s.beta, (-4.0 + 190.0 - 200.0) / 200.0, 1e-9);
}

TEST(SettlementProperty, ExactnessAndGuarantees) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dec(20.0, 500.0), saving(0.0, 0.2), cbar(-30.0, 30.0), out(1.0, 80.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    std::vector<std::array<double, 3>> rows;
    std::vector<bool> left;
    double sd = 0.0, sg = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = dec(rng);
      const double g = d * (1.0 - saving(rng));
      sd += d;
      sg += g;
      const bool leaver = trial % 2 == 1 && i == n - 1;
      rows.push_back({g, d, leaver ? out(rng) : 0.0});
      left.push_back(leaver);
    }
    // keep the cluster beneficial overall so that beta <= 0 is attainable
    const double C = std::min(cbar(rng), 0.5 * (sd - sg));
    const ClusterLedger l = ledger(C, rows, left);
    const SettlementParams p;
    const ClusterSettlement s = settle(l, p);
    EXPECT_NEAR(sum_c(s) + s.gamma, C, 1e-9 * std::max(1.0, std::abs(C)));
    if (!s.pnp) {
      for (const auto& h : s.hubs) EXPECT_NEAR(h.beta, s.beta, 1e-12);
    } else {
      for (const auto& h : s.hubs) {
        const HubAccount* a = l.find(h.hub);
        if (!a->left) EXPECT_LE(a->J_grid_in + h.c_bid, a->J_dec_in + 1e-9);
      }
    }
  }
}

TEST(SettlementProperty, PenaltyProRata) {
  const ClusterLedger l =
      ledger(0.0, {{95, 100, 0}, {45, 60, 30}, {80, 90, 90}}, {false, true, true});
  const ClusterSettlement s = distribute_costs_pnp(l, {});
  ASSERT_GT(s.gamma, 0.0);
  EXPECT_NEAR(s.hubs[1].c_pen / s.hubs[2].c_pen, 30.0 / 90.0, 1e-12);
  EXPECT_NEAR(s.hubs[1].c_pen + s.hubs[2].c_pen, s.gamma, 1e-12);
}

TEST(Ledger, AccumulateAndReset) {
  SettlementLedger L;
  L.accumulate("m", 4.0);
  L.accumulate("m", 5.0);
  EXPECT_DOUBLE_EQ(L.cluster("m").C_bar, 9.0);
  L.cluster("m").account("h").J_grid_in = 3.0;
  L.reset(72);
  EXPECT_DOUBLE_EQ(L.cluster("m").C_bar, 0.0);
  EXPECT_EQ(L.window_start, 72);
  const HubAccount* a = L.cluster("m").find("h");
  EXPECT_TRUE(a == nullptr || a->J_grid_in == 0.0);
}
