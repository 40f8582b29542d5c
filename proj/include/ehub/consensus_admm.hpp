#pragma once

// General-form consensus ADMM. Each agent owns a local copy of a subset of
// the global variables; z is the mean of the owners' copies and every dual
// moves by rho * (copy - z).

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <future>
#include <vector>

namespace ehub {

struct ConsensusLayout {
  std::ptrdiff_t global_size = 0;
  std::vector<std::vector<std::ptrdiff_t>> agent_indices;

  std::size_t agents() const { return agent_indices.size(); }
  std::vector<int> owner_counts() const {
    std::vector<int> c(static_cast<std::size_t>(global_size), 0);
    for (const auto& idx : agent_indices)
      for (auto k : idx) ++c[static_cast<std::size_t>(k)];
    return c;
  }
};

struct ConsensusIterate {
  Eigen::VectorXd z;
  std::vector<Eigen::VectorXd> copies;
  std::vector<Eigen::VectorXd> duals;
  double rho = 1e-3;
  int iterations = 0;
  double primal_sq = 0.0;  // ||r||^2
  double dual_sq = 0.0;    // ||s||^2

  void reset(const ConsensusLayout& layout, double rho0) {
    z = Eigen::VectorXd::Zero(layout.global_size);
    copies.clear();
    duals.clear();
    for (const auto& idx : layout.agent_indices) {
      copies.push_back(Eigen::VectorXd::Zero(static_cast<std::ptrdiff_t>(idx.size())));
      duals.push_back(Eigen::VectorXd::Zero(static_cast<std::ptrdiff_t>(idx.size())));
    }
    rho = rho0;
    iterations = 0;
    primal_sq = dual_sq = 0.0;
  }
};

struct ConsensusSettings {
  double eps_primal = 0.05;
  double eps_dual = 0.03;
  int max_iterations = 200;
  double rho_growth = 1.02;
  double rho_max = 1e6;
  int workers = 1;
};

inline Eigen::VectorXd gather(const Eigen::VectorXd& global, const std::vector<std::ptrdiff_t>& idx) {
  Eigen::VectorXd out(static_cast<std::ptrdiff_t>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<std::ptrdiff_t>(k)] = global[idx[k]];
  return out;
}

/// One sweep: local solves, z = mean of copies, dual ascent, residuals, rho growth.
/// `solve(agent, z_local, dual, rho)` returns the agent's new copy.
template <class LocalSolve>
void consensus_round(const ConsensusLayout& layout, ConsensusIterate& it, LocalSolve&& solve,
                     const ConsensusSettings& settings) {
  const std::size_t na = layout.agents();
  std::vector<Eigen::VectorXd> zl(na);
  for (std::size_t a = 0; a < na; ++a) zl[a] = gather(it.z, layout.agent_indices[a]);

  if (settings.workers > 1 && na > 1) {
    std::vector<std::future<Eigen::VectorXd>> jobs;
    std::size_t next = 0;
    while (next < na) {
      jobs.clear();
      const std::size_t batch_end = std::min(na, next + static_cast<std::size_t>(settings.workers));
      for (std::size_t a = next; a < batch_end; ++a)
        jobs.push_back(std::async(std::launch::async, [&, a] { return solve(a, zl[a], it.duals[a], it.rho); }));
      for (std::size_t a = next; a < batch_end; ++a) it.copies[a] = jobs[a - next].get();
      next = batch_end;
    }
  } else {
    for (std::size_t a = 0; a < na; ++a) it.copies[a] = solve(a, zl[a], it.duals[a], it.rho);
  }

  const auto counts = layout.owner_counts();
  Eigen::VectorXd z_new = Eigen::VectorXd::Zero(layout.global_size);
  for (std::size_t a = 0; a < na; ++a) {
    const auto& idx = layout.agent_indices[a];
    for (std::size_t k = 0; k < idx.size(); ++k) z_new[idx[k]] += it.copies[a][static_cast<std::ptrdiff_t>(k)];
  }
  for (std::ptrdiff_t k = 0; k < layout.global_size; ++k)
    if (counts[static_cast<std::size_t>(k)] > 0) z_new[k] /= counts[static_cast<std::size_t>(k)];
    else z_new[k] = it.z[k];

  double r2 = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    const Eigen::VectorXd diff = it.copies[a] - gather(z_new, layout.agent_indices[a]);
    it.duals[a] += it.rho * diff;
    r2 += diff.squaredNorm();
  }
  double s2 = 0.0;
  const Eigen::VectorXd dz = z_new - it.z;
  for (std::ptrdiff_t k = 0; k < layout.global_size; ++k)
    s2 += counts[static_cast<std::size_t>(k)] * it.rho * it.rho * dz[k] * dz[k];

  it.z = z_new;
  it.primal_sq = r2;
  it.dual_sq = s2;
  ++it.iterations;
  it.rho = std::min(it.rho * settings.rho_growth, settings.rho_max);
}

/// Runs rounds until ||r||^2 <= eps_primal and ||s||^2 <= eps_dual or the limit.
/// Returns true on convergence. `it.iterations` counts rounds of this call.
template <class LocalSolve>
bool run_consensus_admm(const ConsensusLayout& layout, ConsensusIterate& it, LocalSolve&& solve,
                        const ConsensusSettings& settings) {
  it.iterations = 0;
  while (it.iterations < settings.max_iterations) {
    consensus_round(layout, it, solve, settings);
    if (it.primal_sq <= settings.eps_primal && it.dual_sq <= settings.eps_dual) return true;
  }
  return false;
}

}  // namespace ehub
