// ehubsim: run, validate, baseline and compare clustered energy hub scenarios.

#include "ehub/errors.hpp"
#include "ehub/log.hpp"
#include "ehub/orchestrator.hpp"
#include "ehub/results.hpp"
#include "ehub/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kInfeasible = 3, kFallback = 4 };

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ehub::Scenario load(const std::string& path, std::optional<std::uint64_t> seed) {
  ehub::Scenario s = ehub::load_scenario(path);
  if (seed) s.seed = *seed;
  s.validate();
  return s;
}

int simulate(const std::string& path, std::optional<std::uint64_t> seed, std::string out_dir, ehub::Controller c,
             const std::string& command) {
  const ehub::Scenario s = load(path, seed);
  if (out_dir.empty()) out_dir = "results/" + s.name + "-" + ehub::to_string(c);

  const auto t0 = std::chrono::steady_clock::now();
  ehub::Simulation sim(s, c);
  while (!sim.done()) sim.step();
  const ehub::ResultSet r = sim.finish();
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ehub::RunInfo info;
  info.config_hash = hex64(ehub::fnv1a(ehub::scenario_to_json(s)));
  info.elapsed_s = elapsed;
  info.command = command;
  ehub::write_results(out_dir, r, sim.topology(), info);

  const auto rows = ehub::summary_rows(r, sim.topology());
  const auto& net = rows.back();
  std::printf("%s %s: J_dec %.2f  J_grid %.2f  c_bid %.2f  benefit %.3f%%  (%.1f s) -> %s\n", s.name.c_str(),
              ehub::to_string(c).c_str(), net.J_dec, net.J_grid, net.c_bid, net.rel_benefit_pct, elapsed,
              out_dir.c_str());
  if (r.fallbacks > 0) {
    ehub::log_msg(1, "%d bargaining game(s) hit the iteration limit; clusters traded internally only", r.fallbacks);
    return kFallback;
  }
  return kOk;
}

int compare(const std::vector<std::string>& dirs) {
  std::printf("%-28s %-24s %14s %14s %12s %10s\n", "run", "entity", "J_dec", "J_grid", "c_bid", "rel_%");
  for (const auto& d : dirs) {
    const auto rows = ehub::read_summary((std::filesystem::path(d) / "summary.csv").string());
    for (const auto& r : rows)
      std::printf("%-28s %-24s %14.4f %14.4f %12.4f %10.4f\n", std::filesystem::path(d).filename().c_str(),
                  r.entity.c_str(), r.J_dec, r.J_grid, r.c_bid, r.rel_benefit_pct);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered energy hub MPC simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, mode = "centralized";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> dirs;

  auto* run = app.add_subcommand("run", "simulate with the clustered controller");
  run->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out-dir", out_dir, "results directory");

  auto* validate = app.add_subcommand("validate", "check a scenario and exit");
  validate->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);

  auto* baseline = app.add_subcommand("baseline", "simulate a reference controller");
  baseline->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  baseline->add_option("--mode", mode, "centralized or decentralized")
      ->check(CLI::IsMember({"centralized", "decentralized"}));
  baseline->add_option("--seed", seed, "override the scenario seed");
  baseline->add_option("--out-dir", out_dir, "results directory");

  auto* cmp = app.add_subcommand("compare", "print summary tables of finished runs");
  cmp->add_option("dirs", dirs, "run directories")->required()->check(CLI::ExistingDirectory);

  auto* preset = app.add_subcommand("preset", "write a built-in desk-scale scenario");
  int hubs_per_cluster = 3;
  std::string season = "winter", out_file;
  ehub::Index duration = 72;
  std::uint64_t preset_seed = 1;
  preset->add_option("--hubs-per-cluster", hubs_per_cluster)->check(CLI::IsMember({1, 3}));
  preset->add_option("--season", season)->check(CLI::IsMember({"winter", "summer", "spring"}));
  preset->add_option("--duration", duration)->check(CLI::PositiveNumber);
  preset->add_option("--seed", preset_seed);
  preset->add_option("output", out_file, "scenario JSON to write")->required();

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);

  try {
    if (*run) return simulate(scenario_path, seed, out_dir, ehub::Controller::clustered, command);
    if (*baseline) return simulate(scenario_path, seed, out_dir, ehub::parse_controller(mode), command);
    if (*validate) {
      const ehub::Scenario s = load(scenario_path, std::nullopt);
      std::printf("%s: ok (%zu hubs, %zu clusters, %ld steps)\n", s.name.c_str(), s.hubs.size(), s.clusters.size(),
                  static_cast<long>(s.duration));
      return kOk;
    }
    if (*cmp) return compare(dirs);
    if (*preset) {
      const auto se = season == "winter" ? ehub::Season::winter
                      : season == "summer" ? ehub::Season::summer
                                           : ehub::Season::spring;
      ehub::save_scenario(ehub::preset_scenario(hubs_per_cluster, se, duration, preset_seed), out_file);
      return kOk;
    }
  } catch (const ehub::InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const ehub::ValidationError& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return kValidation;
  } catch (const ehub::TopologyError& e) {
    std::fprintf(stderr, "invalid topology: %s\n", e.what());
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
