#pragma once

// CSV and manifest output of a run. Column order is fixed; volatile data
// (timing) only goes to the manifest.

#include "ehub/orchestrator.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace ehub {

/// RFC 4180 field: quoted when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);
/// Shortest round-trip representation.
std::string csv_number(double v);

struct SummaryRow {
  std::string entity;  // cluster:<id>, hub:<id> or network
  double J_dec = 0.0;
  double J_grid = 0.0;
  double c_bid = 0.0;  // penalties included
  double rel_benefit_pct = 0.0;  // 100 (J_grid + c_bid - J_dec) / J_dec, negative is a saving
};

/// Clusters are grouped by the final topology; hubs outside any cluster only appear as hubs.
std::vector<SummaryRow> summary_rows(const ResultSet& results, const NetworkTopology& topology);

void write_timeseries(std::ostream& os, const ResultSet& r);
void write_devices(std::ostream& os, const ResultSet& r);
void write_trace(std::ostream& os, const ResultSet& r);
void write_settlement(std::ostream& os, const ResultSet& r);
void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_mismatch(std::ostream& os, const ResultSet& r);
void write_events(std::ostream& os, const ResultSet& r);
void write_games(std::ostream& os, const ResultSet& r);

struct RunInfo {
  std::string config_hash;  // FNV-1a of the canonical scenario JSON, hex
  double elapsed_s = 0.0;
  std::string command;
};

/// Writes every CSV plus manifest.json into dir (created if missing).
void write_results(const std::string& dir, const ResultSet& r, const NetworkTopology& topology, const RunInfo& info);

/// Reads summary.csv back (used by `compare`).
std::vector<SummaryRow> read_summary(const std::string& path);

}  // namespace ehub
