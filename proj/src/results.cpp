#include "ehub/results.hpp"

#include "ehub/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ehub {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

class Row {
 public:
  explicit Row(std::ostream& os) : os_(os) {}
  ~Row() { os_ << "\r\n"; }
  Row& operator<<(const std::string& s) { return put(csv_field(s)); }
  Row& operator<<(const char* s) { return put(csv_field(s)); }
  Row& operator<<(double v) { return put(csv_number(v)); }
  Row& operator<<(Index v) { return put(std::to_string(v)); }
  Row& operator<<(int v) { return put(std::to_string(v)); }
  Row& operator<<(bool v) { return put(v ? "1" : "0"); }

 private:
  Row& put(const std::string& s) {
    if (!first_) os_ << ',';
    first_ = false;
    os_ << s;
    return *this;
  }
  std::ostream& os_;
  bool first_ = true;
};

void header(std::ostream& os, std::initializer_list<const char*> cols) {
  Row r(os);
  for (const char* c : cols) r << c;
}

double rel(double J_grid, double c_bid, double J_dec) {
  return J_dec != 0.0 ? 100.0 * (J_grid + c_bid - J_dec) / J_dec : 0.0;
}

const char* kChannelNames[kChannels] = {"u_gas_in", "u_elec_in", "u_heat_in", "u_elec_out", "u_heat_out"};

}  // namespace

std::vector<SummaryRow> summary_rows(const ResultSet& results, const NetworkTopology& topology) {
  std::vector<SummaryRow> rows;
  auto add = [](SummaryRow& row, const HubTotals& h) {
    row.J_dec += h.J_dec;
    row.J_grid += h.J_grid;
    row.c_bid += h.c_bid + h.c_pen;
  };
  for (const auto& c : topology.clusters) {
    if (!c.active) continue;
    SummaryRow row;
    row.entity = "cluster:" + c.id;
    for (const auto& id : c.hubs) add(row, results.hub(id));
    rows.push_back(row);
  }
  SummaryRow network;
  network.entity = "network";
  for (const auto& h : results.hubs) {
    SummaryRow row;
    row.entity = "hub:" + h.hub;
    add(row, h);
    add(network, h);
    rows.push_back(row);
  }
  rows.push_back(network);
  for (auto& r : rows) r.rel_benefit_pct = rel(r.J_grid, r.c_bid, r.J_dec);
  return rows;
}

void write_timeseries(std::ostream& os, const ResultSet& r) {
  header(os, {"t", "hub", "cluster", "e_out", "e_in", "gas", "p_bid", "q_bid", "grid_cost", "mismatch_cost",
              "dec_cost"});
  for (const auto& s : r.timeseries)
    Row(os) << s.t << s.hub << s.cluster << s.e_out << s.e_in << s.gas << s.p_bid << s.q_bid << s.grid_cost
            << s.mismatch_cost << s.dec_cost;
}

void write_devices(std::ostream& os, const ResultSet& r) {
  {
    Row h(os);
    h << "t" << "hub" << "device";
    for (const char* c : kChannelNames) h << c;
    h << "state";
  }
  for (const auto& d : r.devices) {
    Row row(os);
    row << d.t << d.hub << d.device;
    for (int c = 0; c < kChannels; ++c) row << d.u[c];
    row << d.state;
  }
}

void write_trace(std::ostream& os, const ResultSet& r) {
  header(os, {"game_t", "iteration", "cluster", "mu", "P_total", "C", "dJ", "y_norm", "r_norm", "s_norm",
              "max_abs_sum_P", "sum_C", "inner_iterations", "inner_converged"});
  for (const auto& tr : r.trace) {
    const TraceRow& x = tr.row;
    Row(os) << tr.game_t << x.iteration << x.cluster << x.mu << x.P_total << x.C << x.dJ << x.y_norm << x.r_norm
            << x.s_norm << x.max_abs_sum_P << x.sum_C << x.inner_iterations << x.inner_converged;
  }
}

void write_settlement(std::ostream& os, const ResultSet& r) {
  header(os, {"window_start", "window_end", "cluster", "pnp", "C_bar", "beta", "gamma", "hub", "J_grid_in",
              "J_dec_in", "J_dec_out", "c_bid", "c_pen", "hub_beta"});
  for (const auto& s : r.settlements)
    for (const auto& h : s.hubs)
      Row(os) << s.window_start << s.window_end << s.cluster << s.pnp << s.C_bar << s.beta << s.gamma << h.hub
              << h.J_grid_in << h.J_dec_in << h.J_dec_out << h.c_bid << h.c_pen << h.beta;
}

void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
  header(os, {"entity", "J_dec", "J_grid", "c_bid", "rel_benefit_pct"});
  for (const auto& s : rows) Row(os) << s.entity << s.J_dec << s.J_grid << s.c_bid << s.rel_benefit_pct;
}

void write_mismatch(std::ostream& os, const ResultSet& r) {
  header(os, {"t", "cluster", "obligation", "planned", "elec_delta", "elec_cost", "heat_shortage", "heat_cost",
              "heat_waste", "converged"});
  for (const auto& m : r.mismatch)
    Row(os) << m.t << m.cluster << m.obligation << m.planned << m.elec_delta << m.elec_cost << m.heat_shortage
            << m.heat_cost << m.heat_waste << m.converged;
}

void write_events(std::ostream& os, const ResultSet& r) {
  header(os, {"t", "kind", "hub", "cluster"});
  for (const auto& e : r.events) Row(os) << e.time << to_string(e.kind) << e.hub << e.cluster;
}

void write_games(std::ostream& os, const ResultSet& r) {
  header(os, {"t", "cluster", "participant", "converged", "iterations", "P_total", "C", "dJ", "c_avg"});
  for (const auto& g : r.games) {
    for (const auto& [id, c_avg] : g.c_avg) {
      const ClusterBid* bid = nullptr;
      for (const auto& b : g.bids)
        if (b.cluster == id) bid = &b;
      Row(os) << g.t << id << (bid != nullptr) << g.converged << g.iterations << (bid ? bid->P.sum() : 0.0)
              << (bid ? bid->C : 0.0) << (bid ? bid->dJ : 0.0) << c_avg;
    }
  }
}

void write_results(const std::string& dir, const ResultSet& r, const NetworkTopology& topology, const RunInfo& info) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());

  auto emit = [&](const std::string& name, auto&& writer) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
  };
  emit("timeseries.csv", [&](std::ostream& os) { write_timeseries(os, r); });
  emit("devices.csv", [&](std::ostream& os) { write_devices(os, r); });
  emit("bargaining_trace.csv", [&](std::ostream& os) { write_trace(os, r); });
  emit("settlement.csv", [&](std::ostream& os) { write_settlement(os, r); });
  emit("summary.csv", [&](std::ostream& os) { write_summary(os, summary_rows(r, topology)); });
  emit("mismatch.csv", [&](std::ostream& os) { write_mismatch(os, r); });
  emit("events.csv", [&](std::ostream& os) { write_events(os, r); });
  emit("games.csv", [&](std::ostream& os) { write_games(os, r); });

  nlohmann::ordered_json m;
  m["schema"] = "ehubsim-results/1";
  m["scenario"] = r.scenario;
  m["controller"] = to_string(r.controller);
  m["seed"] = r.seed;
  m["config_hash"] = info.config_hash;
  m["duration"] = r.duration;
  m["fallbacks"] = r.fallbacks;
  m["interim_limit_hits"] = r.interim_limit_hits;
  m["elapsed_s"] = info.elapsed_s;
  if (!info.command.empty()) m["command"] = info.command;
  m["files"] = {"timeseries.csv", "devices.csv",  "bargaining_trace.csv", "settlement.csv",
                "summary.csv",    "mismatch.csv", "events.csv",           "games.csv"};
  emit("manifest.json", [&](std::ostream& os) { os << m.dump(2) << "\n"; });
}

namespace {

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<SummaryRow> read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || parse_csv_line(line) !=
                                     std::vector<std::string>{"entity", "J_dec", "J_grid", "c_bid", "rel_benefit_pct"})
    throw ValidationError(path + ": unexpected summary header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 5) throw ValidationError(path + ": malformed row '" + line + "'");
    rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
  }
  return rows;
}

}  // namespace ehub
