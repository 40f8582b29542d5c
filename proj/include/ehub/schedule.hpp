#pragma once

// Timing of the two control layers and the averaged cluster bid.

#include "ehub/solver.hpp"

#include <map>
#include <string>

namespace ehub {

struct Schedule {
  Index T_cl = 24;  // bargaining horizon
  Index T_hb = 12;  // interim horizon
  Index t_rh = 12;  // bargaining period
  Index t_f = 72;   // settlement period

  Index zeta() const { return T_cl / t_rh; }
  bool bargaining_step(Index t) const { return t % t_rh == 0; }
  /// Throws ValidationError when the horizons cannot cover each other.
  void validate() const;
};

/// C*_m per game time, for one cluster.
using BidHistory = std::map<Index, double>;

/// C_avg(t) = 1/n sum_{s<n} C*(t - s t_rh) / zeta, where the sum runs over the
/// last zeta games and n counts those present in the history (n < zeta only
/// at startup).
double average_bid(const BidHistory& history, Index t, const Schedule& schedule);

}  // namespace ehub
