#include "ehub/schedule.hpp"

#include "ehub/errors.hpp"

namespace ehub {

void Schedule::validate() const {
  if (T_cl <= 0 || T_hb <= 0 || t_rh <= 0 || t_f <= 0) throw ValidationError("schedule: all periods must be positive");
  if (T_cl % t_rh != 0) throw ValidationError("schedule: T_cl must be a multiple of t_rh");
  if (T_hb % t_rh != 0) throw ValidationError("schedule: T_hb must be a multiple of t_rh");
  if (t_f % t_rh != 0) throw ValidationError("schedule: t_f must be a multiple of t_rh");
  if (T_cl < t_rh + T_hb)
    throw ValidationError("schedule: T_cl = " + std::to_string(T_cl) + " is shorter than t_rh + T_hb = " +
                          std::to_string(t_rh + T_hb));
}

double average_bid(const BidHistory& history, Index t, const Schedule& schedule) {
  if (history.empty()) throw ValidationError("average bid: empty bid history");
  if (t % schedule.t_rh != 0) throw ValidationError("average bid: t is not a multiple of t_rh");
  const Index zeta = schedule.zeta();
  double sum = 0.0;
  int n = 0;
  for (Index s = 0; s < zeta; ++s) {
    auto it = history.find(t - s * schedule.t_rh);
    if (it == history.end()) continue;
    sum += it->second / static_cast<double>(zeta);
    ++n;
  }
  if (n == 0) throw ValidationError("average bid: no game inside the averaging window");
  return sum / n;
}

}  // namespace ehub
