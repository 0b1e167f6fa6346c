#pragma once

#include <cstdint>
#include <vector>

#include "wpcn/sched.hpp"
#include "wpcn/types.hpp"

namespace wpcn {

struct OracleResult {
  double best_total_s = 0.0;
  std::vector<std::vector<int>> best_partition;  // canonical block order
  std::vector<int> best_order;                   // schedule order over blocks
  std::uint64_t evaluated_count = 0;             // sum of zeta! over partitions

  std::vector<std::vector<int>> ordered_blocks() const;
};

// Number of ordered partitions of the user set into cell-compatible blocks
// (subset DP; the closed-form side of the enumeration cross-check).
std::uint64_t ordered_partition_count(const NetworkInstance& inst);

// Same count via explicit partition enumeration, summing zeta_j! per
// admissible partition.
std::uint64_t ordered_partition_count_by_enum(const NetworkInstance& inst);

// Exhaustive minimum over every cell-compatible partition and every block
// order, replayed with full energy bookkeeping. Constant mode waits for a
// block's earliest feasible start; continuous mode starts blocks back to
// back. Hard-capped at 7 users.
OracleResult exact_min_schedule(const NetworkInstance& inst,
                                const RadioConfig& radio, const EhConfig& eh,
                                RateMode mode);

// Independent feasibility check on a uniform power grid over [0, pmax]^|S|.
// Thresholds are the constant-rate SNR in constant mode and the demand-tight
// SNR at t in continuous mode. Members capped at 3.
bool grid_feasibility_oracle(const std::vector<int>& members, double t_s,
                             const ScheduleState& state,
                             const NetworkInstance& inst,
                             const RadioConfig& radio, const EhConfig& eh,
                             int grid_points, RateMode mode);

}  // namespace wpcn
