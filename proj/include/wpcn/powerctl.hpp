#pragma once

#include <optional>
#include <vector>

#include "wpcn/model.hpp"
#include "wpcn/types.hpp"

namespace wpcn {

// Relative-gain system for a concurrent group: gain_matrix holds
// g[j][hap(i)]/g[i][hap(i)] off-diagonal, thresholds the per-member SNR
// targets, noise_vec the normalized noise powers.
struct PfSystem {
  MatrixXd gain_matrix;
  VectorXd thresholds;
  VectorXd noise_vec;
};

PfSystem build_pf_system(const std::vector<int>& members,
                         const VectorXd& gammas, const NetworkInstance& inst,
                         const RadioConfig& radio);

// Feasibility of the group at the given SNR targets. When the spectral
// radius of the threshold-scaled coupling matrix is below 1, carries the
// component-wise minimum power vector; at that vector every member's SINR
// meets its target with equality. energy_ok is left for the caller.
PfResult pf_min_power(const std::vector<int>& members, const VectorXd& gammas,
                      const NetworkInstance& inst, const RadioConfig& radio);

// SNR that fits d_bits into t_s seconds exactly.
double required_snr(double d_bits, double t_s, const RadioConfig& radio);

// Energy causality over one slot: battery + (harvest - power) * t >= 0 for
// every member, batteries read at the slot start.
bool energy_ok(const VectorXd& powers_w, double t_s, const ScheduleState& state,
               const std::vector<double>& harvest_w,
               const std::vector<int>& members);

struct SlotSolve {
  double duration_s = 0.0;
  VectorXd power_w;
};

// Constant-rate slot for a fixed group: duration max D_n/r, powers from the
// feasibility solve. Empty when power- or energy-infeasible.
std::optional<SlotSolve> constant_rate_slot(const std::vector<int>& members,
                                            const ScheduleState& state,
                                            const NetworkInstance& inst,
                                            const RadioConfig& radio,
                                            const EhConfig& eh);

// Inner feasibility test of the bisection: demand-tight SNR targets at slot
// length t, power cap, and energy causality at the state's batteries.
std::optional<VectorXd> slot_feasible_at(const std::vector<int>& members,
                                         double t_s,
                                         const ScheduleState& state,
                                         const NetworkInstance& inst,
                                         const RadioConfig& radio,
                                         const EhConfig& eh);

struct FbaBounds {
  double t_lower = 0.0;  // zero-interference bound
  double t_upper = 0.0;  // all-pmax-interference bound
};

FbaBounds fba_bounds(const std::vector<int>& members,
                     const NetworkInstance& inst, const RadioConfig& radio);

// Minimum-length slot for a concurrent group via bisection on the slot
// length. The upper bound is doubled until feasible when energy causality
// defeats the interference bound; throws ExpansionCapError past the cap.
SlotSolve fba(const std::vector<int>& members, const ScheduleState& state,
              const NetworkInstance& inst, const RadioConfig& radio,
              const EhConfig& eh, int max_doublings = 20);

}  // namespace wpcn
