#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wpcn/powerctl.hpp"
#include "wpcn/types.hpp"

namespace wpcn {

// Per-user individual minimum transmission times at full power, cached per
// instance.
struct PenaltyCtx {
  std::vector<double> t_min_s;

  static PenaltyCtx build(const NetworkInstance& inst,
                          const RadioConfig& radio);
};

// Delay from the state's clock until user n can afford the constant rate on
// its own. +inf when it never can (zero harvest and short battery).
double earliest_start_s(int n, const ScheduleState& state,
                        const NetworkInstance& inst, const RadioConfig& radio,
                        const EhConfig& eh);

// Maximum interference (sum of P*g terms) user n tolerates at transmit power
// p_n before dropping below the constant-rate SNR. May be negative.
double max_affordable_interference(int n, double p_n,
                                   const NetworkInstance& inst,
                                   const RadioConfig& radio);

// Interference user j causes at the serving HAP of user v.
double pairwise_interference(int j, int v,
                             const std::vector<double>& power_by_user_w,
                             const NetworkInstance& inst);

// Per-user interference accounting for one slot under construction: i_max is
// the budget of each feasible user, i_acc the load already placed on each
// selected user. i_acc never exceeds i_max for selected users.
struct InterferenceBudget {
  std::vector<double> i_max;
  std::vector<double> i_acc;

  double margin(int user) const { return i_max[user] - i_acc[user]; }
};

struct CrsaOptions {
  // Debug switch reproducing the affordable-power rule with max() in place
  // of min(); violates the power cap and exists only for A/B inspection.
  bool uncapped_budget_power = false;
};

struct CrsaTrace {
  struct Admission {
    int slot = 0;
    int user = 0;
    double interference_on_user = 0.0;  // sum over prior members
    double budget_of_user = 0.0;
    double min_margin_on_members = 0.0;  // min over members of budget - load
  };
  std::vector<Admission> admissions;
  std::vector<int> evictions;  // users evicted by the feasibility recheck
};

// Constant-rate scheduler: interference-budget grouping with one user per
// cell, idle gaps emitted as empty slots while batteries charge. Every
// emitted slot re-verifies through the feasibility solve.
Schedule crsa(const NetworkInstance& inst, const RadioConfig& radio,
              const EhConfig& eh, const CrsaOptions& opts = {},
              CrsaTrace* trace = nullptr);

// Concurrent slot length minus the sum of the members' individual minimum
// times; negative means the grouping beats the best sequential plan.
double penalty_s(const std::vector<int>& members, const ScheduleState& state,
                 const PenaltyCtx& ctx, const NetworkInstance& inst,
                 const RadioConfig& radio, const EhConfig& eh);

struct PsaTrace {
  struct Acceptance {
    int slot = 0;
    int user = 0;
    double penalty_before = 0.0;
    double penalty_after = 0.0;
  };
  std::vector<Acceptance> acceptances;
  std::vector<double> slot_penalty_s;   // penalty of each emitted slot
  std::vector<double> decision_time_s;  // clock when the slot was formed
};

// Continuous-rate scheduler: seeds each slot with the minimum-penalty user
// and greedily admits users that strictly lower the (negative) penalty.
Schedule psa(const NetworkInstance& inst, const RadioConfig& radio,
             const EhConfig& eh, PsaTrace* trace = nullptr);

// One user per slot, minimum individual penalty first.
Schedule mpa(const NetworkInstance& inst, const RadioConfig& radio,
             const EhConfig& eh);

// One uniformly random pending user from every cell per slot. Falls back to
// the minimum-t_min member alone when the group's slot solve blows through
// its expansion cap.
Schedule mcns(const NetworkInstance& inst, const RadioConfig& radio,
              const EhConfig& eh, std::uint64_t seed);

struct ValidationReport {
  bool valid = true;
  bool each_user_once = true;
  bool one_per_cell = true;
  bool duration_positive = true;
  bool demand_met = true;
  bool snr_ok = true;
  bool pmax_ok = true;
  bool energy_causal = true;
  std::string first_violation;
};

// Full constraint replay: assignment, cell exclusivity, demand, SNR (constant
// mode), power cap, and cumulative energy causality with the battery clip.
ValidationReport validate_schedule(const Schedule& sched,
                                   const NetworkInstance& inst,
                                   const RadioConfig& radio, const EhConfig& eh,
                                   RateMode mode);

}  // namespace wpcn
