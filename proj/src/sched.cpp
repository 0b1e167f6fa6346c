#include "wpcn/sched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wpcn/rng.hpp"

namespace wpcn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPmaxSlack = 1e-12;

double energy_tol(double battery, double harvest, double power, double t) {
  return 1e-12 * (battery + (harvest + power) * t) + 1e-30;
}

// Net battery update over one slot, clipped at the cap on the boundary.
void apply_slot(ScheduleState& state, const Slot& slot,
                const std::vector<double>& harvest_w, double cap_j) {
  for (int n : state.pending) {
    double delta = harvest_w[n] * slot.duration_s;
    for (std::size_t i = 0; i < slot.members.size(); ++i)
      if (slot.members[i] == n) delta -= slot.power_w[i] * slot.duration_s;
    state.battery_j[n] =
        std::max(0.0, std::min(cap_j, state.battery_j[n] + delta));
  }
  for (int n : slot.members) state.pending.erase(n);
  state.now_s += slot.duration_s;
}

// Solo requirement for the constant rate: power and the battery needed at the
// slot start.
struct SoloNeed {
  double power_w = 0.0;    // min(pmax, interference-free requirement)
  double battery_j = 0.0;  // (power - harvest) * D/r, floored at 0
  double slot_s = 0.0;     // D/r
};

SoloNeed solo_need(int n, double harvest_w, const NetworkInstance& inst,
                   const RadioConfig& radio) {
  SoloNeed need;
  const double gamma = radio.const_rate_gamma();
  const double required =
      gamma * effective_noise_w(radio) / inst.gain_own(n);
  need.power_w = std::min(radio.pmax_w, required);
  need.slot_s = inst.demand_bits(n) / radio.const_rate_bps;
  need.battery_j = std::max(0.0, (need.power_w - harvest_w) * need.slot_s);
  return need;
}

double earliest_from(const SoloNeed& need, double battery_j,
                     double harvest_w) {
  if (battery_j + harvest_w * need.slot_s >=
      need.power_w * need.slot_s -
          energy_tol(battery_j, harvest_w, need.power_w, need.slot_s))
    return 0.0;
  if (harvest_w <= 0.0) return kInf;
  return std::max(0.0, (need.power_w * need.slot_s - battery_j) / harvest_w -
                           need.slot_s);
}

}  // namespace

PenaltyCtx PenaltyCtx::build(const NetworkInstance& inst,
                             const RadioConfig& radio) {
  PenaltyCtx ctx;
  const double noise = effective_noise_w(radio);
  ctx.t_min_s.resize(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) {
    const double rate = radio.bandwidth_hz *
                        std::log1p(radio.pmax_w * inst.gain_own(n) / noise) /
                        M_LN2;
    ctx.t_min_s[n] = inst.demand_bits(n) / rate;
  }
  return ctx;
}

double earliest_start_s(int n, const ScheduleState& state,
                        const NetworkInstance& inst, const RadioConfig& radio,
                        const EhConfig& eh) {
  const double c = harvest_rate(n, inst, eh, radio);
  return earliest_from(solo_need(n, c, inst, radio), state.battery_j[n], c);
}

double max_affordable_interference(int n, double p_n,
                                   const NetworkInstance& inst,
                                   const RadioConfig& radio) {
  const double gamma = radio.const_rate_gamma();
  return (p_n * inst.gain_own(n) / gamma - effective_noise_w(radio)) /
         radio.bandwidth_hz;
}

double pairwise_interference(int j, int v,
                             const std::vector<double>& power_by_user_w,
                             const NetworkInstance& inst) {
  return power_by_user_w[j] * inst.gain(j, inst.hap_of[v]);
}

Schedule crsa(const NetworkInstance& inst, const RadioConfig& radio,
              const EhConfig& eh, const CrsaOptions& opts, CrsaTrace* trace) {
  const int K = inst.num_haps;
  const double rate = radio.const_rate_bps;
  const auto harvest = harvest_rates(inst, eh, radio);
  const double gamma = radio.const_rate_gamma();
  const double noise = effective_noise_w(radio);

  // A user that cannot reach the SNR threshold at pmax, or whose battery cap
  // cannot store the required energy, never becomes schedulable.
  std::vector<SoloNeed> needs(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) {
    const double required = gamma * noise / inst.gain_own(n);
    if (required > radio.pmax_w * (1.0 + kPmaxSlack))
      throw ScheduleError("user " + std::to_string(n) +
                          " cannot meet the constant-rate SNR at pmax");
    needs[n] = solo_need(n, harvest[n], inst, radio);
    if (needs[n].battery_j > inst.battery_cap_j)
      throw ScheduleError("battery cap cannot store the energy user " +
                          std::to_string(n) + " needs for the constant rate");
    if (harvest[n] <= 0.0 && needs[n].battery_j > inst.battery_init_j(n))
      throw ScheduleError("user " + std::to_string(n) +
                          " has no harvest and not enough initial energy");
  }

  ScheduleState state = ScheduleState::initial(inst);
  Schedule sched;
  sched.mode = RateMode::kConstant;
  int slot_idx = 0;

  while (!state.pending.empty()) {
    // Advance the clock to the first instant some user can afford the rate.
    double wait = kInf;
    int wait_user = -1;
    for (int n : state.pending) {
      const double ts = earliest_from(needs[n], state.battery_j[n], harvest[n]);
      if (ts < wait) {
        wait = ts;
        wait_user = n;
      }
    }
    if (!std::isfinite(wait))
      throw ScheduleError("no pending user has a finite earliest start");
    if (wait > 0.0) {
      if (state.battery_j[wait_user] >= inst.battery_cap_j * (1.0 - 1e-12))
        throw ScheduleError("user " + std::to_string(wait_user) +
                            " is battery-capped below its energy requirement");
      Slot idle;
      idle.mode = RateMode::kConstant;
      idle.duration_s = wait;
      sched.slots.push_back(idle);
      state.advance_idle(wait, harvest, inst.battery_cap_j);
      ++slot_idx;
      continue;
    }

    // Feasible users, their affordable powers and interference budgets.
    std::vector<int> feas;
    std::vector<double> power_by_user(inst.num_users, 0.0);
    InterferenceBudget budget;
    budget.i_max.assign(inst.num_users, 0.0);
    budget.i_acc.assign(inst.num_users, 0.0);
    for (int n : state.pending) {
      if (earliest_from(needs[n], state.battery_j[n], harvest[n]) > 0.0)
        continue;
      feas.push_back(n);
      const double slot_n = inst.demand_bits(n) / rate;
      const double e_n = state.battery_j[n] + harvest[n] * slot_n;
      const double affordable = e_n / slot_n;
      power_by_user[n] = opts.uncapped_budget_power
                             ? std::max(radio.pmax_w, affordable)
                             : std::min(radio.pmax_w, affordable);
      budget.i_max[n] =
          max_affordable_interference(n, power_by_user[n], inst, radio);
    }

    // Seed with the user that tolerates the most interference.
    int seed = feas.front();
    for (int n : feas)
      if (budget.i_max[n] > budget.i_max[seed]) seed = n;

    std::vector<int> admitted = {seed};

    for (int k = 0; k < K; ++k) {
      if (k == inst.hap_of[seed]) continue;
      std::vector<int> cell;
      for (int n : feas)
        if (inst.hap_of[n] == k) cell.push_back(n);
      std::stable_sort(cell.begin(), cell.end(), [&](int a, int b) {
        if (budget.i_max[a] != budget.i_max[b])
          return budget.i_max[a] > budget.i_max[b];
        return a < b;
      });
      for (int v : cell) {
        double on_v = 0.0;
        for (int j : admitted)
          on_v += pairwise_interference(j, v, power_by_user, inst);
        if (on_v > budget.i_max[v]) break;  // nobody else in this cell fits
        bool fits = true;
        double min_margin = kInf;
        for (int s : admitted) {
          const double i_vs = pairwise_interference(v, s, power_by_user, inst);
          const double margin = budget.margin(s) - i_vs;
          min_margin = std::min(min_margin, margin);
          if (margin < 0.0) {
            fits = false;
            break;
          }
        }
        if (!fits) continue;
        budget.i_acc[v] = on_v;
        for (int s : admitted)
          budget.i_acc[s] += pairwise_interference(v, s, power_by_user, inst);
        if (trace)
          trace->admissions.push_back(
              {slot_idx, v, on_v, budget.i_max[v], min_margin});
        admitted.push_back(v);
        break;
      }
    }

    // The budget admission linearizes the coupling; re-verify through the
    // exact solve and evict the latest admissions until it holds.
    std::optional<SlotSolve> solve;
    while (true) {
      std::vector<int> members = admitted;
      std::sort(members.begin(), members.end());
      solve = constant_rate_slot(members, state, inst, radio, eh);
      if (solve) {
        Slot slot;
        slot.mode = RateMode::kConstant;
        slot.duration_s = solve->duration_s;
        slot.members = members;
        slot.power_w.assign(solve->power_w.data(),
                            solve->power_w.data() + members.size());
        sched.slots.push_back(slot);
        apply_slot(state, slot, harvest, inst.battery_cap_j);
        break;
      }
      if (admitted.size() == 1)
        throw ScheduleError("seed user " + std::to_string(admitted.front()) +
                            " failed the slot feasibility recheck");
      if (trace) trace->evictions.push_back(admitted.back());
      admitted.pop_back();
    }
    ++slot_idx;
  }
  return sched;
}

double penalty_s(const std::vector<int>& members, const ScheduleState& state,
                 const PenaltyCtx& ctx, const NetworkInstance& inst,
                 const RadioConfig& radio, const EhConfig& eh) {
  const SlotSolve solve = fba(members, state, inst, radio, eh);
  double sum_tmin = 0.0;
  for (int n : members) sum_tmin += ctx.t_min_s[n];
  return solve.duration_s - sum_tmin;
}

namespace {

struct SoloSolve {
  SlotSolve slot;
  double penalty = 0.0;
};

// Individual penalties of all pending users at the current decision time.
std::vector<std::pair<int, SoloSolve>> solo_penalties(
    const ScheduleState& state, const PenaltyCtx& ctx,
    const NetworkInstance& inst, const RadioConfig& radio, const EhConfig& eh) {
  std::vector<std::pair<int, SoloSolve>> out;
  out.reserve(state.pending.size());
  for (int n : state.pending) {
    SoloSolve s;
    s.slot = fba({n}, state, inst, radio, eh);
    s.penalty = s.slot.duration_s - ctx.t_min_s[n];
    out.emplace_back(n, s);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second.penalty != b.second.penalty)
      return a.second.penalty < b.second.penalty;
    return a.first < b.first;
  });
  return out;
}

Slot make_member_slot(RateMode mode, const std::vector<int>& members,
                      const SlotSolve& solve) {
  Slot slot;
  slot.mode = mode;
  slot.duration_s = solve.duration_s;
  slot.members = members;
  slot.power_w.assign(solve.power_w.data(),
                      solve.power_w.data() + members.size());
  return slot;
}

}  // namespace

Schedule psa(const NetworkInstance& inst, const RadioConfig& radio,
             const EhConfig& eh, PsaTrace* trace) {
  const PenaltyCtx ctx = PenaltyCtx::build(inst, radio);
  const auto harvest = harvest_rates(inst, eh, radio);
  ScheduleState state = ScheduleState::initial(inst);
  Schedule sched;
  sched.mode = RateMode::kContinuous;
  int slot_idx = 0;

  while (!state.pending.empty()) {
    const auto order = solo_penalties(state, ctx, inst, radio, eh);

    const int seed = order.front().first;
    std::vector<int> members = {seed};
    SlotSolve current = order.front().second.slot;
    double rho = order.front().second.penalty;
    std::vector<char> cell_taken(inst.num_haps, 0);
    cell_taken[inst.hap_of[seed]] = 1;

    for (std::size_t idx = 1; idx < order.size(); ++idx) {
      const int cand = order[idx].first;
      if (cell_taken[inst.hap_of[cand]]) continue;
      std::vector<int> extended = members;
      extended.insert(
          std::upper_bound(extended.begin(), extended.end(), cand), cand);
      SlotSolve solve;
      try {
        solve = fba(extended, state, inst, radio, eh);
      } catch (const ExpansionCapError&) {
        continue;  // group unbounded at this state: reject the candidate
      }
      double sum_tmin = 0.0;
      for (int n : extended) sum_tmin += ctx.t_min_s[n];
      const double rho_ext = solve.duration_s - sum_tmin;
      if (rho_ext < rho && rho_ext < 0.0) {
        if (trace) trace->acceptances.push_back({slot_idx, cand, rho, rho_ext});
        members = std::move(extended);
        current = std::move(solve);
        rho = rho_ext;
        cell_taken[inst.hap_of[cand]] = 1;
      }
    }

    if (trace) {
      trace->slot_penalty_s.push_back(rho);
      trace->decision_time_s.push_back(state.now_s);
    }
    const Slot slot = make_member_slot(RateMode::kContinuous, members, current);
    sched.slots.push_back(slot);
    apply_slot(state, slot, harvest, inst.battery_cap_j);
    ++slot_idx;
  }
  return sched;
}

Schedule mpa(const NetworkInstance& inst, const RadioConfig& radio,
             const EhConfig& eh) {
  const PenaltyCtx ctx = PenaltyCtx::build(inst, radio);
  const auto harvest = harvest_rates(inst, eh, radio);
  ScheduleState state = ScheduleState::initial(inst);
  Schedule sched;
  sched.mode = RateMode::kContinuous;

  while (!state.pending.empty()) {
    const auto order = solo_penalties(state, ctx, inst, radio, eh);
    const Slot slot = make_member_slot(
        RateMode::kContinuous, {order.front().first}, order.front().second.slot);
    sched.slots.push_back(slot);
    apply_slot(state, slot, harvest, inst.battery_cap_j);
  }
  return sched;
}

Schedule mcns(const NetworkInstance& inst, const RadioConfig& radio,
              const EhConfig& eh, std::uint64_t seed) {
  const PenaltyCtx ctx = PenaltyCtx::build(inst, radio);
  const auto harvest = harvest_rates(inst, eh, radio);
  const auto cells = inst.users_by_cell();
  Rng rng(seed);
  ScheduleState state = ScheduleState::initial(inst);
  Schedule sched;
  sched.mode = RateMode::kContinuous;

  while (!state.pending.empty()) {
    std::vector<int> members;
    for (int k = 0; k < inst.num_haps; ++k) {
      std::vector<int> avail;
      for (int n : cells[k])
        if (state.pending.count(n)) avail.push_back(n);
      if (!avail.empty()) members.push_back(avail[rng.below(avail.size())]);
    }
    std::sort(members.begin(), members.end());

    Slot slot;
    try {
      slot = make_member_slot(RateMode::kContinuous, members,
                              fba(members, state, inst, radio, eh));
    } catch (const ExpansionCapError&) {
      // Random group with no bounded slot: schedule its quickest member alone.
      int u = members.front();
      for (int n : members)
        if (ctx.t_min_s[n] < ctx.t_min_s[u]) u = n;
      slot = make_member_slot(RateMode::kContinuous, {u},
                              fba({u}, state, inst, radio, eh));
    }
    sched.slots.push_back(slot);
    apply_slot(state, slot, harvest, inst.battery_cap_j);
  }
  return sched;
}

ValidationReport validate_schedule(const Schedule& sched,
                                   const NetworkInstance& inst,
                                   const RadioConfig& radio, const EhConfig& eh,
                                   RateMode mode) {
  ValidationReport rep;
  auto fail = [&](bool& flag, const std::string& msg) {
    flag = false;
    if (rep.valid) {
      rep.valid = false;
      rep.first_violation = msg;
    }
  };

  const double gamma = radio.const_rate_gamma();
  std::vector<int> appearances(inst.num_users, 0);

  for (std::size_t m = 0; m < sched.slots.size(); ++m) {
    const Slot& slot = sched.slots[m];
    const std::string where = "slot " + std::to_string(m);
    if (!(slot.duration_s > 0.0))
      fail(rep.duration_positive, where + ": non-positive duration");
    if (slot.power_w.size() != slot.members.size())
      fail(rep.pmax_ok, where + ": power vector size mismatch");

    std::vector<int> per_cell(inst.num_haps, 0);
    for (std::size_t i = 0; i < slot.members.size(); ++i) {
      const int n = slot.members[i];
      ++appearances[n];
      if (++per_cell[inst.hap_of[n]] > 1)
        fail(rep.one_per_cell, where + ": two users share cell " +
                                   std::to_string(inst.hap_of[n]));
      const double p = slot.power_w[i];
      if (!(p > 0.0) || p > radio.pmax_w * (1.0 + kPmaxSlack))
        fail(rep.pmax_ok, where + ": power of user " + std::to_string(n) +
                              " outside (0, pmax]");
      if (mode == RateMode::kConstant) {
        const double s = snr(n, slot.members, slot.power_w, inst, radio);
        if (s < gamma * (1.0 - 1e-7))
          fail(rep.snr_ok, where + ": user " + std::to_string(n) +
                               " below the constant-rate SNR");
        const double bits = radio.const_rate_bps * slot.duration_s;
        if (bits < inst.demand_bits(n) - 1e-6)
          fail(rep.demand_met,
               where + ": user " + std::to_string(n) + " demand unmet");
      } else {
        const double bits =
            rate_continuous_bps(n, slot.members, slot.power_w, inst, radio) *
            slot.duration_s;
        if (bits < inst.demand_bits(n) - 1e-6)
          fail(rep.demand_met,
               where + ": user " + std::to_string(n) + " demand unmet");
      }
    }
  }

  for (int n = 0; n < inst.num_users; ++n)
    if (appearances[n] != 1)
      fail(rep.each_user_once, "user " + std::to_string(n) + " appears in " +
                                   std::to_string(appearances[n]) + " slots");

  // Cumulative energy replay with the battery clip at slot boundaries.
  for (int n = 0; n < inst.num_users; ++n) {
    const double c = harvest_rate(n, inst, eh, radio);
    double battery = inst.battery_init_j(n);
    for (std::size_t m = 0; m < sched.slots.size(); ++m) {
      const Slot& slot = sched.slots[m];
      double delta = c * slot.duration_s;
      for (std::size_t i = 0; i < slot.members.size(); ++i)
        if (slot.members[i] == n) {
          const double p = slot.power_w[i];
          delta -= p * slot.duration_s;
          if (battery + delta < -energy_tol(battery, c, p, slot.duration_s))
            fail(rep.energy_causal,
                 "slot " + std::to_string(m) + ": user " + std::to_string(n) +
                     " violates energy causality");
        }
      battery = std::min(inst.battery_cap_j, battery + delta);
    }
  }
  return rep;
}

}  // namespace wpcn
