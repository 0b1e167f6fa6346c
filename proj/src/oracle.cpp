#include "wpcn/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace wpcn {

namespace {

constexpr int kMaxOracleUsers = 7;

std::vector<std::uint32_t> cell_masks(const NetworkInstance& inst) {
  std::vector<std::uint32_t> masks(inst.num_haps, 0);
  for (int n = 0; n < inst.num_users; ++n)
    masks[inst.hap_of[n]] |= 1u << n;
  return masks;
}

bool block_admissible(std::uint32_t block,
                      const std::vector<std::uint32_t>& cells) {
  for (std::uint32_t c : cells)
    if (std::popcount(block & c) > 1) return false;
  return true;
}

std::vector<int> block_members(std::uint32_t block) {
  std::vector<int> members;
  for (int n = 0; block; ++n, block >>= 1)
    if (block & 1u) members.push_back(n);
  return members;
}

// f[mask] = number of ordered cell-compatible partitions of `mask`.
std::vector<std::uint64_t> ordered_count_table(const NetworkInstance& inst) {
  const auto cells = cell_masks(inst);
  const std::uint32_t full = (1u << inst.num_users) - 1;
  std::vector<std::uint64_t> f(full + 1, 0);
  f[0] = 1;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    std::uint64_t total = 0;
    for (std::uint32_t sub = mask; sub; sub = (sub - 1) & mask)
      if (block_admissible(sub, cells)) total += f[mask ^ sub];
    f[mask] = total;
  }
  return f;
}

std::uint64_t factorial(std::size_t n) {
  std::uint64_t r = 1;
  for (std::size_t i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

std::vector<std::vector<int>> OracleResult::ordered_blocks() const {
  std::vector<std::vector<int>> blocks;
  blocks.reserve(best_order.size());
  for (int idx : best_order) blocks.push_back(best_partition[idx]);
  return blocks;
}

std::uint64_t ordered_partition_count(const NetworkInstance& inst) {
  if (inst.num_users > kMaxOracleUsers)
    throw OracleError("enumeration capped at 7 users");
  return ordered_count_table(inst).back();
}

std::uint64_t ordered_partition_count_by_enum(const NetworkInstance& inst) {
  if (inst.num_users > kMaxOracleUsers)
    throw OracleError("enumeration capped at 7 users");
  const auto cells = cell_masks(inst);
  std::uint64_t total = 0;
  std::vector<std::uint32_t> blocks;
  // Every set partition is reached once by assigning users in order to an
  // existing block or a fresh one.
  auto assign = [&](auto&& self, int user) -> void {
    if (user == inst.num_users) {
      total += factorial(blocks.size());
      return;
    }
    const std::uint32_t bit = 1u << user;
    const std::size_t depth = blocks.size();  // recursion grows the vector
    for (std::size_t i = 0; i < depth; ++i) {
      if (!block_admissible(blocks[i] | bit, cells)) continue;
      blocks[i] |= bit;
      self(self, user + 1);
      blocks[i] &= ~bit;
    }
    blocks.push_back(bit);
    self(self, user + 1);
    blocks.pop_back();
  };
  assign(assign, 0);
  return total;
}

namespace {

struct DfsContext {
  const NetworkInstance& inst;
  const RadioConfig& radio;
  const EhConfig& eh;
  RateMode mode;

  DfsContext(const NetworkInstance& i, const RadioConfig& r, const EhConfig& e,
             RateMode m)
      : inst(i), radio(r), eh(e), mode(m) {}
  std::vector<std::uint32_t> cells;
  std::vector<std::uint64_t> count_table;
  std::vector<double> harvest;
  ScheduleState state;  // batteries mutated along the DFS path

  double best_total = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> current;
  std::vector<std::uint32_t> best_sequence;
  std::uint64_t evaluated = 0;
};

// Evaluates one block at the current batteries. Returns the elapsed time
// (wait + slot) or nothing when the block can never run here; fills powers
// and the slot length.
std::optional<double> eval_block(DfsContext& ctx, const std::vector<int>& members,
                                 double* slot_s, VectorXd* powers,
                                 double* wait_s) {
  *wait_s = 0.0;
  if (ctx.mode == RateMode::kConstant) {
    const double gamma = ctx.radio.const_rate_gamma();
    const VectorXd gammas = VectorXd::Constant(members.size(), gamma);
    const PfResult pf = pf_min_power(members, gammas, ctx.inst, ctx.radio);
    if (!pf.feasible_power()) return std::nullopt;
    double t = 0.0;
    for (int n : members)
      t = std::max(t, ctx.inst.demand_bits(n) / ctx.radio.const_rate_bps);
    // Earliest start: wait until every member's battery covers its net drain.
    double wait = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const int n = members[i];
      const double drain = ((*pf.min_power_w)(i) - ctx.harvest[n]) * t;
      if (drain <= ctx.state.battery_j[n]) continue;
      if (drain > ctx.inst.battery_cap_j) return std::nullopt;
      if (ctx.harvest[n] <= 0.0) return std::nullopt;
      wait = std::max(wait, (drain - ctx.state.battery_j[n]) / ctx.harvest[n]);
    }
    *wait_s = wait;
    *slot_s = t;
    *powers = *pf.min_power_w;
    return wait + t;
  }
  try {
    const SlotSolve solve = fba(members, ctx.state, ctx.inst, ctx.radio, ctx.eh);
    *slot_s = solve.duration_s;
    *powers = solve.power_w;
    return solve.duration_s;
  } catch (const ExpansionCapError&) {
    return std::nullopt;
  }
}

void dfs(DfsContext& ctx, std::uint32_t mask, double time_acc) {
  if (mask == 0) {
    ++ctx.evaluated;
    if (time_acc < ctx.best_total) {
      ctx.best_total = time_acc;
      ctx.best_sequence = ctx.current;
    }
    return;
  }
  for (std::uint32_t sub = mask; sub; sub = (sub - 1) & mask) {
    if (!block_admissible(sub, ctx.cells)) continue;
    const auto members = block_members(sub);
    double slot_s = 0.0;
    double wait_s = 0.0;
    VectorXd powers;
    const auto elapsed = eval_block(ctx, members, &slot_s, &powers, &wait_s);
    if (!elapsed) {
      // Every ordering continuing from this prefix is infeasible: skip all of
      // them but keep the enumeration count exact.
      ctx.evaluated += ctx.count_table[mask ^ sub];
      continue;
    }

    // Batteries of users still in `mask` move forward by wait + slot.
    std::vector<double> saved;
    saved.reserve(std::popcount(mask));
    for (int n = 0; n < ctx.inst.num_users; ++n)
      if (mask & (1u << n)) saved.push_back(ctx.state.battery_j[n]);
    for (int n = 0; n < ctx.inst.num_users; ++n) {
      if (!(mask & (1u << n))) continue;
      double b = std::min(ctx.inst.battery_cap_j,
                          ctx.state.battery_j[n] + ctx.harvest[n] * wait_s);
      double delta = ctx.harvest[n] * slot_s;
      for (std::size_t i = 0; i < members.size(); ++i)
        if (members[i] == n) delta -= powers(i) * slot_s;
      ctx.state.battery_j[n] =
          std::max(0.0, std::min(ctx.inst.battery_cap_j, b + delta));
    }

    ctx.current.push_back(sub);
    dfs(ctx, mask ^ sub, time_acc + *elapsed);
    ctx.current.pop_back();

    std::size_t idx = 0;
    for (int n = 0; n < ctx.inst.num_users; ++n)
      if (mask & (1u << n)) ctx.state.battery_j[n] = saved[idx++];
  }
}

}  // namespace

OracleResult exact_min_schedule(const NetworkInstance& inst,
                                const RadioConfig& radio, const EhConfig& eh,
                                RateMode mode) {
  if (inst.num_users > kMaxOracleUsers)
    throw OracleError("enumeration capped at 7 users");

  DfsContext ctx(inst, radio, eh, mode);
  ctx.cells = cell_masks(inst);
  ctx.count_table = ordered_count_table(inst);
  ctx.harvest = harvest_rates(inst, eh, radio);
  ctx.state = ScheduleState::initial(inst);

  const std::uint32_t full = (1u << inst.num_users) - 1;
  dfs(ctx, full, 0.0);

  OracleResult res;
  res.evaluated_count = ctx.evaluated;
  if (!std::isfinite(ctx.best_total))
    throw OracleError("no feasible ordering exists for the instance");
  res.best_total_s = ctx.best_total;

  // Canonical partition: blocks sorted by their smallest member.
  std::vector<std::uint32_t> canonical = ctx.best_sequence;
  std::sort(canonical.begin(), canonical.end(),
            [](std::uint32_t a, std::uint32_t b) {
              return std::countr_zero(a) < std::countr_zero(b);
            });
  for (std::uint32_t block : canonical)
    res.best_partition.push_back(block_members(block));
  for (std::uint32_t block : ctx.best_sequence) {
    const auto it = std::find(canonical.begin(), canonical.end(), block);
    res.best_order.push_back(static_cast<int>(it - canonical.begin()));
  }
  return res;
}

bool grid_feasibility_oracle(const std::vector<int>& members, double t_s,
                             const ScheduleState& state,
                             const NetworkInstance& inst,
                             const RadioConfig& radio, const EhConfig& eh,
                             int grid_points, RateMode mode) {
  if (members.size() > 3)
    throw OracleError("grid oracle capped at 3 members");
  if (grid_points < 2) throw OracleError("need at least 2 grid points");

  const int m = static_cast<int>(members.size());
  std::vector<double> gammas(m);
  std::vector<double> harvest(m);
  for (int i = 0; i < m; ++i) {
    gammas[i] = mode == RateMode::kConstant
                    ? radio.const_rate_gamma()
                    : required_snr(inst.demand_bits(members[i]), t_s, radio);
    harvest[i] = harvest_rate(members[i], inst, eh, radio);
  }

  const double step = radio.pmax_w / (grid_points - 1);
  std::vector<int> idx(m, 0);
  std::vector<double> powers(m, 0.0);
  while (true) {
    for (int i = 0; i < m; ++i) powers[i] = idx[i] * step;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      if (snr(members[i], members, powers, inst, radio) < gammas[i]) ok = false;
      const double b = state.battery_j[members[i]];
      if (b + (harvest[i] - powers[i]) * t_s < 0.0) ok = false;
    }
    if (ok) return true;
    int d = 0;
    while (d < m && ++idx[d] == grid_points) idx[d++] = 0;
    if (d == m) return false;
  }
}

}  // namespace wpcn
