#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/sched.hpp"
#include "wpcn/serialize.hpp"

using namespace wpcn;

namespace {

// Own gains high enough that the constant rate is reachable at the default
// pmax; cross gains negligible unless a test says otherwise.
NetworkInstance isolated_cells(int num_cells, double g_own = 1e-4,
                               double g_cross = 1e-15,
                               double battery_init = 1e-3) {
  MatrixXd up = MatrixXd::Constant(num_cells, num_cells, g_cross);
  for (int i = 0; i < num_cells; ++i) up(i, i) = g_own;
  const MatrixXd down = MatrixXd::Constant(num_cells, num_cells, 1e-4);
  std::vector<int> cells(num_cells);
  for (int i = 0; i < num_cells; ++i) cells[i] = i;
  return test::make_instance(num_cells, cells, up, down, 100.0, battery_init);
}

int member_slot_count(const Schedule& s) {
  int c = 0;
  for (const auto& slot : s.slots)
    if (!slot.is_idle()) ++c;
  return c;
}

}  // namespace

TEST_CASE("earliest start") {
  RadioConfig radio;
  EhConfig eh;
  auto inst = isolated_cells(1);
  auto st = ScheduleState::initial(inst);
  const double c = harvest_rate(0, inst, eh, radio);
  const double gamma = radio.const_rate_gamma();
  const double p_min = std::min(
      radio.pmax_w, gamma * effective_noise_w(radio) / inst.gain_own(0));
  const double d_over_r = 100.0 / radio.const_rate_bps;

  SUBCASE("full battery starts immediately") {
    st.battery_j[0] = p_min * d_over_r;
    CHECK(earliest_start_s(0, st, inst, radio, eh) == 0.0);
  }
  SUBCASE("empty battery matches the closed form") {
    st.battery_j[0] = 0.0;
    const double expected = p_min * 100.0 / (c * radio.const_rate_bps) -
                            d_over_r;
    CHECK(earliest_start_s(0, st, inst, radio, eh) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("mid battery matches a microsecond time scan") {
    st.battery_j[0] = 0.4 * p_min * d_over_r;
    const double got = earliest_start_s(0, st, inst, radio, eh);
    double scan = 0.0;
    const double b = st.battery_j[0];
    while (b + c * (scan + d_over_r) < p_min * d_over_r) scan += 1e-6;
    CHECK(got == doctest::Approx(scan).epsilon(1e-3));
    CHECK(std::abs(got - scan) <= 1e-6 + 1e-9 * scan);
  }
  SUBCASE("no harvest and short battery never starts") {
    auto dead = inst;
    dead.downlink_gain = MatrixXd::Constant(1, 1, 1e-300);
    st.battery_j[0] = 0.0;
    CHECK(std::isinf(earliest_start_s(0, st, dead, radio, eh)));
  }
}

TEST_CASE("max affordable interference") {
  RadioConfig radio;
  const auto inst = isolated_cells(1);
  const double gamma = radio.const_rate_gamma();
  const double f = effective_noise_w(radio);
  SUBCASE("zero exactly at the interference-free power") {
    const double p0 = gamma * f / inst.gain_own(0);
    CHECK(max_affordable_interference(0, p0, inst, radio) ==
          doctest::Approx(0.0).scale(p0));
  }
  SUBCASE("affine with slope g/(gamma W)") {
    const double i1 = max_affordable_interference(0, 2e-5, inst, radio);
    const double i2 = max_affordable_interference(0, 7e-5, inst, radio);
    CHECK((i2 - i1) / 5e-5 ==
          doctest::Approx(inst.gain_own(0) /
                          (gamma * radio.bandwidth_hz)).epsilon(1e-12));
  }
  SUBCASE("matches a direct evaluation") {
    const double p = 6.25e-5;
    CHECK(max_affordable_interference(0, p, inst, radio) ==
          doctest::Approx((p * inst.gain_own(0) / gamma - f) /
                          radio.bandwidth_hz));
  }
}

TEST_CASE("pairwise interference") {
  const auto inst = test::make_pair_instance(1e-4, 1e-4, 3e-8, 3e-8);
  std::vector<double> p(2, 0.0);
  SUBCASE("zero power, zero interference") {
    p = {0.0, 5e-5};
    CHECK(pairwise_interference(0, 1, p, inst) == 0.0);
  }
  SUBCASE("linear in power") {
    p = {2e-5, 0.0};
    const double base = pairwise_interference(0, 1, p, inst);
    p[0] *= 2.0;
    CHECK(pairwise_interference(0, 1, p, inst) ==
          doctest::Approx(2.0 * base).epsilon(1e-12));
  }
  SUBCASE("symmetric gains give the reciprocity identity") {
    p = {2e-5, 7e-5};
    const double ivj = pairwise_interference(0, 1, p, inst);
    const double ijv = pairwise_interference(1, 0, p, inst);
    CHECK(ivj * p[1] == doctest::Approx(ijv * p[0]).epsilon(1e-12));
  }
}

TEST_CASE("crsa") {
  RadioConfig radio;
  EhConfig eh;
  SUBCASE("one user, ample battery: a single 2 ms slot") {
    const auto inst = isolated_cells(1);
    const auto sched = crsa(inst, radio, eh);
    REQUIRE(sched.slots.size() == 1);
    CHECK(sched.slots[0].members == std::vector<int>{0});
    CHECK(sched.slots[0].duration_s == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kConstant).valid);
  }
  SUBCASE("two users in one cell need two slots") {
    MatrixXd up(2, 1), down = MatrixXd::Constant(2, 1, 1e-4);
    up << 1e-4, 2e-4;
    const auto inst = test::make_instance(1, {0, 0}, up, down, 100.0, 1e-3);
    const auto sched = crsa(inst, radio, eh);
    CHECK(member_slot_count(sched) == 2);
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kConstant).valid);
  }
  SUBCASE("distant cells share one 2 ms slot") {
    const auto inst = isolated_cells(2);
    const auto sched = crsa(inst, radio, eh);
    REQUIRE(member_slot_count(sched) == 1);
    const auto& slot = sched.slots.back();
    CHECK(slot.members == std::vector<int>{0, 1});
    CHECK(slot.duration_s == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(grid_feasibility_oracle(slot.members, slot.duration_s,
                                  ScheduleState::initial(inst), inst, radio,
                                  eh, 64, RateMode::kConstant));
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kConstant).valid);
  }
  SUBCASE("drained batteries wait in an idle slot first") {
    auto inst = isolated_cells(2);
    inst.battery_init_j = VectorXd::Constant(2, 1e-9);
    const auto sched = crsa(inst, radio, eh);
    REQUIRE(sched.slots.size() >= 2);
    CHECK(sched.slots.front().is_idle());
    CHECK(sched.slots.front().duration_s > 0.0);
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kConstant).valid);
  }
  SUBCASE("a user that cannot reach the threshold is an error") {
    const auto inst = isolated_cells(2, /*g_own=*/1e-8);
    CHECK_THROWS_AS(crsa(inst, radio, eh), ScheduleError);
  }
  SUBCASE("budget safety holds along the trace") {
    GenParams gp;
    gp.num_haps = 4;
    gp.users_per_cell = 3;
    gp.field_radius_m = 80.0;
    gp.cell_radius_m = 2.0;
    gp.pathloss.shadow_sigma_db = 0.0;
    gp.fading = false;
    gp.battery_init_j = 1e-9;
    const auto inst = generate_network(21, gp);
    CrsaTrace trace;
    const auto sched = crsa(inst, radio, eh, {}, &trace);
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kConstant).valid);
    CHECK(!trace.admissions.empty());
    for (const auto& a : trace.admissions) {
      CHECK(a.interference_on_user <= a.budget_of_user);
      CHECK(a.min_margin_on_members >= 0.0);
    }
  }
  SUBCASE("deterministic across runs") {
    GenParams gp;
    gp.num_haps = 3;
    gp.users_per_cell = 2;
    gp.cell_radius_m = 2.0;
    gp.field_radius_m = 60.0;
    gp.fading = false;
    gp.pathloss.shadow_sigma_db = 0.0;
    gp.battery_init_j = 1e-9;
    const auto inst = generate_network(5, gp);
    const auto a = crsa(inst, radio, eh);
    const auto b = crsa(inst, radio, eh);
    CHECK(schedule_to_json(a).dump() == schedule_to_json(b).dump());
  }
}

TEST_CASE("penalty") {
  RadioConfig radio;
  EhConfig eh;
  SUBCASE("ample singleton has zero penalty") {
    const auto inst = isolated_cells(1);
    const auto ctx = PenaltyCtx::build(inst, radio);
    const auto st = ScheduleState::initial(inst);
    CHECK(std::abs(penalty_s({0}, st, ctx, inst, radio, eh)) < 1e-15);
  }
  SUBCASE("depleted battery forces a positive penalty") {
    auto inst = isolated_cells(1);
    inst.battery_init_j = VectorXd::Zero(1);
    inst.downlink_gain = MatrixXd::Constant(1, 1, 1.2e-4);
    const auto ctx = PenaltyCtx::build(inst, radio);
    const auto st = ScheduleState::initial(inst);
    const double rho = penalty_s({0}, st, ctx, inst, radio, eh);
    CHECK(rho > 0.0);
    // the slot solve behind the penalty agrees with a linear scan
    RadioConfig coarse = radio;
    coarse.bisect_rel_tol = 1e-3;
    const auto scan = test::scan_min_feasible_t({0}, st, inst, coarse, eh,
                                                1e-4, 10.0);
    REQUIRE(scan.has_value());
    CHECK(rho + ctx.t_min_s[0] == doctest::Approx(*scan).epsilon(5e-3));
  }
  SUBCASE("mutually distant pair has negative penalty") {
    const auto inst = isolated_cells(2, 1e-4, 1e-15);
    const auto ctx = PenaltyCtx::build(inst, radio);
    const auto st = ScheduleState::initial(inst);
    const double rho = penalty_s({0, 1}, st, ctx, inst, radio, eh);
    CHECK(rho < 0.0);
    // with no interference the pair finishes at max(t_min), so the penalty
    // approaches -min(t_min)
    CHECK(rho == doctest::Approx(-std::min(ctx.t_min_s[0], ctx.t_min_s[1]))
                     .epsilon(1e-3));
  }
}

TEST_CASE("psa") {
  RadioConfig radio;
  EhConfig eh;
  SUBCASE("single cell reduces to mpa") {
    GenParams gp;
    gp.num_haps = 1;
    gp.users_per_cell = 6;
    gp.battery_init_j = 1e-9;
    const auto inst = generate_network(71, gp);
    const auto a = psa(inst, radio, eh);
    const auto b = mpa(inst, radio, eh);
    CHECK(schedule_to_json(a).dump() == schedule_to_json(b).dump());
  }
  SUBCASE("one user gives one slot at the solo solve") {
    const auto inst = isolated_cells(1);
    const auto sched = psa(inst, radio, eh);
    REQUIRE(sched.slots.size() == 1);
    const auto solo = fba({0}, ScheduleState::initial(inst), inst, radio, eh);
    CHECK(sched.slots[0].duration_s == doctest::Approx(solo.duration_s));
  }
  SUBCASE("grouping follows the penalty sign") {
    // negligible coupling: one concurrent slot
    const auto loose = isolated_cells(2, 1e-4, 1e-15);
    const auto s1 = psa(loose, radio, eh);
    CHECK(member_slot_count(s1) == 1);
    CHECK(s1.slots.back().members.size() == 2);
    // inflated cross gains: grouping hurts, two slots
    const auto tight = isolated_cells(2, 1e-4, 1e-8);
    const auto s2 = psa(tight, radio, eh);
    CHECK(member_slot_count(s2) == 2);
    // the exhaustive oracle picks the same structure
    const auto o1 = exact_min_schedule(loose, radio, eh, RateMode::kContinuous);
    CHECK(o1.best_partition.size() == 1);
    CHECK(s1.total_s() == doctest::Approx(o1.best_total_s).epsilon(1e-3));
    const auto o2 = exact_min_schedule(tight, radio, eh, RateMode::kContinuous);
    CHECK(o2.best_partition.size() == 2);
  }
  SUBCASE("trace invariants: accepted additions lower a negative penalty") {
    GenParams gp;
    gp.num_haps = 4;
    gp.users_per_cell = 2;
    gp.field_radius_m = 300.0;
    gp.cell_radius_m = 5.0;
    gp.battery_init_j = 1e-9;
    const auto inst = generate_network(1234, gp);
    PsaTrace trace;
    const auto sched = psa(inst, radio, eh, &trace);
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kContinuous)
              .valid);
    for (const auto& acc : trace.acceptances) {
      CHECK(acc.penalty_after < acc.penalty_before);
      CHECK(acc.penalty_after < 0.0);
    }
    // sum-of-penalties identity: total = sum penalties + sum of all t_min
    const auto ctx = PenaltyCtx::build(inst, radio);
    double sum_rho = 0.0;
    for (double r : trace.slot_penalty_s) sum_rho += r;
    double sum_tmin = 0.0;
    for (double t : ctx.t_min_s) sum_tmin += t;
    CHECK(sched.total_s() ==
          doctest::Approx(sum_rho + sum_tmin).epsilon(1e-9));
  }
}

TEST_CASE("mpa") {
  RadioConfig radio;
  EhConfig eh;
  SUBCASE("one user matches psa") {
    const auto inst = isolated_cells(1);
    CHECK(schedule_to_json(mpa(inst, radio, eh)).dump() ==
          schedule_to_json(psa(inst, radio, eh)).dump());
  }
  SUBCASE("identical isolated users: total is the sum of minimum times") {
    const auto inst = isolated_cells(3, 1e-4, 1e-15);
    const auto ctx = PenaltyCtx::build(inst, radio);
    const auto sched = mpa(inst, radio, eh);
    CHECK(member_slot_count(sched) == 3);
    double sum_tmin = 0.0;
    for (double t : ctx.t_min_s) sum_tmin += t;
    CHECK(sched.total_s() == doctest::Approx(sum_tmin).epsilon(1e-9));
  }
}

TEST_CASE("mcns") {
  RadioConfig radio;
  EhConfig eh;
  SUBCASE("one user per cell: everyone in a single slot") {
    const auto inst = isolated_cells(3, 1e-4, 1e-15);
    const auto sched = mcns(inst, radio, eh, 9);
    REQUIRE(member_slot_count(sched) == 1);
    CHECK(sched.slots.back().members == std::vector<int>{0, 1, 2});
  }
  SUBCASE("single cell degenerates to a random TDMA order") {
    GenParams gp;
    gp.num_haps = 1;
    gp.users_per_cell = 5;
    gp.battery_init_j = 1e-9;
    const auto inst = generate_network(17, gp);
    const auto sched = mcns(inst, radio, eh, 4);
    CHECK(member_slot_count(sched) == 5);
    for (const auto& slot : sched.slots)
      if (!slot.is_idle()) CHECK(slot.members.size() == 1);
    CHECK(validate_schedule(sched, inst, radio, eh, RateMode::kContinuous)
              .valid);
  }
  SUBCASE("seeded determinism") {
    GenParams gp;
    gp.num_haps = 3;
    gp.users_per_cell = 3;
    gp.battery_init_j = 1e-9;
    gp.field_radius_m = 200.0;
    const auto inst = generate_network(31, gp);
    CHECK(schedule_to_json(mcns(inst, radio, eh, 5)).dump() ==
          schedule_to_json(mcns(inst, radio, eh, 5)).dump());
  }
}

TEST_CASE("validator flags hand-built violations") {
  RadioConfig radio;
  EhConfig eh;
  const auto inst = isolated_cells(2, 1e-4, 1e-15);
  const auto good = crsa(inst, radio, eh);
  REQUIRE(validate_schedule(good, inst, radio, eh, RateMode::kConstant).valid);

  SUBCASE("power above the cap") {
    auto bad = good;
    for (auto& slot : bad.slots)
      for (auto& p : slot.power_w) p = radio.pmax_w * 2.0;
    const auto rep = validate_schedule(bad, inst, radio, eh,
                                       RateMode::kConstant);
    CHECK_FALSE(rep.valid);
    CHECK_FALSE(rep.pmax_ok);
  }
  SUBCASE("two users of one cell in a slot") {
    MatrixXd up(2, 1), down = MatrixXd::Constant(2, 1, 1e-4);
    up << 1e-4, 1e-4;
    const auto one_cell = test::make_instance(1, {0, 0}, up, down, 100.0, 1e-3);
    Slot slot;
    slot.mode = RateMode::kConstant;
    slot.duration_s = 0.002;
    slot.members = {0, 1};
    slot.power_w = {5e-5, 5e-5};
    Schedule bad;
    bad.mode = RateMode::kConstant;
    bad.slots = {slot};
    const auto rep = validate_schedule(bad, one_cell, radio, eh,
                                       RateMode::kConstant);
    CHECK_FALSE(rep.valid);
    CHECK_FALSE(rep.one_per_cell);
  }
  SUBCASE("demand unmet when the slot is too short") {
    auto bad = good;
    for (auto& slot : bad.slots)
      if (!slot.is_idle()) slot.duration_s *= 0.25;
    const auto rep = validate_schedule(bad, inst, radio, eh,
                                       RateMode::kConstant);
    CHECK_FALSE(rep.valid);
    CHECK_FALSE(rep.demand_met);
  }
  SUBCASE("snr below the threshold") {
    auto bad = good;
    for (auto& slot : bad.slots)
      for (auto& p : slot.power_w) p *= 0.5;
    const auto rep = validate_schedule(bad, inst, radio, eh,
                                       RateMode::kConstant);
    CHECK_FALSE(rep.valid);
    CHECK_FALSE(rep.snr_ok);
  }
  SUBCASE("energy causality violation") {
    auto drained = inst;
    drained.battery_init_j = VectorXd::Constant(2, 1e-12);
    drained.downlink_gain = MatrixXd::Constant(2, 2, 1e-10);
    const auto rep = validate_schedule(good, drained, radio, eh,
                                       RateMode::kConstant);
    CHECK_FALSE(rep.valid);
    CHECK_FALSE(rep.energy_causal);
  }
  SUBCASE("user missing from the schedule") {
    auto bad = good;
    bad.slots.back().members.pop_back();
    bad.slots.back().power_w.pop_back();
    const auto rep = validate_schedule(bad, inst, radio, eh,
                                       RateMode::kConstant);
    CHECK_FALSE(rep.valid);
    CHECK_FALSE(rep.each_user_once);
  }
}

TEST_CASE("schedule json round trip") {
  RadioConfig radio;
  EhConfig eh;
  auto inst = isolated_cells(2);
  inst.battery_init_j = VectorXd::Constant(2, 1e-9);  // forces an idle slot
  const auto sched = crsa(inst, radio, eh);
  const auto j = schedule_to_json(sched);
  const auto back = schedule_from_json(j);
  CHECK(schedule_to_json(back).dump() == j.dump());
  CHECK(back.total_s() == sched.total_s());
}

TEST_CASE("uncapped budget-power switch leaves emitted slots feasible") {
  RadioConfig radio;
  EhConfig eh;
  auto inst = isolated_cells(1, 1e-4);
  // plenty of stored energy so max(pmax, affordable) overshoots the cap
  inst.battery_init_j = VectorXd::Constant(1, 1e-2);
  CrsaOptions opts;
  opts.uncapped_budget_power = true;
  const auto sched = crsa(inst, radio, eh, opts);
  const auto rep = validate_schedule(sched, inst, radio, eh,
                                     RateMode::kConstant);
  // the debug rule only affects budget math; emitted powers stay feasible
  CHECK(rep.valid);
}
