#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "wpcn/harness.hpp"
#include "wpcn/rng.hpp"

using namespace wpcn;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.axis = SweepAxis::kNumCells;
  cfg.values = {1, 2};
  cfg.realizations = 3;
  cfg.algorithms = {"psa", "mpa"};
  cfg.master_seed = 11;
  cfg.geom.users_per_cell = 2;
  cfg.geom.cell_radius_m = 5.0;
  cfg.geom.field_radius_m = 100.0;
  cfg.geom.battery_init_j = 1e-9;
  return cfg;
}

}  // namespace

TEST_CASE("pairwise sum is exact on integers and order-fixed") {
  std::vector<double> xs(1000);
  for (int i = 0; i < 1000; ++i) xs[i] = i + 1;
  CHECK(pairwise_sum(xs) == 500500.0);
}

TEST_CASE("sub-seed derivation is stable") {
  // frozen regression values so row seeds never drift silently
  CHECK(derive_subseed(1, 0, 0) != derive_subseed(1, 0, 1));
  CHECK(derive_subseed(1, 0, 0) != derive_subseed(1, 1, 0));
  CHECK(derive_subseed(1, 2, 3) == derive_subseed(1, 2, 3));
  CHECK(derive_subseed(42, 0, 0) == 0xed6d6ccf127cb19eULL);
}

TEST_CASE("single realization rows have zero stderr") {
  auto cfg = tiny_config();
  cfg.realizations = 1;
  cfg.algorithms = {"psa"};
  const auto rows = run_sweep(cfg, 2);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK_FALSE(r.error);
    CHECK(r.stderr_total_s == 0.0);
    CHECK(r.mean_total_s > 0.0);
    CHECK(r.realizations == 1);
  }
}

TEST_CASE("sweep output is byte-identical across runs and thread counts") {
  const auto cfg = tiny_config();
  const auto a = sweep_to_csv(run_sweep(cfg, 1));
  const auto b = sweep_to_csv(run_sweep(cfg, 2));
  CHECK(a == b);
}

TEST_CASE("psa equals mpa on single-cell rows") {
  auto cfg = tiny_config();
  cfg.values = {1};
  cfg.realizations = 5;
  cfg.geom.users_per_cell = 4;
  const auto rows = run_sweep(cfg, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].algorithm == "psa");
  CHECK(rows[1].algorithm == "mpa");
  CHECK(rows[0].mean_total_s == rows[1].mean_total_s);
  CHECK(rows[0].stderr_total_s == rows[1].stderr_total_s);
}

TEST_CASE("csv schema") {
  auto cfg = tiny_config();
  cfg.values = {1};
  cfg.realizations = 1;
  cfg.algorithms = {"mpa"};
  const auto csv = sweep_to_csv(run_sweep(cfg, 1));
  CHECK(csv.rfind("axis,value,algorithm,mean_total_s,stderr_total_s,"
                  "realizations\n", 0) == 0);
  CHECK(csv.find("num_cells,1,mpa,") != std::string::npos);
  // exactly header + one row
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("config text round trip") {
  const std::string text = R"(
# sweep over HAP power
axis = hap_power_db
values = 0, 5, 10
realizations = 7
algorithms = psa, mcns
mode = continuous
seed = 99
radio.pmax_w = 2e-4
radio.si_coeff = 0
eh.slope_per_w = 200
geometry.num_cells = 4
geometry.users_per_cell = 3
geometry.cell_radius_m = 2.5
geometry.fading = off
pathloss.shadow_sigma_db = 0
network.battery_init_j = 1e-10
)";
  const auto cfg = parse_experiment_config(text);
  CHECK(cfg.axis == SweepAxis::kHapPowerDb);
  CHECK(cfg.values == std::vector<double>{0, 5, 10});
  CHECK(cfg.realizations == 7);
  CHECK(cfg.algorithms == std::vector<std::string>{"psa", "mcns"});
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.radio.pmax_w == 2e-4);
  CHECK(cfg.radio.si_coeff == 0.0);
  CHECK(cfg.eh.slope_per_w == 200.0);
  CHECK(cfg.geom.num_haps == 4);
  CHECK(cfg.geom.users_per_cell == 3);
  CHECK(cfg.geom.cell_radius_m == 2.5);
  CHECK_FALSE(cfg.geom.fading);
  CHECK(cfg.geom.pathloss.shadow_sigma_db == 0.0);
  CHECK(cfg.geom.battery_init_j == 1e-10);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_experiment_config("axis = sideways\nvalues = 1"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("bogus_key = 3\nvalues = 1"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("axis = num_cells\nvalues = 2, 1"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config("axis = num_cells\nvalues = 1\nrealizations = 0"),
      ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      "axis = num_cells\nvalues = 1\nalgorithms = foo"),
                  ConfigError);
}

TEST_CASE("recorded sweep configs parse and target all algorithms") {
  for (const char* name :
       {"fig2_hap_power.conf", "fig3_cells.conf", "fig4_users.conf"}) {
    const auto cfg = load_experiment_config(
        std::string(WPCN_SOURCE_DIR) + "/configs/" + name);
    CHECK(cfg.realizations == 100);
    CHECK(cfg.algorithms ==
          std::vector<std::string>{"crsa", "psa", "mpa", "mcns"});
    CHECK(cfg.master_seed == 2024);
    CHECK(cfg.values.size() >= 5);
  }
}

TEST_CASE("canonical algorithm modes") {
  CHECK(algorithm_mode("crsa") == RateMode::kConstant);
  CHECK(algorithm_mode("psa") == RateMode::kContinuous);
  CHECK(algorithm_mode("mpa") == RateMode::kContinuous);
  CHECK(algorithm_mode("mcns") == RateMode::kContinuous);
  CHECK_THROWS_AS(algorithm_mode("nope"), ConfigError);
}

TEST_CASE("validation failures poison the row with an error marker") {
  // CRSA on far-flung users at the default pmax cannot reach the SNR
  // threshold; the row must carry an error marker, not numbers.
  ExperimentConfig cfg = tiny_config();
  cfg.algorithms = {"crsa"};
  cfg.values = {2};
  cfg.geom.cell_radius_m = 10.0;
  cfg.geom.field_radius_m = 100.0;
  const auto rows = run_sweep(cfg, 2);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error);
  CHECK_FALSE(rows[0].error_msg.empty());
  const auto csv = sweep_to_csv(rows);
  CHECK(csv.find("ERROR") != std::string::npos);
}
