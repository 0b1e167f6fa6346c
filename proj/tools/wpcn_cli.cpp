#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wpcn/harness.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/rng.hpp"
#include "wpcn/sched.hpp"
#include "wpcn/serialize.hpp"

namespace {

using namespace wpcn;

struct GenFlags {
  std::uint64_t seed = 1;
  GenParams params;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "generator seed");
    app->add_option("-K,--num-cells", params.num_haps, "number of cells");
    app->add_option("--users-per-cell", params.users_per_cell,
                    "users per cell");
    app->add_option("--field-radius", params.field_radius_m,
                    "field radius [m]");
    app->add_option("--cell-radius", params.cell_radius_m, "cell radius [m]");
    app->add_option("--d0", params.pathloss.d0_m, "reference distance [m]");
    app->add_option("--pl0-db", params.pathloss.pl0_db,
                    "path loss at d0 [dB]");
    app->add_option("--alpha", params.pathloss.alpha, "path loss exponent");
    app->add_option("--shadow-sigma-db", params.pathloss.shadow_sigma_db,
                    "log-normal shadowing sigma [dB]");
    app->add_flag("--no-fading", [this](std::int64_t) { params.fading = false; },
                  "disable small-scale fading");
    app->add_option("--demand-bits", params.demand_bits, "per-user demand");
    app->add_option("--battery-init", params.battery_init_j,
                    "initial battery [J]");
    app->add_option("--battery-cap", params.battery_cap_j,
                    "battery capacity [J]");
  }
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_file(out_path, content);
}

NetworkInstance load_or_generate(const std::string& in_path,
                                 const GenFlags& gen) {
  if (!in_path.empty())
    return instance_from_json(json::parse(read_file(in_path)));
  return generate_network(gen.seed, gen.params);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power control and minimum-length scheduling for multi-cell "
               "wireless-powered networks"};
  app.require_subcommand(1);

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a network instance");
  GenFlags gen_flags;
  gen_flags.attach(gen_cmd);
  std::string gen_out;
  gen_cmd->add_option("--out", gen_out, "output path (default stdout)");

  // schedule
  auto* sched_cmd =
      app.add_subcommand("schedule", "schedule an instance and validate");
  std::string sched_in, sched_out, sched_algos = "psa";
  std::string sched_mode;
  std::uint64_t sched_seed = 1;
  RadioConfig sched_radio;
  EhConfig sched_eh;
  sched_cmd->add_option("instance", sched_in, "instance JSON path")
      ->required();
  sched_cmd->add_option("--algos", sched_algos,
                        "comma list of crsa,psa,mpa,mcns");
  sched_cmd->add_option("--mode", sched_mode,
                        "validator mode override (constant|continuous)");
  sched_cmd->add_option("--seed", sched_seed, "seed for mcns");
  sched_cmd->add_option("--out", sched_out, "output path (default stdout)");
  sched_cmd->add_option("--hap-power-w", sched_radio.hap_power_w,
                        "HAP transmit power [W]");
  sched_cmd->add_option("--si-coeff", sched_radio.si_coeff,
                        "residual HAP interference coefficient");
  sched_cmd->add_option("--noise-density", sched_radio.noise_density_w_per_hz,
                        "noise density [W/Hz]");
  sched_cmd->add_option("--pmax-w", sched_radio.pmax_w, "user power cap [W]");
  sched_cmd->add_option("--eh-saturation-w", sched_eh.saturation_power_w,
                        "harvest saturation power [W]");
  sched_cmd->add_option("--eh-slope", sched_eh.slope_per_w,
                        "harvest curve slope [1/W]");
  sched_cmd->add_option("--eh-turn-on-w", sched_eh.turn_on_w,
                        "harvest turn-on power [W]");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a Monte-Carlo sweep");
  std::string sweep_config, sweep_out;
  sweep_cmd->add_option("--config", sweep_config, "sweep config file")
      ->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output path (default stdout)");

  // oracle-compare
  auto* oc_cmd = app.add_subcommand(
      "oracle-compare", "exhaustive enumeration vs heuristics");
  GenFlags oc_gen;
  oc_gen.attach(oc_cmd);
  std::string oc_in, oc_out, oc_mode = "continuous";
  oc_cmd->add_option("--in", oc_in, "instance JSON path (else generated)");
  oc_cmd->add_option("--mode", oc_mode, "constant|continuous");
  oc_cmd->add_option("--out", oc_out, "output path (default stdout)");
  RadioConfig oc_radio;
  EhConfig oc_eh;
  oc_cmd->add_option("--pmax-w", oc_radio.pmax_w, "user power cap [W]");
  oc_cmd->add_option("--hap-power-w", oc_radio.hap_power_w,
                     "HAP transmit power [W]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*gen_cmd) {
      const NetworkInstance inst =
          generate_network(gen_flags.seed, gen_flags.params);
      emit(gen_out, instance_to_json(inst).dump(2) + "\n");
      return 0;
    }

    if (*sched_cmd) {
      const NetworkInstance inst =
          instance_from_json(json::parse(read_file(sched_in)));
      json out;
      bool all_valid = true;
      std::stringstream algos(sched_algos);
      std::string algo;
      while (std::getline(algos, algo, ',')) {
        if (algo.empty()) continue;
        const Schedule sched =
            run_algorithm(algo, inst, sched_radio, sched_eh, sched_seed);
        const RateMode mode = sched_mode.empty()
                                  ? algorithm_mode(algo)
                                  : rate_mode_from_string(sched_mode);
        const auto report =
            validate_schedule(sched, inst, sched_radio, sched_eh, mode);
        all_valid = all_valid && report.valid;
        out[algo] = {{"schedule", schedule_to_json(sched)},
                     {"report", report_to_json(report)}};
      }
      emit(sched_out, out.dump(2) + "\n");
      return all_valid ? 0 : 1;
    }

    if (*sweep_cmd) {
      const ExperimentConfig cfg = load_experiment_config(sweep_config);
      const auto rows = run_sweep(cfg);
      emit(sweep_out, sweep_to_csv(rows));
      for (const auto& r : rows)
        if (r.error) {
          std::cerr << "row error (" << r.algorithm << " @ " << r.value
                    << "): " << r.error_msg << "\n";
          return 1;
        }
      return 0;
    }

    if (*oc_cmd) {
      const NetworkInstance inst = load_or_generate(oc_in, oc_gen);
      const RateMode mode = rate_mode_from_string(oc_mode);
      const OracleResult oracle = exact_min_schedule(inst, oc_radio, oc_eh, mode);
      json heur = json::object();
      bool dominated = true;
      const std::vector<std::string> algos =
          mode == RateMode::kConstant
              ? std::vector<std::string>{"crsa"}
              : std::vector<std::string>{"psa", "mpa", "mcns"};
      for (const auto& algo : algos) {
        const Schedule sched =
            run_algorithm(algo, inst, oc_radio, oc_eh, oc_gen.seed);
        const auto report = validate_schedule(sched, inst, oc_radio, oc_eh,
                                              algorithm_mode(algo));
        heur[algo] = {{"total_s", sched.total_s()},
                      {"valid", report.valid}};
        dominated = dominated && report.valid &&
                    oracle.best_total_s <=
                        sched.total_s() * (1.0 + 1e-9) + 1e-15;
      }
      json out = {{"mode", oc_mode},
                  {"oracle", oracle_result_to_json(oracle)},
                  {"heuristics", heur},
                  {"oracle_dominates", dominated}};
      emit(oc_out, out.dump(2) + "\n");
      return dominated ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
