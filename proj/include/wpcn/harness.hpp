#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wpcn/model.hpp"
#include "wpcn/types.hpp"

namespace wpcn {

enum class SweepAxis { kHapPowerDb, kNumCells, kUsersPerCell };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& s);

struct ExperimentConfig {
  SweepAxis axis = SweepAxis::kHapPowerDb;
  std::vector<double> values;
  int realizations = 100;
  std::vector<std::string> algorithms = {"crsa", "psa", "mpa", "mcns"};
  RateMode mode = RateMode::kContinuous;  // used by oracle-compare/schedule
  RadioConfig radio;
  EhConfig eh;
  GenParams geom;
  std::uint64_t master_seed = 1;

  void validate() const;
};

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string algorithm;
  double mean_total_s = 0.0;
  double stderr_total_s = 0.0;
  int realizations = 0;
  bool error = false;
  std::string error_msg;
};

// Order-independent sum with a fixed reduction tree, so parallel runs stay
// byte-stable.
double pairwise_sum(std::span<const double> xs);

// One sweep: per axis value, R seeded realizations, each schedule validated.
// A validation failure poisons the row with an error marker instead of data.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                int num_threads = 0);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Flat key = value config text; '#' starts a comment.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical rate model for each scheduling algorithm.
RateMode algorithm_mode(const std::string& algo);

// Runs one named algorithm on an instance; mcns draws from seed.
Schedule run_algorithm(const std::string& algo, const NetworkInstance& inst,
                       const RadioConfig& radio, const EhConfig& eh,
                       std::uint64_t seed);

}  // namespace wpcn
