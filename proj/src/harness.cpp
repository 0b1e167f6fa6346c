#include "wpcn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "wpcn/oracle.hpp"
#include "wpcn/rng.hpp"
#include "wpcn/sched.hpp"
#include "wpcn/serialize.hpp"

namespace wpcn {

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kHapPowerDb:
      return "hap_power_db";
    case SweepAxis::kNumCells:
      return "num_cells";
    case SweepAxis::kUsersPerCell:
      return "users_per_cell";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "hap_power_db") return SweepAxis::kHapPowerDb;
  if (s == "num_cells") return SweepAxis::kNumCells;
  if (s == "users_per_cell") return SweepAxis::kUsersPerCell;
  throw ConfigError("unknown sweep axis: " + s);
}

void ExperimentConfig::validate() const {
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (values.empty()) throw ConfigError("axis values must be non-empty");
  if (!std::is_sorted(values.begin(), values.end()))
    throw ConfigError("axis values must be sorted");
  if (algorithms.empty()) throw ConfigError("need at least one algorithm");
  for (const auto& a : algorithms) algorithm_mode(a);  // throws on unknown
  radio.validate();
  eh.validate();
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

RateMode algorithm_mode(const std::string& algo) {
  if (algo == "crsa") return RateMode::kConstant;
  if (algo == "psa" || algo == "mpa" || algo == "mcns")
    return RateMode::kContinuous;
  throw ConfigError("unknown algorithm: " + algo);
}

Schedule run_algorithm(const std::string& algo, const NetworkInstance& inst,
                       const RadioConfig& radio, const EhConfig& eh,
                       std::uint64_t seed) {
  if (algo == "crsa") return crsa(inst, radio, eh);
  if (algo == "psa") return psa(inst, radio, eh);
  if (algo == "mpa") return mpa(inst, radio, eh);
  if (algo == "mcns")
    return mcns(inst, radio, eh, splitmix64(seed ^ 0x6d636e73ULL));
  throw ConfigError("unknown algorithm: " + algo);
}

namespace {

struct CellResult {
  double total_s = 0.0;
  bool error = false;
  std::string error_msg;
};

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                int num_threads) {
  config.validate();
  if (num_threads <= 0)
    num_threads = std::max(1u, std::thread::hardware_concurrency());

  std::vector<SweepRow> rows;
  const std::size_t num_algos = config.algorithms.size();

  for (std::size_t vi = 0; vi < config.values.size(); ++vi) {
    const double value = config.values[vi];
    RadioConfig radio = config.radio;
    GenParams geom = config.geom;
    switch (config.axis) {
      case SweepAxis::kHapPowerDb:
        radio.hap_power_w = std::pow(10.0, value / 10.0);
        break;
      case SweepAxis::kNumCells:
        geom.num_haps = static_cast<int>(value);
        break;
      case SweepAxis::kUsersPerCell:
        geom.users_per_cell = static_cast<int>(value);
        break;
    }

    // results[r * num_algos + a], indexed so thread scheduling cannot change
    // the aggregation order.
    std::vector<CellResult> results(config.realizations * num_algos);
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int r = next.fetch_add(1); r < config.realizations;
           r = next.fetch_add(1)) {
        const std::uint64_t seed = derive_subseed(config.master_seed, vi, r);
        NetworkInstance inst;
        std::string gen_error;
        try {
          inst = generate_network(seed, geom);
        } catch (const std::exception& e) {
          gen_error = e.what();
        }
        for (std::size_t a = 0; a < num_algos; ++a) {
          CellResult& cell = results[r * num_algos + a];
          if (!gen_error.empty()) {
            cell.error = true;
            cell.error_msg = gen_error;
            continue;
          }
          try {
            const Schedule sched = run_algorithm(config.algorithms[a], inst,
                                                 radio, config.eh, seed);
            const auto report = validate_schedule(
                sched, inst, radio, config.eh,
                algorithm_mode(config.algorithms[a]));
            if (!report.valid) {
              cell.error = true;
              cell.error_msg = "validation failed: " + report.first_violation;
            } else {
              cell.total_s = sched.total_s();
            }
          } catch (const std::exception& e) {
            cell.error = true;
            cell.error_msg = e.what();
          }
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < num_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t a = 0; a < num_algos; ++a) {
      SweepRow row;
      row.axis = to_string(config.axis);
      row.value = value;
      row.algorithm = config.algorithms[a];
      row.realizations = config.realizations;
      std::vector<double> totals(config.realizations);
      for (int r = 0; r < config.realizations; ++r) {
        const CellResult& cell = results[r * num_algos + a];
        if (cell.error) {
          row.error = true;
          if (row.error_msg.empty()) row.error_msg = cell.error_msg;
        }
        totals[r] = cell.total_s;
      }
      if (!row.error) {
        row.mean_total_s = pairwise_sum(totals) / config.realizations;
        if (config.realizations > 1) {
          std::vector<double> sq(config.realizations);
          for (int r = 0; r < config.realizations; ++r) {
            const double d = totals[r] - row.mean_total_s;
            sq[r] = d * d;
          }
          row.stderr_total_s =
              std::sqrt(pairwise_sum(sq) /
                        (static_cast<double>(config.realizations) *
                         (config.realizations - 1)));
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": " + s);
  }
}

}  // namespace

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "axis,value,algorithm,mean_total_s,stderr_total_s,realizations\n";
  for (const auto& r : rows) {
    out += r.axis;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += r.algorithm;
    out += ',';
    out += r.error ? "ERROR" : format_double(r.mean_total_s);
    out += ',';
    out += r.error ? "ERROR" : format_double(r.stderr_total_s);
    out += ',';
    out += std::to_string(r.realizations);
    out += '\n';
  }
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "axis") {
      cfg.axis = sweep_axis_from_string(val);
    } else if (key == "values") {
      cfg.values.clear();
      for (const auto& v : split_list(val))
        cfg.values.push_back(parse_double(v, key));
    } else if (key == "realizations") {
      cfg.realizations = static_cast<int>(parse_double(val, key));
    } else if (key == "algorithms") {
      cfg.algorithms = split_list(val);
    } else if (key == "mode") {
      cfg.mode = rate_mode_from_string(val);
    } else if (key == "seed") {
      cfg.master_seed = static_cast<std::uint64_t>(parse_double(val, key));
    } else if (key == "radio.bandwidth_hz") {
      cfg.radio.bandwidth_hz = parse_double(val, key);
    } else if (key == "radio.noise_density_w_per_hz") {
      cfg.radio.noise_density_w_per_hz = parse_double(val, key);
    } else if (key == "radio.si_coeff") {
      cfg.radio.si_coeff = parse_double(val, key);
    } else if (key == "radio.hap_power_w") {
      cfg.radio.hap_power_w = parse_double(val, key);
    } else if (key == "radio.pmax_w") {
      cfg.radio.pmax_w = parse_double(val, key);
    } else if (key == "radio.const_rate_bps") {
      cfg.radio.const_rate_bps = parse_double(val, key);
    } else if (key == "radio.bisect_rel_tol") {
      cfg.radio.bisect_rel_tol = parse_double(val, key);
    } else if (key == "eh.saturation_power_w") {
      cfg.eh.saturation_power_w = parse_double(val, key);
    } else if (key == "eh.slope_per_w") {
      cfg.eh.slope_per_w = parse_double(val, key);
    } else if (key == "eh.turn_on_w") {
      cfg.eh.turn_on_w = parse_double(val, key);
    } else if (key == "geometry.num_cells") {
      cfg.geom.num_haps = static_cast<int>(parse_double(val, key));
    } else if (key == "geometry.users_per_cell") {
      cfg.geom.users_per_cell = static_cast<int>(parse_double(val, key));
    } else if (key == "geometry.field_radius_m") {
      cfg.geom.field_radius_m = parse_double(val, key);
    } else if (key == "geometry.cell_radius_m") {
      cfg.geom.cell_radius_m = parse_double(val, key);
    } else if (key == "geometry.fading") {
      if (val == "on")
        cfg.geom.fading = true;
      else if (val == "off")
        cfg.geom.fading = false;
      else
        throw ConfigError("geometry.fading must be on or off");
    } else if (key == "pathloss.d0_m") {
      cfg.geom.pathloss.d0_m = parse_double(val, key);
    } else if (key == "pathloss.pl0_db") {
      cfg.geom.pathloss.pl0_db = parse_double(val, key);
    } else if (key == "pathloss.alpha") {
      cfg.geom.pathloss.alpha = parse_double(val, key);
    } else if (key == "pathloss.shadow_sigma_db") {
      cfg.geom.pathloss.shadow_sigma_db = parse_double(val, key);
    } else if (key == "network.demand_bits") {
      cfg.geom.demand_bits = parse_double(val, key);
    } else if (key == "network.battery_init_j") {
      cfg.geom.battery_init_j = parse_double(val, key);
    } else if (key == "network.battery_cap_j") {
      cfg.geom.battery_cap_j = parse_double(val, key);
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

}  // namespace wpcn
