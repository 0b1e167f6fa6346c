#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpcn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class ModelError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cell packing failed within the attempt budget.
class GeometryError : public ModelError {
  using ModelError::ModelError;
};

// A scheduler cannot make progress (stalled clock, user that can never
// satisfy its rate/energy requirements, ...).
class ScheduleError : public ModelError {
  using ModelError::ModelError;
};

// Slot-length bracket expansion exceeded its cap.
class ExpansionCapError : public ScheduleError {
  using ScheduleError::ScheduleError;
};

class OracleError : public ModelError {
  using ModelError::ModelError;
};

class ConfigError : public ModelError {
  using ModelError::ModelError;
};

enum class RateMode { kConstant, kContinuous };

const char* to_string(RateMode mode);
RateMode rate_mode_from_string(const std::string& s);

// Physical-layer parameters shared by all modules.
struct RadioConfig {
  double bandwidth_hz = 1e6;
  double noise_density_w_per_hz = 3.9810717055349695e-21;  // 10^-20.4
  double si_coeff = 1e-7;  // residual HAP interference, linear
  double hap_power_w = 1.0;
  double pmax_w = 1e-4;
  double const_rate_bps = 50e3;
  double bisect_rel_tol = 1e-4;
  // When false the power-control noise vector drops the si_coeff * hap_power
  // term (A/B switch; the SNR-tight variant keeps it).
  bool sigma_includes_hap_term = true;

  // SNR threshold that makes the constant rate fit the Shannon curve.
  double const_rate_gamma() const {
    return std::expm1(const_rate_bps / bandwidth_hz * M_LN2);
  }

  void validate() const;
};

// Logistic energy-harvesting curve parameters.
struct EhConfig {
  double saturation_power_w = 4.927e-3;
  double slope_per_w = 150.0;
  double turn_on_w = 0.014;

  void validate() const;
};

// Static network topology: gains are linear power gains, never dB.
struct NetworkInstance {
  int num_haps = 0;
  int num_users = 0;
  std::vector<int> hap_of;  // user -> serving HAP
  MatrixXd uplink_gain;     // N x K, user n -> HAP k
  MatrixXd downlink_gain;   // N x K, HAP k -> user n
  VectorXd demand_bits;
  VectorXd battery_init_j;
  double battery_cap_j = 1e-2;
  // positions kept for provenance only
  std::vector<std::array<double, 2>> user_pos_m;
  std::vector<std::array<double, 2>> hap_pos_m;

  double gain(int user, int hap) const { return uplink_gain(user, hap); }
  double gain_own(int user) const { return uplink_gain(user, hap_of[user]); }

  std::vector<std::vector<int>> users_by_cell() const;

  void validate() const;
};

// Mutable per-run clock and energy bookkeeping. Owned by one scheduling run.
struct ScheduleState {
  double now_s = 0.0;
  std::vector<double> battery_j;
  std::set<int> pending;

  static ScheduleState initial(const NetworkInstance& inst);

  // Idle gap: pending users charge at their harvest rate, clipped at the cap.
  void advance_idle(double dt_s, const std::vector<double>& harvest_w,
                    double cap_j);
};

struct Slot {
  RateMode mode = RateMode::kContinuous;
  double duration_s = 0.0;
  std::vector<int> members;      // ascending user ids, at most one per cell
  std::vector<double> power_w;   // aligned with members
  bool is_idle() const { return members.empty(); }
};

struct Schedule {
  RateMode mode = RateMode::kContinuous;
  std::vector<Slot> slots;

  double total_s() const {
    double t = 0.0;
    for (const auto& s : slots) t += s.duration_s;
    return t;
  }
};

// Outcome of the power-feasibility check for one concurrent group.
struct PfResult {
  double spectral_radius = 0.0;
  std::optional<VectorXd> min_power_w;  // present iff spectral_radius < 1
  bool pmax_ok = false;
  bool energy_ok = false;  // filled by the caller, depends on slot length

  bool feasible_power() const { return min_power_w.has_value() && pmax_ok; }
};

}  // namespace wpcn
