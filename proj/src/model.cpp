#include "wpcn/model.hpp"

#include <algorithm>
#include <cmath>

#include "wpcn/rng.hpp"

namespace wpcn {

const char* to_string(RateMode mode) {
  return mode == RateMode::kConstant ? "constant" : "continuous";
}

RateMode rate_mode_from_string(const std::string& s) {
  if (s == "constant") return RateMode::kConstant;
  if (s == "continuous") return RateMode::kContinuous;
  throw ConfigError("unknown rate mode: " + s);
}

void RadioConfig::validate() const {
  if (!(bandwidth_hz > 0) || !(noise_density_w_per_hz > 0) ||
      !(hap_power_w > 0) || !(pmax_w > 0) || !(const_rate_bps > 0) ||
      !(bisect_rel_tol > 0))
    throw ConfigError("radio config fields must be strictly positive");
  if (!(si_coeff >= 0)) throw ConfigError("si_coeff must be non-negative");
  if (!(bisect_rel_tol < 1)) throw ConfigError("bisect_rel_tol must be < 1");
}

void EhConfig::validate() const {
  if (!(saturation_power_w > 0) || !(slope_per_w > 0) || !(turn_on_w > 0))
    throw ConfigError("eh config fields must be strictly positive");
}

std::vector<std::vector<int>> NetworkInstance::users_by_cell() const {
  std::vector<std::vector<int>> cells(num_haps);
  for (int n = 0; n < num_users; ++n) cells[hap_of[n]].push_back(n);
  return cells;
}

void NetworkInstance::validate() const {
  if (num_haps < 1 || num_users < 1)
    throw ModelError("instance needs at least one HAP and one user");
  if (static_cast<int>(hap_of.size()) != num_users)
    throw ModelError("hap_of size mismatch");
  for (int n = 0; n < num_users; ++n)
    if (hap_of[n] < 0 || hap_of[n] >= num_haps)
      throw ModelError("user mapped to invalid HAP");
  if (uplink_gain.rows() != num_users || uplink_gain.cols() != num_haps ||
      downlink_gain.rows() != num_users || downlink_gain.cols() != num_haps)
    throw ModelError("gain matrix shape mismatch");
  auto finite_positive = [](const MatrixXd& m) {
    return (m.array() > 0).all() && m.allFinite();
  };
  if (!finite_positive(uplink_gain) || !finite_positive(downlink_gain))
    throw ModelError("gains must be strictly positive and finite");
  if (demand_bits.size() != num_users || battery_init_j.size() != num_users)
    throw ModelError("per-user vector size mismatch");
  if (!(demand_bits.array() > 0).all())
    throw ModelError("demands must be positive");
  if (!(battery_cap_j > 0)) throw ModelError("battery cap must be positive");
  if (!(battery_init_j.array() >= 0).all() ||
      !(battery_init_j.array() <= battery_cap_j).all())
    throw ModelError("initial battery outside [0, cap]");
}

ScheduleState ScheduleState::initial(const NetworkInstance& inst) {
  ScheduleState st;
  st.now_s = 0.0;
  st.battery_j.assign(inst.battery_init_j.data(),
                      inst.battery_init_j.data() + inst.num_users);
  for (int n = 0; n < inst.num_users; ++n) st.pending.insert(n);
  return st;
}

void ScheduleState::advance_idle(double dt_s,
                                 const std::vector<double>& harvest_w,
                                 double cap_j) {
  for (int n : pending)
    battery_j[n] = std::min(cap_j, battery_j[n] + harvest_w[n] * dt_s);
  now_s += dt_s;
}

double pathloss_db(double d_m, const PathLossParams& pl, double shadow_db) {
  const double d = std::max(d_m, pl.d0_m);
  return pl.pl0_db + 10.0 * pl.alpha * std::log10(d / pl.d0_m) + shadow_db;
}

namespace {

constexpr int kPackAttemptsPerHap = 10000;

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

std::array<double, 2> sample_disc(Rng& rng, const std::array<double, 2>& c,
                                  double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double a = 2.0 * M_PI * rng.uniform();
  return {c[0] + r * std::cos(a), c[1] + r * std::sin(a)};
}

}  // namespace

NetworkInstance generate_network(std::uint64_t seed, const GenParams& gp) {
  if (gp.num_haps < 1 || gp.users_per_cell < 1)
    throw ConfigError("need at least one HAP and one user per cell");
  if (!(gp.cell_radius_m > 0) || !(gp.field_radius_m >= gp.cell_radius_m))
    throw ConfigError("need field_radius >= cell_radius > 0");

  Rng rng(seed);
  const int K = gp.num_haps;
  const int N = K * gp.users_per_cell;

  NetworkInstance inst;
  inst.num_haps = K;
  inst.num_users = N;

  const double place_radius = gp.field_radius_m - gp.cell_radius_m;
  inst.hap_pos_m.reserve(K);
  for (int k = 0; k < K; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kPackAttemptsPerHap; ++attempt) {
      const auto p = sample_disc(rng, {0.0, 0.0}, place_radius);
      bool ok = true;
      for (const auto& q : inst.hap_pos_m)
        if (dist(p, q) < 2.0 * gp.cell_radius_m) {
          ok = false;
          break;
        }
      if (ok) {
        inst.hap_pos_m.push_back(p);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw GeometryError("could not pack " + std::to_string(K) +
                          " non-overlapping cells of radius " +
                          std::to_string(gp.cell_radius_m) + " m in field");
  }

  inst.hap_of.resize(N);
  inst.user_pos_m.resize(N);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < gp.users_per_cell; ++i) {
      const int n = k * gp.users_per_cell + i;
      inst.hap_of[n] = k;
      inst.user_pos_m[n] = sample_disc(rng, inst.hap_pos_m[k], gp.cell_radius_m);
    }

  auto draw_gain = [&](double d) {
    const double shadow = gp.pathloss.shadow_sigma_db > 0
                              ? gp.pathloss.shadow_sigma_db * rng.normal()
                              : 0.0;
    double g = std::pow(10.0, -pathloss_db(d, gp.pathloss, shadow) / 10.0);
    if (gp.fading) g *= rng.exp_unit_mean();
    return g;
  };

  inst.uplink_gain.resize(N, K);
  inst.downlink_gain.resize(N, K);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      const double d = dist(inst.user_pos_m[n], inst.hap_pos_m[k]);
      inst.uplink_gain(n, k) = draw_gain(d);
      inst.downlink_gain(n, k) = draw_gain(d);
    }

  inst.demand_bits = VectorXd::Constant(N, gp.demand_bits);
  inst.battery_init_j = VectorXd::Constant(N, gp.battery_init_j);
  inst.battery_cap_j = gp.battery_cap_j;
  inst.validate();
  return inst;
}

double harvest_rate_from_input(double p_total_w, const EhConfig& eh) {
  const double omega = 1.0 / (1.0 + std::exp(eh.slope_per_w * eh.turn_on_w));
  const double psi =
      1.0 / (1.0 + std::exp(-eh.slope_per_w * (p_total_w - eh.turn_on_w)));
  return eh.saturation_power_w * (psi - omega) / (1.0 - omega);
}

double harvest_rate(int n, const NetworkInstance& inst, const EhConfig& eh,
                    const RadioConfig& radio) {
  const double p_total = inst.downlink_gain.row(n).sum() * radio.hap_power_w;
  return harvest_rate_from_input(p_total, eh);
}

std::vector<double> harvest_rates(const NetworkInstance& inst,
                                  const EhConfig& eh,
                                  const RadioConfig& radio) {
  std::vector<double> rates(inst.num_users);
  for (int n = 0; n < inst.num_users; ++n)
    rates[n] = harvest_rate(n, inst, eh, radio);
  return rates;
}

double effective_noise_w(const RadioConfig& radio) {
  return radio.noise_density_w_per_hz * radio.bandwidth_hz +
         radio.si_coeff * radio.hap_power_w;
}

double snr(int n, const std::vector<int>& members,
           const std::vector<double>& powers_w, const NetworkInstance& inst,
           const RadioConfig& radio) {
  const int hap = inst.hap_of[n];
  double signal = 0.0;
  double interference = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] == n)
      signal = powers_w[i] * inst.gain(n, hap);
    else
      interference += powers_w[i] * inst.gain(members[i], hap);
  }
  return signal /
         (effective_noise_w(radio) + radio.bandwidth_hz * interference);
}

double rate_continuous_bps(int n, const std::vector<int>& members,
                           const std::vector<double>& powers_w,
                           const NetworkInstance& inst,
                           const RadioConfig& radio) {
  return radio.bandwidth_hz *
         std::log1p(snr(n, members, powers_w, inst, radio)) / M_LN2;
}

}  // namespace wpcn
