#pragma once

#include <cstdint>
#include <vector>

#include "wpcn/types.hpp"

namespace wpcn {

struct PathLossParams {
  double d0_m = 1.0;
  double pl0_db = 30.0;
  double alpha = 2.7;
  double shadow_sigma_db = 4.0;
};

struct GenParams {
  int num_haps = 1;
  int users_per_cell = 1;
  double field_radius_m = 100.0;
  double cell_radius_m = 10.0;
  PathLossParams pathloss;
  bool fading = true;
  double demand_bits = 100.0;
  double battery_init_j = 1e-9;
  double battery_cap_j = 1e-2;
};

// Deterministic large-scale path loss; distances below d0 clamp to d0.
double pathloss_db(double d_m, const PathLossParams& pl, double shadow_db);

// HAP centres rejection-sampled with minimum separation 2*cell_radius so the
// cells do not overlap and fit in the field disc; users uniform in their cell
// disc. Fully determined by the seed. Throws GeometryError when the packing
// attempt budget runs out.
NetworkInstance generate_network(std::uint64_t seed, const GenParams& params);

// Logistic harvesting curve as a function of total received power.
double harvest_rate_from_input(double p_total_w, const EhConfig& eh);

// Per-user harvest rate; constant over the frame since HAPs transmit
// continuously.
double harvest_rate(int n, const NetworkInstance& inst, const EhConfig& eh,
                    const RadioConfig& radio);

std::vector<double> harvest_rates(const NetworkInstance& inst,
                                  const EhConfig& eh,
                                  const RadioConfig& radio);

// Noise floor seen by every uplink: N0*W + si_coeff*Ph.
double effective_noise_w(const RadioConfig& radio);

// SINR of member n within a concurrent group; powers aligned with members.
double snr(int n, const std::vector<int>& members,
           const std::vector<double>& powers_w, const NetworkInstance& inst,
           const RadioConfig& radio);

double rate_continuous_bps(int n, const std::vector<int>& members,
                           const std::vector<double>& powers_w,
                           const NetworkInstance& inst,
                           const RadioConfig& radio);

}  // namespace wpcn
