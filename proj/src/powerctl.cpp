#include "wpcn/powerctl.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace wpcn {

namespace {

constexpr double kSolveRelTol = 1e-9;
constexpr double kPmaxSlack = 1e-12;

// Relative slack for the energy-causality comparison; keeps exact-boundary
// cases on the feasible side.
double energy_tol(double battery, double harvest, double power, double t) {
  return 1e-12 * (battery + (harvest + power) * t) + 1e-30;
}

std::vector<double> member_harvest(const std::vector<int>& members,
                                   const NetworkInstance& inst,
                                   const EhConfig& eh,
                                   const RadioConfig& radio) {
  std::vector<double> rates(members.size());
  for (std::size_t i = 0; i < members.size(); ++i)
    rates[i] = harvest_rate(members[i], inst, eh, radio);
  return rates;
}

}  // namespace

PfSystem build_pf_system(const std::vector<int>& members,
                         const VectorXd& gammas, const NetworkInstance& inst,
                         const RadioConfig& radio) {
  const int m = static_cast<int>(members.size());
  PfSystem sys;
  sys.gain_matrix = MatrixXd::Zero(m, m);
  sys.thresholds = gammas;
  sys.noise_vec.resize(m);
  const double noise = radio.sigma_includes_hap_term
                           ? effective_noise_w(radio)
                           : radio.noise_density_w_per_hz * radio.bandwidth_hz;
  for (int i = 0; i < m; ++i) {
    const int hap_i = inst.hap_of[members[i]];
    const double g_own = inst.gain(members[i], hap_i);
    for (int j = 0; j < m; ++j)
      if (j != i) sys.gain_matrix(i, j) = inst.gain(members[j], hap_i) / g_own;
    sys.noise_vec(i) = gammas(i) * noise / g_own;
  }
  return sys;
}

PfResult pf_min_power(const std::vector<int>& members, const VectorXd& gammas,
                      const NetworkInstance& inst, const RadioConfig& radio) {
  const int m = static_cast<int>(members.size());
  PfResult res;
  const PfSystem sys = build_pf_system(members, gammas, inst, radio);

  // Coupling matrix of the fixed-point P = M P + sigma. Interference enters
  // the SINR denominator scaled by the bandwidth, so the relative gains pick
  // up the same factor here.
  const MatrixXd coupling = sys.thresholds.asDiagonal() *
                            (radio.bandwidth_hz * sys.gain_matrix);

  if (m == 1) {
    res.spectral_radius = 0.0;
  } else if (m == 2) {
    res.spectral_radius = std::sqrt(coupling(0, 1) * coupling(1, 0));
  } else {
    Eigen::EigenSolver<MatrixXd> es(coupling, /*computeEigenvectors=*/false);
    res.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if (!(res.spectral_radius < 1.0)) return res;

  const MatrixXd system = MatrixXd::Identity(m, m) - coupling;
  const VectorXd p = system.partialPivLu().solve(sys.noise_vec);
  const double residual = (system * p - sys.noise_vec).norm();
  if (!p.allFinite() || residual > kSolveRelTol * sys.noise_vec.norm() ||
      !(p.array() > 0).all()) {
    // Spectral-radius test was fooled by conditioning: treat as infeasible.
    return res;
  }
  res.min_power_w = p;
  res.pmax_ok = (p.array() <= radio.pmax_w * (1.0 + kPmaxSlack)).all();
  return res;
}

double required_snr(double d_bits, double t_s, const RadioConfig& radio) {
  return std::expm1(d_bits / (radio.bandwidth_hz * t_s) * M_LN2);
}

bool energy_ok(const VectorXd& powers_w, double t_s,
               const ScheduleState& state, const std::vector<double>& harvest_w,
               const std::vector<int>& members) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double b = state.battery_j[members[i]];
    const double slack = b + (harvest_w[i] - powers_w(i)) * t_s;
    if (slack < -energy_tol(b, harvest_w[i], powers_w(i), t_s)) return false;
  }
  return true;
}

std::optional<SlotSolve> constant_rate_slot(const std::vector<int>& members,
                                            const ScheduleState& state,
                                            const NetworkInstance& inst,
                                            const RadioConfig& radio,
                                            const EhConfig& eh) {
  const double gamma = radio.const_rate_gamma();
  const VectorXd gammas = VectorXd::Constant(members.size(), gamma);
  double t = 0.0;
  for (int n : members)
    t = std::max(t, inst.demand_bits(n) / radio.const_rate_bps);
  PfResult pf = pf_min_power(members, gammas, inst, radio);
  if (!pf.feasible_power()) return std::nullopt;
  const auto harvest = member_harvest(members, inst, eh, radio);
  if (!energy_ok(*pf.min_power_w, t, state, harvest, members))
    return std::nullopt;
  return SlotSolve{t, *pf.min_power_w};
}

std::optional<VectorXd> slot_feasible_at(const std::vector<int>& members,
                                         double t_s,
                                         const ScheduleState& state,
                                         const NetworkInstance& inst,
                                         const RadioConfig& radio,
                                         const EhConfig& eh) {
  VectorXd gammas(members.size());
  for (std::size_t i = 0; i < members.size(); ++i)
    gammas(i) = required_snr(inst.demand_bits(members[i]), t_s, radio);
  PfResult pf = pf_min_power(members, gammas, inst, radio);
  if (!pf.feasible_power()) return std::nullopt;
  const auto harvest = member_harvest(members, inst, eh, radio);
  if (!energy_ok(*pf.min_power_w, t_s, state, harvest, members))
    return std::nullopt;
  return pf.min_power_w;
}

FbaBounds fba_bounds(const std::vector<int>& members,
                     const NetworkInstance& inst, const RadioConfig& radio) {
  const double noise = effective_noise_w(radio);
  const double w = radio.bandwidth_hz;
  FbaBounds b;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const int n = members[i];
    const int hap = inst.hap_of[n];
    const double g_own = inst.gain(n, hap);
    double interference = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j)
      if (j != i) interference += radio.pmax_w * inst.gain(members[j], hap);
    const double rate_clean =
        w * std::log1p(radio.pmax_w * g_own / noise) / M_LN2;
    const double rate_jammed =
        w * std::log1p(radio.pmax_w * g_own / (noise + w * interference)) /
        M_LN2;
    b.t_lower = std::max(b.t_lower, inst.demand_bits(n) / rate_clean);
    b.t_upper = std::max(b.t_upper, inst.demand_bits(n) / rate_jammed);
  }
  return b;
}

SlotSolve fba(const std::vector<int>& members, const ScheduleState& state,
              const NetworkInstance& inst, const RadioConfig& radio,
              const EhConfig& eh, int max_doublings) {
  FbaBounds bounds = fba_bounds(members, inst, radio);
  double t_l = bounds.t_lower;
  double t_u = bounds.t_upper;

  auto solved = slot_feasible_at(members, t_u, state, inst, radio, eh);
  // The interference bound ignores energy causality; restore a feasible
  // upper bracket by geometric expansion.
  int doublings = 0;
  while (!solved) {
    if (++doublings > max_doublings)
      throw ExpansionCapError(
          "slot-length upper bound expansion exceeded its cap");
    t_u *= 2.0;
    solved = slot_feasible_at(members, t_u, state, inst, radio, eh);
  }

  while ((t_u - t_l) / t_l > radio.bisect_rel_tol) {
    const double mid = 0.5 * (t_u + t_l);
    if (mid <= t_l || mid >= t_u) break;  // interval exhausted in doubles
    if (auto p = slot_feasible_at(members, mid, state, inst, radio, eh)) {
      t_u = mid;
      solved = std::move(p);
    } else {
      // An infeasible midpoint rules out everything below it.
      t_l = mid;
    }
  }
  return SlotSolve{t_u, *solved};
}

}  // namespace wpcn
