#include "tfs/channel.hpp"

#include <cmath>

namespace tfs {

namespace {
constexpr Real kTwoPi = 6.283185307179586476925286766559;
}

void validate(const CellConfig& cell) {
  if (cell.n < 1) throw ConfigError("cell: n must be >= 1, got " + std::to_string(cell.n));
  if (!(cell.inner_radius_m > 0))
    throw ConfigError("cell: inner_radius_m must be > 0, got " +
                      std::to_string(cell.inner_radius_m));
  if (!(cell.inner_radius_m < cell.outer_radius_m))
    throw ConfigError("cell: need inner_radius_m < outer_radius_m, got " +
                      std::to_string(cell.inner_radius_m) + " vs " +
                      std::to_string(cell.outer_radius_m));
  if (!(cell.gamma_max > 0))
    throw ConfigError("cell: gamma_max must be > 0, got " + std::to_string(cell.gamma_max));
  if (!(cell.noise_power > 0))
    throw ConfigError("cell: noise_power must be > 0, got " + std::to_string(cell.noise_power));
  if (!(cell.path_loss_exponent > 0))
    throw ConfigError("cell: path_loss_exponent must be > 0, got " +
                      std::to_string(cell.path_loss_exponent));
}

Real UserChannelParams::distance() const { return std::sqrt(x * x + y * y); }

std::vector<UserChannelParams> place_users(const CellConfig& cell, Rng& rng) {
  validate(cell);
  const Real a2 = cell.inner_radius_m * cell.inner_radius_m;
  const Real b2 = cell.outer_radius_m * cell.outer_radius_m;
  std::vector<UserChannelParams> users(static_cast<std::size_t>(cell.n));
  for (auto& u : users) {
    const Real d = std::sqrt(a2 + rng.uniform() * (b2 - a2));  // area-uniform radius
    const Real phi = kTwoPi * rng.uniform();
    u.x = d * std::cos(phi);
    u.y = d * std::sin(phi);
    u.beta = std::pow(d / cell.outer_radius_m, -cell.path_loss_exponent);
  }
  return users;
}

Real calibrate_power(Real edge_snr_db, Real sigma2, Real beta_edge) {
  return sigma2 * std::pow(Real(10), edge_snr_db / Real(10)) / beta_edge;
}

Real calibrate_power(const CellConfig& cell) {
  return calibrate_power(cell.edge_snr_db, cell.noise_power, Real(1));
}

void sample_slot_gains(const std::vector<UserChannelParams>& params, Rng& rng, Vec& out) {
  const Index n = static_cast<Index>(params.size());
  if (n == 0) throw ConfigError("sample_slot_gains: empty user list");
  out.resize(n);
  for (Index i = 0; i < n; ++i) out[i] = params[static_cast<std::size_t>(i)].beta * rng.exponential();
}

SlotGains sample_slot_gains(const std::vector<UserChannelParams>& params, Rng& rng) {
  SlotGains s;
  sample_slot_gains(params, rng, s.g);
  return s;
}

Real oma_rate(Real gain, Real p, Real sigma2, Real gamma_max) {
  const Real rate = std::log2(Real(1) + p * gain / sigma2);
  return rate < gamma_max ? rate : gamma_max;
}

NomaSplit noma_pair_rate(Real gain_strong, Real gain_weak, Real p, Real sigma2, Real gamma_max) {
  NomaSplit split;
  if (gain_weak <= 0) {  // degenerate: weak user cannot decode anything
    split.p_strong = p;
    split.rate_strong = oma_rate(gain_strong, p, sigma2, gamma_max);
    split.rate_weak = 0;
    split.sum_rate = split.rate_strong;
    return split;
  }
  // rate_s(p_s) grows from 0 and rate_w(p_s) falls to 0 as p_s sweeps [0, p],
  // so the max-min sits where the SINRs cross. Bisect on the difference of
  // SINR arguments (same sign as the rate difference, no logs in the loop).
  // The width tolerance scales with p so that rescaling (p, sigma2) by a
  // common factor reproduces the identical iterate sequence bitwise.
  const Real width_tol = 1e-9 * p;
  Real lo = 0, hi = p;
  for (int it = 0; it < 200 && hi - lo > width_tol; ++it) {
    const Real ps = Real(0.5) * (lo + hi);
    const Real snr_s = ps * gain_strong / sigma2;
    const Real snr_w = (p - ps) * gain_weak / (ps * gain_weak + sigma2);
    (snr_s < snr_w ? lo : hi) = ps;
  }
  const Real ps = Real(0.5) * (lo + hi);
  split.p_strong = ps;
  const Real raw_s = std::log2(Real(1) + ps * gain_strong / sigma2);
  const Real raw_w = std::log2(Real(1) + (p - ps) * gain_weak / (ps * gain_weak + sigma2));
  split.rate_strong = raw_s < gamma_max ? raw_s : gamma_max;
  split.rate_weak = raw_w < gamma_max ? raw_w : gamma_max;
  split.sum_rate = split.rate_strong + split.rate_weak;
  return split;
}

void performance_vector(const Vec& gains, const VirtualUserCatalog& cat, Real p, Real sigma2,
                        Real gamma_max, Vec& r_out) {
  if (gains.size() != cat.n)
    throw ConfigError("performance_vector: gains size " + std::to_string(gains.size()) +
                      " vs catalog n=" + std::to_string(cat.n));
  const Index m = cat.size();
  r_out.resize(m);
  for (Index j = 0; j < m; ++j) {
    const auto& subset = cat.subsets[static_cast<std::size_t>(j)];
    if (subset.size() == 1) {
      r_out[j] = oma_rate(gains[subset[0]], p, sigma2, gamma_max);
    } else if (subset.size() == 2) {
      const int u = subset[0], v = subset[1];  // u < v canonically
      const bool u_strong = gains[u] >= gains[v];
      const Real gs = u_strong ? gains[u] : gains[v];
      const Real gw = u_strong ? gains[v] : gains[u];
      r_out[j] = noma_pair_rate(gs, gw, p, sigma2, gamma_max).sum_rate;
    } else {
      throw ConfigError("performance_vector: subsets of size " + std::to_string(subset.size()) +
                        " are not supported (max pair scheduling)");
    }
  }
}

PerformanceSample performance_vector(const SlotGains& gains, const VirtualUserCatalog& cat, Real p,
                                     Real sigma2, Real gamma_max, std::int64_t slot_index) {
  PerformanceSample s;
  s.slot_index = slot_index;
  performance_vector(gains.g, cat, p, sigma2, gamma_max, s.r);
  return s;
}

}  // namespace tfs
