#pragma once

#include <cstdint>
#include <vector>

#include "tfs/core.hpp"
#include "tfs/rng.hpp"
#include "tfs/types.hpp"

namespace tfs {

/// Cell geometry and radio parameters for the Rayleigh-fading downlink.
struct CellConfig {
  int n = 4;
  Real inner_radius_m = 20.0;
  Real outer_radius_m = 100.0;
  Real edge_snr_db = 10.0;
  Real path_loss_exponent = 3.76;
  Real noise_power = 1.0;  // sigma^2, linear
  Real gamma_max = 6.0;    // bps/Hz cap per user
  std::uint64_t rng_seed = 1;
};

/// Throws ConfigError on invariant violations (radii order, positivity, n>=1).
void validate(const CellConfig& cell);

struct UserChannelParams {
  Real beta = 1.0;  // large-scale gain, normalized to 1 at the outer radius
  Real x = 0.0;     // meters
  Real y = 0.0;
  Real distance() const;
};

struct SlotGains {
  Vec g;  // instantaneous power gains beta_i * Exp(1), length n
};

struct PerformanceSample {
  Vec r;  // per-virtual-user utilities, length m
  std::int64_t slot_index = 0;
};

/// Positions uniform by area over the ring, beta = (d/outer)^(-alpha).
/// The outer-radius gain is normalized to 1, so edge users see exactly the
/// calibrated edge SNR on average.
std::vector<UserChannelParams> place_users(const CellConfig& cell, Rng& rng);

/// Transmit power p with p * beta_edge * E[|G|^2] / sigma2 = 10^(snr_db/10)
/// (unit-mean Rayleigh power fading gives E[|G|^2] = 1).
Real calibrate_power(Real edge_snr_db, Real sigma2, Real beta_edge);

/// beta_edge = 1 under the outer-radius normalization used by place_users.
Real calibrate_power(const CellConfig& cell);

/// Fresh i.i.d. gains g_i = beta_i * Exp(1); out is resized to match.
void sample_slot_gains(const std::vector<UserChannelParams>& params, Rng& rng, Vec& out);
SlotGains sample_slot_gains(const std::vector<UserChannelParams>& params, Rng& rng);

/// min(log2(1 + p*gain/sigma2), gamma_max)
Real oma_rate(Real gain, Real p, Real sigma2, Real gamma_max);

struct NomaSplit {
  Real sum_rate = 0;     // truncated rate_strong + truncated rate_weak
  Real p_strong = 0;     // power allocated to the strong user
  Real rate_strong = 0;  // per-user rates after the gamma_max cap
  Real rate_weak = 0;
};

/// Two-user downlink superposition with SIC at the strong user. The power
/// split maximizes min(rate_s, rate_w) (bisection, |p_s| tolerance 1e-9,
/// <= 200 iterations); each rate is capped at gamma_max before summing.
/// gain_weak = 0 degenerates to all power on the strong user.
/// Caller must pass gain_strong >= gain_weak.
NomaSplit noma_pair_rate(Real gain_strong, Real gain_weak, Real p, Real sigma2, Real gamma_max);

/// r_j = oma_rate for singleton V_j, NOMA max-min sum rate for pair V_j.
/// For pairs the strong user is the larger instantaneous gain, ties broken
/// by lower user index.
void performance_vector(const Vec& gains, const VirtualUserCatalog& cat, Real p, Real sigma2,
                        Real gamma_max, Vec& r_out);
PerformanceSample performance_vector(const SlotGains& gains, const VirtualUserCatalog& cat, Real p,
                                     Real sigma2, Real gamma_max, std::int64_t slot_index = 0);

}  // namespace tfs
