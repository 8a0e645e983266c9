#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tfs/channel.hpp"
#include "tfs/core.hpp"
#include "tfs/rng.hpp"
#include "tfs/types.hpp"

namespace tfs {

/// A stationary source of i.i.d. per-slot performance vectors R^m.
/// Samplers hold no RNG of their own; the caller supplies the stream, so one
/// prototype can be cloned into independent replications.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual const VirtualUserCatalog& catalog() const = 0;
  Index dim() const { return catalog().size(); }
  int n_users() const { return catalog().n; }
  /// Fresh i.i.d. performance vector; r_out resized to dim().
  virtual void draw(Rng& rng, Vec& r_out) = 0;
  virtual std::unique_ptr<Sampler> clone() const = 0;
  virtual std::string describe() const = 0;
};

enum class SyntheticKind { uniform01, exponential };

/// Analytic test distributions with closed-form quantiles (N_max = 1).
class SyntheticSampler final : public Sampler {
 public:
  SyntheticSampler(SyntheticKind kind, int n, Real mu = 1.0)
      : kind_(kind), mu_(mu), cat_(enumerate_virtual_users(n, 1)) {
    if (!(mu > 0)) throw ConfigError("synthetic sampler: mu must be > 0");
  }

  const VirtualUserCatalog& catalog() const override { return cat_; }

  void draw(Rng& rng, Vec& r_out) override {
    r_out.resize(cat_.size());
    if (kind_ == SyntheticKind::uniform01) {
      for (Index i = 0; i < r_out.size(); ++i) r_out[i] = rng.uniform();
    } else {
      for (Index i = 0; i < r_out.size(); ++i) r_out[i] = mu_ * rng.exponential();
    }
  }

  std::unique_ptr<Sampler> clone() const override {
    return std::make_unique<SyntheticSampler>(*this);
  }

  std::string describe() const override {
    if (kind_ == SyntheticKind::uniform01)
      return "synthetic:uniform01:n=" + std::to_string(cat_.n);
    return "synthetic:exponential:mu=" + std::to_string(mu_) + ":n=" + std::to_string(cat_.n);
  }

 private:
  SyntheticKind kind_;
  Real mu_;
  VirtualUserCatalog cat_;
};

/// Rayleigh-fading downlink sampler over a fixed user placement.
/// n_max = 1 gives the OMA setting, n_max = 2 the NOMA pairing setting.
class ChannelSampler final : public Sampler {
 public:
  ChannelSampler(CellConfig cell, std::vector<UserChannelParams> placement, int n_max)
      : cell_(std::move(cell)),
        placement_(std::move(placement)),
        cat_(enumerate_virtual_users(cell_.n, n_max)),
        p_(calibrate_power(cell_)) {
    if (static_cast<int>(placement_.size()) != cell_.n)
      throw ConfigError("channel sampler: placement size does not match cell n");
  }

  /// Draws the placement from the cell's dedicated substream.
  static ChannelSampler make(const CellConfig& cell, int n_max, std::uint64_t master_seed) {
    Rng place_rng = Rng::substream(master_seed, StreamTag::placement);
    return ChannelSampler(cell, place_users(cell, place_rng), n_max);
  }

  const VirtualUserCatalog& catalog() const override { return cat_; }

  void draw(Rng& rng, Vec& r_out) override {
    sample_slot_gains(placement_, rng, gains_);
    performance_vector(gains_, cat_, p_, cell_.noise_power, cell_.gamma_max, r_out);
  }

  std::unique_ptr<Sampler> clone() const override {
    return std::make_unique<ChannelSampler>(*this);
  }

  std::string describe() const override {
    return std::string("channel:") + (cat_.n_max == 1 ? "oma" : "noma") +
           ":n=" + std::to_string(cell_.n);
  }

  const std::vector<UserChannelParams>& placement() const { return placement_; }
  Real transmit_power() const { return p_; }
  const CellConfig& cell() const { return cell_; }

 private:
  CellConfig cell_;
  std::vector<UserChannelParams> placement_;
  VirtualUserCatalog cat_;
  Real p_;
  Vec gains_;  // per-instance scratch; clones get their own copy
};

}  // namespace tfs
