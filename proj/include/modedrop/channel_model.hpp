#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "modedrop/matrix_kernel.hpp"

namespace modedrop {

/// m x n complex channel from one transmitter to the receiver.
using ChannelMatrix = ComplexMatrix;

/// Per-antenna power caps of one user, normalized to unit receiver noise.
class PowerBudget {
 public:
  PowerBudget() = default;
  /// Throws std::invalid_argument unless every entry is finite and > 0.
  explicit PowerBudget(RealVector per_antenna);

  static PowerBudget uniform(Eigen::Index antennas, double per_antenna_power);
  /// Antenna k (1-based) gets power proportional to k; entries sum to `total`.
  static PowerBudget proportional_to_index(Eigen::Index antennas, double total);

  const RealVector& per_antenna() const { return per_antenna_; }
  Eigen::Index size() const { return per_antenna_.size(); }
  double total() const { return per_antenna_.sum(); }
  double operator()(Eigen::Index j) const { return per_antenna_(j); }

 private:
  RealVector per_antenna_;
};

/// Total transmit power cap of one user (trace constraint).
struct SumBudget {
  double total = 0.0;
};

struct MacUser {
  ChannelMatrix channel;
  PowerBudget budget;
};

/// Validated K-user MAC with identity noise covariance at the receiver.
class MacInstance {
 public:
  std::size_t num_users() const { return users_.size(); }
  Eigen::Index rx_antennas() const { return rx_antennas_; }
  Eigen::Index tx_antennas(std::size_t user) const { return users_[user].channel.cols(); }
  const ChannelMatrix& channel(std::size_t user) const { return users_[user].channel; }
  const PowerBudget& budget(std::size_t user) const { return users_[user].budget; }
  const std::vector<MacUser>& users() const { return users_; }

  /// Sum-power totals matching the per-antenna budgets (sum over antennas).
  std::vector<SumBudget> matching_sum_budgets() const;

  /// Same channels with different per-antenna budgets.
  MacInstance with_budgets(const std::vector<PowerBudget>& budgets) const;

 private:
  friend MacInstance make_instance(std::vector<ChannelMatrix>, std::vector<PowerBudget>);
  Eigen::Index rx_antennas_ = 0;
  std::vector<MacUser> users_;
};

/// Throws DimensionMismatch or RankDeficientChannel. A channel is full rank
/// when its smallest singular value exceeds 1e-10 times its largest.
MacInstance make_instance(std::vector<ChannelMatrix> channels, std::vector<PowerBudget> budgets);

/// Deterministic normal stream. Stream `s` of seed `x` runs a std::mt19937_64
/// seeded with splitmix64(splitmix64(x) ^ splitmix64(s + 0x9E3779B97F4A7C15)),
/// so any stream is reachable directly without drawing its predecessors.
/// Normals come from Box-Muller on 53-bit uniforms, which keeps the byte
/// stream independent of the standard library's distribution code.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform in (0, 1].
  double uniform_open_closed();
  double standard_normal();
  /// Circularly symmetric CN(0, 1).
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream id for (realization, user); users are < 2^16.
std::uint64_t realization_stream(std::uint64_t realization, std::uint64_t user);

/// i.i.d. CN(0,1) entries, real and imaginary parts N(0, 1/2).
ChannelMatrix sample_rayleigh(Eigen::Index m, Eigen::Index n, RandomStream& rng);

/// K independent m x n Rayleigh channels for one Monte-Carlo realization.
std::vector<ChannelMatrix> sample_realization(std::uint64_t seed, std::uint64_t realization,
                                              std::size_t users, Eigen::Index m,
                                              Eigen::Index n);

}  // namespace modedrop
