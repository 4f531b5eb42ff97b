#include "modedrop/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "modedrop/errors.hpp"

namespace modedrop {

PowerBudget::PowerBudget(RealVector per_antenna) : per_antenna_(std::move(per_antenna)) {
  if (per_antenna_.size() == 0) throw std::invalid_argument("PowerBudget: empty");
  for (Eigen::Index j = 0; j < per_antenna_.size(); ++j) {
    if (!std::isfinite(per_antenna_(j)) || !(per_antenna_(j) > 0.0)) {
      throw std::invalid_argument("PowerBudget: entries must be finite and positive");
    }
  }
}

PowerBudget PowerBudget::uniform(Eigen::Index antennas, double per_antenna_power) {
  return PowerBudget(RealVector::Constant(antennas, per_antenna_power));
}

PowerBudget PowerBudget::proportional_to_index(Eigen::Index antennas, double total) {
  RealVector p = RealVector::LinSpaced(antennas, 1.0, static_cast<double>(antennas));
  p *= total / p.sum();
  return PowerBudget(std::move(p));
}

std::vector<SumBudget> MacInstance::matching_sum_budgets() const {
  std::vector<SumBudget> out;
  out.reserve(users_.size());
  for (const auto& user : users_) out.push_back({user.budget.total()});
  return out;
}

MacInstance MacInstance::with_budgets(const std::vector<PowerBudget>& budgets) const {
  std::vector<ChannelMatrix> channels;
  channels.reserve(users_.size());
  for (const auto& user : users_) channels.push_back(user.channel);
  return make_instance(std::move(channels), budgets);
}

MacInstance make_instance(std::vector<ChannelMatrix> channels, std::vector<PowerBudget> budgets) {
  if (channels.empty()) throw DimensionMismatch("make_instance: no users");
  if (channels.size() != budgets.size()) {
    throw DimensionMismatch("make_instance: channel and budget counts differ");
  }
  MacInstance instance;
  instance.rx_antennas_ = channels.front().rows();
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const ChannelMatrix& h = channels[i];
    if (h.rows() == 0 || h.cols() == 0 || h.rows() != instance.rx_antennas_) {
      std::ostringstream msg;
      msg << "make_instance: user " << i << " channel is " << h.rows() << "x" << h.cols()
          << ", receiver has " << instance.rx_antennas_ << " antennas";
      throw DimensionMismatch(msg.str());
    }
    if (budgets[i].size() != h.cols()) {
      std::ostringstream msg;
      msg << "make_instance: user " << i << " has " << h.cols() << " transmit antennas but "
          << budgets[i].size() << " power caps";
      throw DimensionMismatch(msg.str());
    }
    if (!all_finite(h)) throw DimensionMismatch("make_instance: non-finite channel entry");
    const RealVector s = svd(h).singular_values;
    const double smallest = s(s.size() - 1);
    if (!(s(0) > 0.0) || !(smallest > 1e-10 * s(0))) {
      std::ostringstream msg;
      msg << "make_instance: user " << i << " channel is rank deficient (singular values "
          << s.transpose() << ")";
      throw RankDeficientChannel(msg.str());
    }
    instance.users_.push_back({std::move(channels[i]), std::move(budgets[i])});
  }
  return instance;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL))) {}

double RandomStream::uniform_open_closed() {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open_closed();
  const double u2 = uniform_open_closed();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Complex RandomStream::complex_normal() {
  const double re = standard_normal();
  const double im = standard_normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

std::uint64_t realization_stream(std::uint64_t realization, std::uint64_t user) {
  return (realization << 16) | (user & 0xFFFFULL);
}

ChannelMatrix sample_rayleigh(Eigen::Index m, Eigen::Index n, RandomStream& rng) {
  if (m < 1 || n < 1) throw DimensionMismatch("sample_rayleigh: dimensions must be >= 1");
  ChannelMatrix h(m, n);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) h(r, c) = rng.complex_normal();
  }
  return h;
}

std::vector<ChannelMatrix> sample_realization(std::uint64_t seed, std::uint64_t realization,
                                              std::size_t users, Eigen::Index m,
                                              Eigen::Index n) {
  std::vector<ChannelMatrix> out;
  out.reserve(users);
  for (std::size_t k = 0; k < users; ++k) {
    RandomStream rng(seed, realization_stream(realization, k));
    out.push_back(sample_rayleigh(m, n, rng));
  }
  return out;
}

}  // namespace modedrop
