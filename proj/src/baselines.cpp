#include "modedrop/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "modedrop/errors.hpp"
#include "sweep.hpp"

namespace modedrop {

std::string to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::kPerAntennaEqual: return "pa-equal";
    case ConstraintMode::kPerAntennaUnequal: return "pa-unequal";
    case ConstraintMode::kSumPower: return "sum-power";
    case ConstraintMode::kSmEqual: return "sm-equal";
    case ConstraintMode::kSmUnequal: return "sm-unequal";
  }
  throw std::invalid_argument("unknown ConstraintMode");
}

ConstraintMode parse_constraint_mode(std::string_view name) {
  for (const ConstraintMode mode : kAllConstraintModes) {
    if (to_string(mode) == name) return mode;
  }
  throw std::invalid_argument("unknown constraint mode '" + std::string(name) +
                              "' (expected pa-equal, pa-unequal, sum-power, sm-equal, sm-unequal)");
}

WaterLevel water_level(const RealVector& gains, double total) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("water_level: total power must be positive");
  }
  std::vector<Eigen::Index> order;
  for (Eigen::Index k = 0; k < gains.size(); ++k) {
    if (gains(k) < 0.0 || !std::isfinite(gains(k))) {
      throw std::invalid_argument("water_level: gains must be finite and nonnegative");
    }
    if (gains(k) > 0.0) order.push_back(k);
  }
  if (order.empty()) throw std::invalid_argument("water_level: all gains are zero");
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return gains(a) > gains(b); });

  // With the k strongest modes active, mu = (total + sum 1/g) / k. The
  // largest k whose weakest active mode still sits below mu is the answer.
  double level = 0.0;
  std::size_t active = 0;
  double inverse_sum = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    inverse_sum += 1.0 / gains(order[k - 1]);
    const double mu = (total + inverse_sum) / static_cast<double>(k);
    if (mu > 1.0 / gains(order[k - 1])) {
      level = mu;
      active = k;
    } else {
      break;
    }
  }

  WaterLevel out;
  out.level = level;
  out.powers = RealVector::Zero(gains.size());
  for (std::size_t k = 0; k < active; ++k) {
    out.powers(order[k]) = level - 1.0 / gains(order[k]);
  }
  return out;
}

HermitianMatrix water_fill(const ChannelMatrix& h, const SumBudget& total) {
  if (!(total.total > 0.0)) throw std::invalid_argument("water_fill: total power must be positive");
  const SingularDecomposition dec = svd(h);
  if (!(dec.singular_values(0) > 0.0)) throw RankDeficientChannel("water_fill: zero channel");
  const Eigen::Index n = h.cols();
  RealVector gains = RealVector::Zero(n);
  gains.head(dec.singular_values.size()) = dec.singular_values.array().square();
  const WaterLevel w = water_level(gains, total.total);
  return hermitize(dec.v * w.powers.asDiagonal() * dec.v.adjoint());
}

double sum_power_gap(const MacInstance& instance, const CovarianceSet& qs,
                     const std::vector<SumBudget>& totals) {
  if (totals.size() != instance.num_users()) {
    throw DimensionMismatch("sum_power_gap: one total per user required");
  }
  const HermitianMatrix w = received_covariance(instance, qs);
  double dual_power = 0.0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    const HermitianMatrix g = detail::whitened_gram(w, instance.channel(i));
    dual_power += herm_eig(g).values(0) * totals[i].total;
  }
  Eigen::LLT<ComplexMatrix> llt(w);
  const Eigen::Index m = instance.rx_antennas();
  const double trace_inv = llt.solve(ComplexMatrix::Identity(m, m)).trace().real();
  return trace_inv + dual_power - static_cast<double>(m);
}

SolveReport iterative_water_fill(const MacInstance& instance, const std::vector<SumBudget>& totals,
                                 const MacOptions& options) {
  if (totals.size() != instance.num_users()) {
    throw DimensionMismatch("iterative_water_fill: one total per user required");
  }
  detail::UpdateFn update = [&](std::size_t user, const ChannelMatrix& effective, int) {
    return detail::UserUpdate{water_fill(effective, totals[user]), std::nullopt, 0};
  };
  detail::GapFn gap = [&](const CovarianceSet& qs, const std::vector<DualDiagonal>&) {
    return detail::Certificate{sum_power_gap(instance, qs, totals), 0.0};
  };
  return detail::run_sweeps(instance, options, update, gap, "iterative_water_fill");
}

double spatial_multiplexing_rate(const MacInstance& instance) {
  CovarianceSet qs;
  qs.reserve(instance.num_users());
  for (std::size_t i = 0; i < instance.num_users(); ++i) {
    qs.push_back(instance.budget(i).per_antenna().cast<Complex>().asDiagonal());
  }
  return sum_rate(instance, qs);
}

}  // namespace modedrop
