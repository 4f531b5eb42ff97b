#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modedrop/channel_model.hpp"
#include "modedrop/mac_solver.hpp"

namespace modedrop {

/// The five transmit-power scenarios compared in the SNR and user sweeps.
enum class ConstraintMode {
  kPerAntennaEqual,
  kPerAntennaUnequal,  // antenna k gets power proportional to k
  kSumPower,
  kSmEqual,            // Q_i = diag(P_i), equal entries
  kSmUnequal,          // Q_i = diag(P_i), entries proportional to k
};

inline constexpr ConstraintMode kAllConstraintModes[] = {
    ConstraintMode::kPerAntennaEqual, ConstraintMode::kPerAntennaUnequal,
    ConstraintMode::kSumPower, ConstraintMode::kSmEqual, ConstraintMode::kSmUnequal};

/// "pa-equal", "pa-unequal", "sum-power", "sm-equal", "sm-unequal"
std::string to_string(ConstraintMode mode);
/// Inverse of to_string; throws std::invalid_argument on unknown names.
ConstraintMode parse_constraint_mode(std::string_view name);

struct WaterLevel {
  double level = 0.0;
  /// Power on each mode, in the order of the gains passed in.
  RealVector powers;
};

/// p_k = max(mu - 1/g_k, 0) with sum_k p_k = total. Zero gains never get power.
/// Exact active-set scan over the sorted inverse gains.
WaterLevel water_level(const RealVector& gains, double total);

/// Single-user sum-power optimum V diag(p) V^H over the right singular
/// vectors of h. Throws std::invalid_argument unless total > 0, and
/// RankDeficientChannel if h is zero.
HermitianMatrix water_fill(const ChannelMatrix& h, const SumBudget& total);

/// Iterative water-filling: the same sweep as solve_mac, with water_fill on
/// the effective channel. The certified gap uses the scalar duals
/// lambda_i = lambda_max(H_i^H W^-1 H_i). `duals` in the report stays empty.
SolveReport iterative_water_fill(const MacInstance& instance, const std::vector<SumBudget>& totals,
                                 const MacOptions& options = {});

/// tr(W^-1) + sum_i lambda_i T_i - m with lambda_i = lambda_max(H_i^H W^-1 H_i).
double sum_power_gap(const MacInstance& instance, const CovarianceSet& qs,
                     const std::vector<SumBudget>& totals);

/// Sum rate (nats) with Q_i = diag(P_i): independent streams at the
/// per-antenna caps. The equal/unequal split lives in the instance budgets.
double spatial_multiplexing_rate(const MacInstance& instance);

}  // namespace modedrop
