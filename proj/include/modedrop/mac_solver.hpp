#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "modedrop/channel_model.hpp"
#include "modedrop/single_user.hpp"

namespace modedrop {

/// One transmit covariance per user.
using CovarianceSet = std::vector<HermitianMatrix>;

enum class SweepOrder { kAscending, kDescending };

struct MacOptions {
  /// Converged when one full sweep raises the sum rate by less than this many
  /// bits, the certified duality gap is below tol_bits * ln 2 nats...
  double tol_bits = 1e-6;
  /// ...and every per-user KKT residual (with the latest duals) is at most this.
  double kkt_tol = 1e-7;
  int max_iterations = 100;
  SweepOrder order = SweepOrder::kAscending;
  /// When false, run exactly max_iterations sweeps and never throw.
  bool stop_early = true;
  /// Starting covariances; all zero when unset.
  std::optional<CovarianceSet> warm_start;
  int inner_max_iters = 10000;
};

struct SolveReport {
  CovarianceSet covariances;
  /// Dual of each user's most recent single-user solve (empty for water-filling).
  std::vector<DualDiagonal> duals;
  /// Sum rate after every user update.
  std::vector<double> rate_trace_nats;
  /// Sum rate after every full sweep.
  std::vector<double> iteration_rates_nats;
  /// Certified duality gap after every full sweep.
  std::vector<double> gap_trace_nats;
  int iterations = 0;
  bool converged = false;
  std::size_t single_user_call_count = 0;
  /// Total inner (dual-update) iterations over all single-user calls.
  std::size_t inner_iteration_count = 0;

  double sum_rate_nats() const;
  double sum_rate_bits() const;
};

double nats_to_bits(double nats);
double bits_to_nats(double bits);

/// I_m + sum_i H_i Q_i H_i^H
HermitianMatrix received_covariance(const MacInstance& instance, const CovarianceSet& qs);

/// log det(I_m + sum_i H_i Q_i H_i^H) in nats.
double sum_rate(const MacInstance& instance, const CovarianceSet& qs);

/// (I + sum_{k != i} H_k Q_k H_k^H)^{-1/2} H_i
ChannelMatrix effective_channel(const MacInstance& instance, const CovarianceSet& qs,
                                std::size_t user);

/// Iterative mode-dropping: starting from zero covariances, sweep the users
/// and replace each covariance by the single-user optimum on its effective
/// channel. Throws MaxItersExceeded<SolveReport> when stop_early is set and
/// the iteration budget runs out.
SolveReport solve_mac(const MacInstance& instance, const MacOptions& options = {});

/// tr(W^-1) + sum_i tr(D_i P_i) - m with W = I + sum_i H_i Q_i H_i^H.
/// Throws DualInfeasible if some D_i - H_i^H W^-1 H_i has an eigenvalue below -1e-8.
double multiuser_gap(const MacInstance& instance, const CovarianceSet& qs,
                     const std::vector<DualDiagonal>& duals);

/// Shifts each D_i by the smallest multiple of I that makes it dual feasible
/// for the current covariances. Feasible duals come back unchanged.
std::vector<DualDiagonal> lift_to_feasible(const MacInstance& instance, const CovarianceSet& qs,
                                           const std::vector<DualDiagonal>& duals);

/// Per-user residuals of D_i - M_i = H_i^H W^-1 H_i, M_i Q_i = 0, diag(Q_i) = P_i.
std::vector<KktResiduals> kkt_report_mac(const MacInstance& instance, const CovarianceSet& qs,
                                         const std::vector<DualDiagonal>& duals);

}  // namespace modedrop
