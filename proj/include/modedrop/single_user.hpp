#pragma once

#include <optional>
#include <vector>

#include "modedrop/channel_model.hpp"
#include "modedrop/matrix_kernel.hpp"

namespace modedrop {

/// Smallest admissible dual price.
inline constexpr double kDualFloor = 1e-10;

/// Diagonal dual variable of the per-antenna power constraint, entries
/// clamped to [kDualFloor, 1 / kDualFloor].
class DualDiagonal {
 public:
  DualDiagonal() = default;
  /// Throws std::invalid_argument on non-finite entries or entries below the floor.
  explicit DualDiagonal(RealVector entries);

  static DualDiagonal identity(Eigen::Index n);

  const RealVector& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.size(); }
  double operator()(Eigen::Index j) const { return entries_(j); }
  /// sum_j d_j P_j
  double weighted_power(const PowerBudget& budget) const;

 private:
  RealVector entries_;
};

struct SingleUserOptions {
  /// Stop once |tr(D(Q - P))| is at most this many nats...
  double tol = 1e-9;
  /// ...and max_j |Q_jj - P_j| <= power_tol * max(1, max_j P_j).
  double power_tol = 1e-9;
  int max_iters = 10000;
  /// Starting dual; identity when unset.
  std::optional<DualDiagonal> initial_dual;
};

struct SingleUserResult {
  HermitianMatrix covariance;
  /// The dual that produced `covariance`.
  DualDiagonal dual;
  double rate_nats = 0.0;
  std::vector<double> gap_trace;
  int iterations = 0;
  double power_residual = 0.0;
};

struct KktResiduals {
  /// Smallest eigenvalue of M = D - H^H (I + H Q H^H)^{-1} H.
  double m_min_eig = 0.0;
  /// ||M Q||_F
  double complementarity = 0.0;
  /// max_j |Q_jj - P_j|
  double power_residual = 0.0;
};

/// log det(I + H Q H^H) in nats.
double single_user_rate(const ChannelMatrix& h, const HermitianMatrix& q);

/// Closed-form covariance that solves the single-user optimality conditions
/// for a fixed dual D, dropping the eigenmodes that would need negative power.
/// Works for both tall (m >= n) and wide (m < n) channels.
HermitianMatrix mode_drop_covariance(const ChannelMatrix& h, const DualDiagonal& d);

/// 1/d_new = max(1/d + P - diag(Q), kDualFloor).
DualDiagonal update_dual(const DualDiagonal& d, const PowerBudget& p, const HermitianMatrix& q);

/// |sum_j d_j (Q_jj - P_j)|
double single_user_gap(const DualDiagonal& d, const HermitianMatrix& q, const PowerBudget& p);

/// Alternates mode_drop_covariance and update_dual until the gap closes.
/// Throws MaxItersExceeded<SingleUserResult> carrying the iterate with the
/// smallest power residual.
SingleUserResult solve_single_user(const ChannelMatrix& h, const PowerBudget& p,
                                   const SingleUserOptions& options = {});

/// Optimal rank-one covariance for a 1 x n channel: phases matched to the
/// channel, amplitudes at the per-antenna caps. Throws ZeroChannelEntry if
/// any entry of h is zero.
HermitianMatrix miso_closed_form(const ChannelMatrix& h, const PowerBudget& p);

KktResiduals kkt_report_single(const ChannelMatrix& h, const PowerBudget& p,
                               const HermitianMatrix& q, const DualDiagonal& d);

}  // namespace modedrop
