#pragma once

#include <functional>
#include <optional>

#include "modedrop/mac_solver.hpp"

namespace modedrop::detail {

struct UserUpdate {
  HermitianMatrix covariance;
  std::optional<DualDiagonal> dual;
  int inner_iterations = 0;
};

/// Computes user `i`'s new covariance from its effective channel. `refinement`
/// counts retries after a rejected candidate; each should solve more tightly.
using UpdateFn =
    std::function<UserUpdate(std::size_t user, const ChannelMatrix& effective, int refinement)>;

/// Retries allowed per user update before a rejected candidate is dropped.
inline constexpr int kMaxRefinements = 2;

struct Certificate {
  /// Certified duality gap (nats).
  double gap = 0.0;
  /// Largest KKT residual over users; 0 when the update provides no duals.
  double kkt = 0.0;
};

using GapFn =
    std::function<Certificate(const CovarianceSet& qs, const std::vector<DualDiagonal>& duals)>;

/// Block-coordinate ascent shared by iterative mode-dropping and iterative
/// water-filling. An update that would lower the sum rate (inexact inner
/// solve) is retried more tightly and, failing that, rejected, so the rate
/// trace never decreases.
SolveReport run_sweeps(const MacInstance& instance, const MacOptions& options,
                       const UpdateFn& update, const GapFn& gap, const char* solver_name);

/// H^H W^-1 H via a Cholesky factor of W.
HermitianMatrix whitened_gram(const HermitianMatrix& w, const ChannelMatrix& h);

}  // namespace modedrop::detail
