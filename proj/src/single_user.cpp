#include "modedrop/single_user.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "modedrop/errors.hpp"

namespace modedrop {

DualDiagonal::DualDiagonal(RealVector entries) : entries_(std::move(entries)) {
  for (Eigen::Index j = 0; j < entries_.size(); ++j) {
    if (!std::isfinite(entries_(j)) || entries_(j) < kDualFloor) {
      throw std::invalid_argument("DualDiagonal: entries must be finite and >= 1e-10");
    }
  }
}

DualDiagonal DualDiagonal::identity(Eigen::Index n) {
  return DualDiagonal(RealVector::Ones(n));
}

double DualDiagonal::weighted_power(const PowerBudget& budget) const {
  return entries_.dot(budget.per_antenna());
}

double single_user_rate(const ChannelMatrix& h, const HermitianMatrix& q) {
  const ComplexMatrix w =
      ComplexMatrix::Identity(h.rows(), h.rows()) + h * q * h.adjoint();
  return log_det_hpd(hermitize(w));
}

namespace {

void require_full_rank(const SingularDecomposition& dec) {
  const RealVector& s = dec.singular_values;
  if (!(s(0) > 0.0) || !(s(s.size() - 1) > 1e-10 * s(0))) {
    throw RankDeficientChannel("mode_drop_covariance: channel is rank deficient");
  }
}

// m >= n. With K = V S_n V^H (so H^H H = K^2) and F = K D^-1 K, the
// covariance D^-1 - K^-1 K^-H + K^-1 S K^-H regroups as K^-1 (F - I + S) K^-1,
// where F - I + S is the positive part of F - I.
HermitianMatrix mode_drop_tall(const SingularDecomposition& dec, const DualDiagonal& d) {
  const Eigen::Index n = dec.v.cols();
  const RealVector s = dec.singular_values.head(n);
  const ComplexMatrix k = dec.v * s.asDiagonal() * dec.v.adjoint();
  const ComplexMatrix k_inv = dec.v * s.cwiseInverse().asDiagonal() * dec.v.adjoint();

  const RealVector d_inv = d.entries().cwiseInverse();
  const HermitianMatrix f = hermitize(k * d_inv.asDiagonal() * k);
  const HermitianMatrix f_minus_i = f - ComplexMatrix::Identity(n, n);
  const HermitianMatrix kept = f_minus_i + nonpos_eigenmodes(f_minus_i);
  return hermitize(k_inv * kept * k_inv);
}

// m < n. Split V = [V1 V2] (V1 spans the row space of H). The rate only sees
// V1^H Q V1, which solves the tall problem with D replaced by the Schur
// complement (V1^H D^-1 V1)^-1; the V2 part is then fixed by complementarity,
// giving Q = L Y L^H with L = I - V2 (V2^H D V2)^-1 V2^H D and
// Y = H^+ (H D^-1 H^H - I + S) H^+H. Expanding L Y L^H reproduces
// D^-1 - H^+ H^+H + Z - X.
HermitianMatrix mode_drop_wide(const ChannelMatrix& h, const SingularDecomposition& dec,
                               const DualDiagonal& d) {
  const Eigen::Index m = h.rows();
  const Eigen::Index n = h.cols();
  const ComplexMatrix v1 = dec.v.leftCols(m);
  const ComplexMatrix v2 = dec.v.rightCols(n - m);
  const RealVector s = dec.singular_values.head(m);
  const ComplexMatrix h_pinv = v1 * s.cwiseInverse().asDiagonal() * dec.u.adjoint();

  const RealVector d_inv = d.entries().cwiseInverse();
  const HermitianMatrix f = hermitize(h * d_inv.asDiagonal() * h.adjoint());
  const HermitianMatrix f_minus_i = f - ComplexMatrix::Identity(m, m);
  const HermitianMatrix kept = f_minus_i + nonpos_eigenmodes(f_minus_i);
  const HermitianMatrix y = hermitize(h_pinv * kept * h_pinv.adjoint());

  const ComplexMatrix d_v2 = d.entries().asDiagonal() * v2;
  const HermitianMatrix d22 = hermitize(v2.adjoint() * d_v2);
  Eigen::LLT<ComplexMatrix> llt(d22);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("mode_drop_covariance: V2^H D V2 is numerically singular");
  }
  // L = I - V2 (V2^H D V2)^-1 (D V2)^H
  const ComplexMatrix l =
      ComplexMatrix::Identity(n, n) - v2 * llt.solve(d_v2.adjoint());
  return hermitize(l * y * l.adjoint());
}

}  // namespace

HermitianMatrix mode_drop_covariance(const ChannelMatrix& h, const DualDiagonal& d) {
  if (d.size() != h.cols()) {
    throw DimensionMismatch("mode_drop_covariance: dual size differs from transmit antennas");
  }
  const SingularDecomposition dec = svd(h);
  require_full_rank(dec);
  const HermitianMatrix q =
      h.rows() >= h.cols() ? mode_drop_tall(dec, d) : mode_drop_wide(h, dec, d);
  return psd_repair(q);
}

DualDiagonal update_dual(const DualDiagonal& d, const PowerBudget& p, const HermitianMatrix& q) {
  if (d.size() != p.size() || q.rows() != p.size()) {
    throw DimensionMismatch("update_dual: inconsistent dimensions");
  }
  RealVector next(d.size());
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    const double inv = 1.0 / d(j) + p(j) - q(j, j).real();
    next(j) = std::max(1.0 / std::max(inv, kDualFloor), kDualFloor);
  }
  return DualDiagonal(std::move(next));
}

double single_user_gap(const DualDiagonal& d, const HermitianMatrix& q, const PowerBudget& p) {
  if (d.size() != p.size() || q.rows() != p.size()) {
    throw DimensionMismatch("single_user_gap: inconsistent dimensions");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < d.size(); ++j) sum += d(j) * (q(j, j).real() - p(j));
  return std::abs(sum);
}

namespace {

double power_residual(const HermitianMatrix& q, const PowerBudget& p) {
  return (q.diagonal().real() - p.per_antenna()).cwiseAbs().maxCoeff();
}

}  // namespace

SingleUserResult solve_single_user(const ChannelMatrix& h, const PowerBudget& p,
                                   const SingleUserOptions& options) {
  if (p.size() != h.cols()) {
    throw DimensionMismatch("solve_single_user: budget size differs from transmit antennas");
  }
  const double power_tol = options.power_tol * std::max(1.0, p.per_antenna().maxCoeff());
  DualDiagonal d = options.initial_dual.value_or(DualDiagonal::identity(h.cols()));
  if (d.size() != h.cols()) throw DimensionMismatch("solve_single_user: initial dual size");

  SingleUserResult best;
  best.power_residual = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  for (int it = 1; it <= options.max_iters; ++it) {
    HermitianMatrix q = mode_drop_covariance(h, d);
    const double gap = single_user_gap(d, q, p);
    const double residual = power_residual(q, p);
    trace.push_back(gap);
    if (gap <= options.tol && residual <= power_tol) {
      SingleUserResult out;
      out.rate_nats = single_user_rate(h, q);
      out.covariance = std::move(q);
      out.dual = std::move(d);
      out.gap_trace = std::move(trace);
      out.iterations = it;
      out.power_residual = residual;
      return out;
    }
    if (residual < best.power_residual) {
      best.covariance = q;
      best.dual = d;
      best.iterations = it;
      best.power_residual = residual;
    }
    d = update_dual(d, p, q);
  }
  best.rate_nats = single_user_rate(h, best.covariance);
  best.gap_trace = trace;
  std::ostringstream msg;
  msg << "solve_single_user: no convergence after " << options.max_iters
      << " iterations (final gap " << trace.back() << ")";
  throw MaxItersExceeded<SingleUserResult>(msg.str(), trace.back(), std::move(best));
}

HermitianMatrix miso_closed_form(const ChannelMatrix& h, const PowerBudget& p) {
  if (h.rows() != 1 || h.cols() != p.size()) {
    throw DimensionMismatch("miso_closed_form: expects a 1 x n channel and n power caps");
  }
  const Eigen::Index n = h.cols();
  ComplexVector a(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double magnitude = std::abs(h(0, j));
    if (magnitude == 0.0) {
      std::ostringstream msg;
      msg << "miso_closed_form: channel entry " << j << " is zero";
      throw ZeroChannelEntry(msg.str());
    }
    a(j) = std::conj(h(0, j)) / magnitude * std::sqrt(p(j));
  }
  // q_ij = a_i conj(a_j) = conj(h_i) h_j / |h_i h_j| * sqrt(P_i P_j)
  return hermitize(a * a.adjoint());
}

KktResiduals kkt_report_single(const ChannelMatrix& h, const PowerBudget& p,
                               const HermitianMatrix& q, const DualDiagonal& d) {
  if (q.rows() != h.cols() || d.size() != h.cols() || p.size() != h.cols()) {
    throw DimensionMismatch("kkt_report_single: inconsistent dimensions");
  }
  const ComplexMatrix w = hermitize(
      ComplexMatrix::Identity(h.rows(), h.rows()) + h * q * h.adjoint());
  Eigen::LLT<ComplexMatrix> llt(w);
  const ComplexMatrix whitened = llt.matrixL().solve(h);
  HermitianMatrix m = -(whitened.adjoint() * whitened);
  m.diagonal() += d.entries().cast<Complex>();
  m = hermitize(m);
  KktResiduals out;
  out.m_min_eig = min_eigenvalue(m);
  out.complementarity = (m * q).norm();
  out.power_residual = power_residual(q, p);
  return out;
}

}  // namespace modedrop
