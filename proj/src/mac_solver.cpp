#include "modedrop/mac_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>

#include "modedrop/errors.hpp"
#include "sweep.hpp"

namespace modedrop {

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }
double bits_to_nats(double bits) { return bits * std::numbers::ln2; }

double SolveReport::sum_rate_nats() const {
  return rate_trace_nats.empty() ? 0.0 : rate_trace_nats.back();
}

double SolveReport::sum_rate_bits() const { return nats_to_bits(sum_rate_nats()); }

namespace {

void check_covariances(const MacInstance& instance, const CovarianceSet& qs) {
  if (qs.size() != instance.num_users()) {
    throw DimensionMismatch("covariance count differs from user count");
  }
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (qs[i].rows() != instance.tx_antennas(i) || qs[i].cols() != instance.tx_antennas(i)) {
      std::ostringstream msg;
      msg << "covariance of user " << i << " is " << qs[i].rows() << "x" << qs[i].cols()
          << ", expected order " << instance.tx_antennas(i);
      throw DimensionMismatch(msg.str());
    }
  }
}

void check_duals(const MacInstance& instance, const std::vector<DualDiagonal>& duals) {
  if (duals.size() != instance.num_users()) {
    throw DimensionMismatch("dual count differs from user count");
  }
  for (std::size_t i = 0; i < duals.size(); ++i) {
    if (duals[i].size() != instance.tx_antennas(i)) {
      throw DimensionMismatch("dual size differs from transmit antennas");
    }
  }
}

HermitianMatrix with_diagonal(const HermitianMatrix& g, const RealVector& d) {
  HermitianMatrix m = -g;
  m.diagonal() += d.cast<Complex>();
  return hermitize(m);
}

// S Q S with S = diag(sqrt(P_j / Q_jj)): puts the diagonal exactly on the
// budget so rate comparisons between sweeps are not swamped by the inner
// solver's first-order power residual.
HermitianMatrix scale_to_budget(const HermitianMatrix& q, const PowerBudget& p) {
  const RealVector diag = q.diagonal().real();
  if ((diag.array() <= 0.0).any()) return q;
  const RealVector s = (p.per_antenna().array() / diag.array()).sqrt();
  return hermitize(s.asDiagonal() * q * s.asDiagonal());
}

}  // namespace

namespace detail {

namespace {

// Candidates this close below the current rate differ from it by roundoff only.
constexpr double kRoundoffSlack = 1e-12;

}  // namespace

HermitianMatrix whitened_gram(const HermitianMatrix& w, const ChannelMatrix& h) {
  Eigen::LLT<ComplexMatrix> llt(w);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("whitened_gram: received covariance not positive definite");
  }
  const ComplexMatrix whitened = llt.matrixL().solve(h);
  return hermitize(whitened.adjoint() * whitened);
}

SolveReport run_sweeps(const MacInstance& instance, const MacOptions& options,
                       const UpdateFn& update, const GapFn& gap, const char* solver_name) {
  if (!(options.tol_bits > 0.0)) throw std::invalid_argument("tol_bits must be positive");
  const std::size_t users = instance.num_users();
  const Eigen::Index m = instance.rx_antennas();
  const ComplexMatrix identity = ComplexMatrix::Identity(m, m);

  SolveReport report;
  if (options.warm_start) {
    check_covariances(instance, *options.warm_start);
    report.covariances = *options.warm_start;
  } else {
    for (std::size_t i = 0; i < users; ++i) {
      const Eigen::Index n = instance.tx_antennas(i);
      report.covariances.push_back(HermitianMatrix::Zero(n, n));
    }
  }
  std::vector<HermitianMatrix> contributions;
  for (std::size_t i = 0; i < users; ++i) {
    contributions.push_back(hermitize(instance.channel(i) * report.covariances[i] *
                                      instance.channel(i).adjoint()));
  }
  std::vector<DualDiagonal> duals;
  for (std::size_t i = 0; i < users; ++i) {
    duals.push_back(DualDiagonal::identity(instance.tx_antennas(i)));
  }

  std::vector<std::size_t> order(users);
  for (std::size_t k = 0; k < users; ++k) {
    order[k] = options.order == SweepOrder::kAscending ? k : users - 1 - k;
  }

  double rate = sum_rate(instance, report.covariances);
  double previous_sweep_rate = rate;
  bool have_duals = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    for (const std::size_t i : order) {
      HermitianMatrix interference = identity;
      for (std::size_t k = 0; k < users; ++k) {
        if (k != i) interference += contributions[k];
      }
      const ChannelMatrix effective = inv_sqrt_psd(interference) * instance.channel(i);
      for (int refinement = 0; refinement <= kMaxRefinements; ++refinement) {
        UserUpdate next = update(i, effective, refinement);
        ++report.single_user_call_count;
        report.inner_iteration_count += static_cast<std::size_t>(next.inner_iterations);

        HermitianMatrix contribution =
            hermitize(instance.channel(i) * next.covariance * instance.channel(i).adjoint());
        const double candidate = log_det_hpd(hermitize(interference + contribution));
        if (candidate < rate - kRoundoffSlack) continue;
        report.covariances[i] = std::move(next.covariance);
        contributions[i] = std::move(contribution);
        rate = candidate;
        if (next.dual) {
          duals[i] = std::move(*next.dual);
          have_duals = true;
        }
        break;
      }
      report.rate_trace_nats.push_back(rate);
    }
    report.iteration_rates_nats.push_back(rate);
    const Certificate cert = gap(report.covariances, duals);
    report.gap_trace_nats.push_back(cert.gap);
    report.iterations = it;

    const double increase_bits = nats_to_bits(rate - previous_sweep_rate);
    previous_sweep_rate = rate;
    report.converged = increase_bits < options.tol_bits &&
                       cert.gap < bits_to_nats(options.tol_bits) && cert.kkt <= options.kkt_tol;
    if (options.stop_early && report.converged) break;
  }
  if (have_duals) report.duals = std::move(duals);

  if (options.stop_early && !report.converged) {
    std::ostringstream msg;
    msg << solver_name << ": not converged after " << options.max_iterations << " iterations";
    const double last_gap = report.gap_trace_nats.empty() ? 0.0 : report.gap_trace_nats.back();
    throw MaxItersExceeded<SolveReport>(msg.str(), last_gap, std::move(report));
  }
  return report;
}

}  // namespace detail

HermitianMatrix received_covariance(const MacInstance& instance, const CovarianceSet& qs) {
  check_covariances(instance, qs);
  const Eigen::Index m = instance.rx_antennas();
  HermitianMatrix w = ComplexMatrix::Identity(m, m);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    w += instance.channel(i) * qs[i] * instance.channel(i).adjoint();
  }
  return hermitize(w);
}

double sum_rate(const MacInstance& instance, const CovarianceSet& qs) {
  return log_det_hpd(received_covariance(instance, qs));
}

ChannelMatrix effective_channel(const MacInstance& instance, const CovarianceSet& qs,
                                std::size_t user) {
  check_covariances(instance, qs);
  if (user >= instance.num_users()) throw DimensionMismatch("effective_channel: no such user");
  const Eigen::Index m = instance.rx_antennas();
  HermitianMatrix interference = ComplexMatrix::Identity(m, m);
  for (std::size_t k = 0; k < qs.size(); ++k) {
    if (k != user) interference += instance.channel(k) * qs[k] * instance.channel(k).adjoint();
  }
  return inv_sqrt_psd(hermitize(interference)) * instance.channel(user);
}

SolveReport solve_mac(const MacInstance& instance, const MacOptions& options) {
  const double inner_tol = bits_to_nats(options.tol_bits) / 100.0;
  auto update = [&](std::size_t user, const ChannelMatrix& effective,
                    const std::optional<DualDiagonal>& start, int refinement) {
    SingleUserOptions inner;
    // Each refinement tightens both stopping tolerances a hundredfold.
    // Small budgets shrink both too: an absolute 1e-9 power slack is coarse
    // when P itself is 1e-7.
    const double tighten = std::pow(100.0, -refinement) *
                           std::min(1.0, instance.budget(user).per_antenna().minCoeff());
    inner.tol = inner_tol * tighten;
    inner.power_tol *= tighten;
    inner.max_iters = options.inner_max_iters;
    inner.initial_dual = start;
    SingleUserResult solved;
    try {
      solved = solve_single_user(effective, instance.budget(user), inner);
    } catch (const MaxItersExceeded<SingleUserResult>& e) {
      solved = e.best();
    }
    return detail::UserUpdate{scale_to_budget(solved.covariance, instance.budget(user)),
                              std::move(solved.dual), solved.iterations};
  };
  // Each user's inner solve starts from the dual it finished with last time.
  std::vector<std::optional<DualDiagonal>> last_dual(instance.num_users());
  detail::UpdateFn update_fn = [&](std::size_t user, const ChannelMatrix& effective,
                                   int refinement) {
    detail::UserUpdate next = update(user, effective, last_dual[user], refinement);
    last_dual[user] = next.dual;
    return next;
  };
  detail::GapFn gap_fn = [&](const CovarianceSet& qs, const std::vector<DualDiagonal>& duals) {
    detail::Certificate cert;
    cert.gap = multiuser_gap(instance, qs, lift_to_feasible(instance, qs, duals));
    for (const KktResiduals& r : kkt_report_mac(instance, qs, duals)) {
      cert.kkt = std::max({cert.kkt, -r.m_min_eig, r.complementarity, r.power_residual});
    }
    return cert;
  };
  return detail::run_sweeps(instance, options, update_fn, gap_fn, "solve_mac");
}

double multiuser_gap(const MacInstance& instance, const CovarianceSet& qs,
                     const std::vector<DualDiagonal>& duals) {
  check_duals(instance, duals);
  const HermitianMatrix w = received_covariance(instance, qs);
  double dual_power = 0.0;
  for (std::size_t i = 0; i < duals.size(); ++i) {
    const HermitianMatrix g = detail::whitened_gram(w, instance.channel(i));
    const double slack = min_eigenvalue(with_diagonal(g, duals[i].entries()));
    if (slack < -1e-8) {
      std::ostringstream msg;
      msg << "multiuser_gap: dual of user " << i << " infeasible, min eigenvalue of D - H^H W^-1 H is "
          << slack;
      throw DualInfeasible(msg.str(), i, slack);
    }
    dual_power += duals[i].weighted_power(instance.budget(i));
  }
  Eigen::LLT<ComplexMatrix> llt(w);
  const Eigen::Index m = instance.rx_antennas();
  const double trace_inv = llt.solve(ComplexMatrix::Identity(m, m)).trace().real();
  return trace_inv + dual_power - static_cast<double>(m);
}

std::vector<DualDiagonal> lift_to_feasible(const MacInstance& instance, const CovarianceSet& qs,
                                           const std::vector<DualDiagonal>& duals) {
  check_duals(instance, duals);
  const HermitianMatrix w = received_covariance(instance, qs);
  std::vector<DualDiagonal> out;
  out.reserve(duals.size());
  for (std::size_t i = 0; i < duals.size(); ++i) {
    const HermitianMatrix g = detail::whitened_gram(w, instance.channel(i));
    const double slack = min_eigenvalue(with_diagonal(g, duals[i].entries()));
    if (slack >= 0.0) {
      out.push_back(duals[i]);
    } else {
      out.emplace_back(duals[i].entries().array() - slack);
    }
  }
  return out;
}

std::vector<KktResiduals> kkt_report_mac(const MacInstance& instance, const CovarianceSet& qs,
                                         const std::vector<DualDiagonal>& duals) {
  check_duals(instance, duals);
  const HermitianMatrix w = received_covariance(instance, qs);
  std::vector<KktResiduals> out;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const HermitianMatrix m = with_diagonal(detail::whitened_gram(w, instance.channel(i)),
                                            duals[i].entries());
    KktResiduals r;
    r.m_min_eig = min_eigenvalue(m);
    r.complementarity = (m * qs[i]).norm();
    r.power_residual =
        (qs[i].diagonal().real() - instance.budget(i).per_antenna()).cwiseAbs().maxCoeff();
    out.push_back(r);
  }
  return out;
}

}  // namespace modedrop
