#include "modedrop/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "modedrop/errors.hpp"
#include "modedrop/serialization.hpp"
#include "worker_pool.hpp"

namespace modedrop {

using nlohmann::json;

namespace {

// Per-realization feasible-set ordering is checked to this many bits.
constexpr double kOrderingTolBits = 1e-8;
// Sum-power references are solved tightly so that their own certified gap
// cannot mask an ordering violation at kOrderingTolBits.
constexpr double kReferenceTolBits = 1e-9;
// Region corners must land on the sum-capacity line to 1e-8 bits.
constexpr double kRegionTolBits = 1e-8;
// Weak-duality slack of the multiuser gap (nats).
constexpr double kGapSlackNats = 1e-8;

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  for (const double x : xs) m.mean += x;
  m.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / (n - 1.0));
    m.se = m.std / std::sqrt(n);
  }
  return m;
}

bool unequal_split(ConstraintMode mode) {
  return mode == ConstraintMode::kPerAntennaUnequal || mode == ConstraintMode::kSmUnequal;
}

// The per-antenna mode whose budgets match the configured constraint's split.
ConstraintMode per_antenna_flavour(ConstraintMode mode) {
  return unequal_split(mode) ? ConstraintMode::kPerAntennaUnequal
                             : ConstraintMode::kPerAntennaEqual;
}

ConstraintMode sm_flavour(ConstraintMode mode) {
  return unequal_split(mode) ? ConstraintMode::kSmUnequal : ConstraintMode::kSmEqual;
}

PowerBudget split_total(Eigen::Index n, double total, ConstraintMode mode) {
  return unequal_split(mode) ? PowerBudget::proportional_to_index(n, total)
                             : PowerBudget::uniform(n, total / static_cast<double>(n));
}

MacOptions options_from(const ExperimentConfig& config) {
  MacOptions o;
  o.tol_bits = config.tol_bits;
  o.max_iterations = config.max_iters;
  return o;
}

MacOptions reference_options(const ExperimentConfig& config) {
  MacOptions o = options_from(config);
  o.tol_bits = std::min(config.tol_bits, kReferenceTolBits);
  return o;
}

template <typename Fn>
auto tagged(std::size_t index, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw RealizationError("realization " + std::to_string(index) + ": " + e.what(), index);
  }
}

std::vector<double> bits_trace(const SolveReport& report, int length) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(length));
  double last = nats_to_bits(report.sum_rate_nats());
  for (int it = 0; it < length; ++it) {
    const auto i = static_cast<std::size_t>(it);
    if (i < report.iteration_rates_nats.size()) last = nats_to_bits(report.iteration_rates_nats[i]);
    out.push_back(last);
  }
  return out;
}

// Least-squares slope and intercept of y against x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const Moments mx = moments(x);
  const Moments my = moments(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
    sxx += (x[i] - mx.mean) * (x[i] - mx.mean);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my.mean - slope * mx.mean};
}

std::string csv_cell(const json& cell) {
  return cell.is_string() ? cell.get<std::string>() : cell.dump();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSolve: return "solve";
    case ExperimentKind::kConvergence: return "convergence";
    case ExperimentKind::kComplexity: return "complexity";
    case ExperimentKind::kRegion: return "region";
    case ExperimentKind::kSnrSweep: return "snr-sweep";
    case ExperimentKind::kUserSweep: return "user-sweep";
  }
  throw std::invalid_argument("unknown ExperimentKind");
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const ExperimentKind kind :
       {ExperimentKind::kSolve, ExperimentKind::kConvergence, ExperimentKind::kComplexity,
        ExperimentKind::kRegion, ExperimentKind::kSnrSweep, ExperimentKind::kUserSweep}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (users.empty()) throw std::invalid_argument("at least one user count is required");
  for (const std::size_t k : users) {
    if (k < 1) throw std::invalid_argument("user counts must be >= 1");
  }
  if (rx < 1 || tx < 1) throw std::invalid_argument("antenna counts must be >= 1");
  if (power.size() != 1 && static_cast<Eigen::Index>(power.size()) != tx) {
    throw std::invalid_argument("--power takes one value or one value per transmit antenna");
  }
  for (const double p : power) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("powers must be positive");
  }
  if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
  if (!(tol_bits > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max-iters must be >= 1");
  if (snr_db.empty()) throw std::invalid_argument("the SNR grid is empty");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

json config_to_json(const ExperimentConfig& config) {
  return {{"kind", to_string(config.kind)},
          {"users", config.users},
          {"rx", config.rx},
          {"tx", config.tx},
          {"power", config.power},
          {"constraint", to_string(config.constraint)},
          {"realizations", config.realizations},
          {"seed", config.seed},
          {"tol_bits", config.tol_bits},
          {"max_iters", config.max_iters},
          {"snr_db", config.snr_db},
          {"instance", config.instance_path ? json(*config.instance_path) : json(nullptr)}};
}

void write_csv(std::ostream& out, const ExperimentConfig& config, const Table& table) {
  out << "# config: " << config_to_json(config).dump() << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
  if (!table.summary.empty()) out << "# summary: " << table.summary.dump() << '\n';
  if (table.partial()) {
    out << "# partial: " << table.nonconverged
        << " solves hit the iteration cap; their best iterates are included\n";
  }
}

void write_json(std::ostream& out, const ExperimentConfig& config, const Table& table) {
  const json doc = {{"config", config_to_json(config)},
                    {"columns", table.columns},
                    {"rows", table.rows},
                    {"summary", table.summary},
                    {"partial", table.partial()},
                    {"nonconverged", table.nonconverged}};
  out << doc.dump(2) << '\n';
}

PowerBudget configured_budget(const ExperimentConfig& config, ConstraintMode mode) {
  if (config.power.size() == 1) {
    const double p = config.power.front();
    return split_total(config.tx, p * static_cast<double>(config.tx), mode);
  }
  if (static_cast<Eigen::Index>(config.power.size()) != config.tx) {
    throw DimensionMismatch("configured power list length differs from --tx");
  }
  return PowerBudget(Eigen::Map<const RealVector>(config.power.data(), config.tx));
}

MacInstance sample_instance(const ExperimentConfig& config, std::size_t users,
                            std::uint64_t realization, ConstraintMode mode) {
  return make_instance(sample_realization(config.seed, realization, users, config.rx, config.tx),
                       std::vector<PowerBudget>(users, configured_budget(config, mode)));
}

SolveReport solve_under(const MacInstance& instance, ConstraintMode mode,
                        const MacOptions& options) {
  try {
    switch (mode) {
      case ConstraintMode::kPerAntennaEqual:
      case ConstraintMode::kPerAntennaUnequal:
        return solve_mac(instance, options);
      case ConstraintMode::kSumPower:
        return iterative_water_fill(instance, instance.matching_sum_budgets(), options);
      case ConstraintMode::kSmEqual:
      case ConstraintMode::kSmUnequal: {
        SolveReport report;
        for (std::size_t i = 0; i < instance.num_users(); ++i) {
          report.covariances.push_back(
              instance.budget(i).per_antenna().cast<Complex>().asDiagonal());
        }
        const double rate = spatial_multiplexing_rate(instance);
        report.rate_trace_nats = {rate};
        report.iteration_rates_nats = {rate};
        report.converged = true;
        return report;
      }
    }
  } catch (const MaxItersExceeded<SolveReport>& e) {
    return e.best();
  }
  throw std::invalid_argument("solve_under: unknown mode");
}

SolveOutcome run_solve(const ExperimentConfig& config) {
  config.validate();
  MacInstance instance =
      config.instance_path
          ? load_instance(*config.instance_path)
          : sample_instance(config, config.users.front(), 0, config.constraint);
  SolveReport report = solve_under(instance, config.constraint, options_from(config));
  return {std::move(instance), std::move(report)};
}

Table solve_table(const SolveReport& report) {
  Table t;
  t.columns = {"iteration", "rate_bits", "gap_nats"};
  for (std::size_t i = 0; i < report.iteration_rates_nats.size(); ++i) {
    const double gap = i < report.gap_trace_nats.size() ? report.gap_trace_nats[i] : 0.0;
    t.rows.push_back({i + 1, nats_to_bits(report.iteration_rates_nats[i]), gap});
  }
  t.summary = {{"sum_rate_bits", report.sum_rate_bits()},
               {"iterations", report.iterations},
               {"converged", report.converged}};
  t.nonconverged = report.converged ? 0 : 1;
  return t;
}

Table run_convergence(const ExperimentConfig& config) {
  config.validate();
  const std::size_t users = config.users.front();
  const ConstraintMode pa_mode = per_antenna_flavour(config.constraint);
  struct Traces {
    std::vector<double> pa, sp;
    int nonconverged = 0;
  };
  const auto per_realization = detail::parallel_map<Traces>(
      static_cast<std::size_t>(config.realizations), config.workers, [&](std::size_t r) {
        return tagged(r, [&] {
          const MacInstance instance = sample_instance(config, users, r, pa_mode);
          const SolveReport pa = solve_under(instance, pa_mode, options_from(config));
          const SolveReport sp =
              solve_under(instance, ConstraintMode::kSumPower, options_from(config));
          return Traces{bits_trace(pa, config.max_iters), bits_trace(sp, config.max_iters),
                        !pa.converged + !sp.converged};
        });
      });

  Table t;
  t.columns = {"iteration", "pa_mean_bits", "pa_se_bits", "sp_mean_bits", "sp_se_bits"};
  for (int it = 0; it < config.max_iters; ++it) {
    std::vector<double> pa, sp;
    for (const Traces& tr : per_realization) {
      pa.push_back(tr.pa[static_cast<std::size_t>(it)]);
      sp.push_back(tr.sp[static_cast<std::size_t>(it)]);
    }
    const Moments mpa = moments(pa);
    const Moments msp = moments(sp);
    t.rows.push_back({it + 1, mpa.mean, mpa.se, msp.mean, msp.se});
  }
  for (const Traces& tr : per_realization) t.nonconverged += static_cast<std::size_t>(tr.nonconverged);
  return t;
}

Table run_complexity(const ExperimentConfig& config) {
  config.validate();
  const ConstraintMode pa_mode = per_antenna_flavour(config.constraint);
  const auto per_k = static_cast<std::size_t>(config.realizations);
  struct Count {
    double calls_to_tol = 0.0;
    double calls_total = 0.0;
    double sweeps = 0.0;
    bool converged = true;
  };
  const auto counts = detail::parallel_map<Count>(
      config.users.size() * per_k, config.workers, [&](std::size_t item) {
        const std::size_t users = config.users[item / per_k];
        const std::size_t r = item % per_k;
        return tagged(r, [&] {
          const SolveReport rep =
              solve_under(sample_instance(config, users, r, pa_mode), pa_mode,
                          options_from(config));
          // Each entry of the per-update trace is one single-user solve.
          const double target = rep.sum_rate_nats() - bits_to_nats(config.tol_bits);
          std::size_t updates = rep.rate_trace_nats.size();
          for (std::size_t t = 0; t < rep.rate_trace_nats.size(); ++t) {
            if (rep.rate_trace_nats[t] >= target) {
              updates = t + 1;
              break;
            }
          }
          return Count{static_cast<double>(updates),
                       static_cast<double>(rep.single_user_call_count),
                       static_cast<double>(rep.iterations), rep.converged};
        });
      });

  Table t;
  t.columns = {"users",          "calls_to_tol_mean", "calls_to_tol_std", "calls_to_tol_se",
               "calls_total_mean", "sweeps_mean",     "nonconverged"};
  std::vector<double> ks, means;
  for (std::size_t k = 0; k < config.users.size(); ++k) {
    std::vector<double> to_tol, total, sweeps;
    std::size_t failed = 0;
    for (std::size_t r = 0; r < per_k; ++r) {
      const Count& c = counts[k * per_k + r];
      to_tol.push_back(c.calls_to_tol);
      total.push_back(c.calls_total);
      sweeps.push_back(c.sweeps);
      failed += c.converged ? 0 : 1;
    }
    const Moments m = moments(to_tol);
    t.rows.push_back({config.users[k], m.mean, m.std, m.se, moments(total).mean,
                      moments(sweeps).mean, failed});
    t.nonconverged += failed;
    ks.push_back(static_cast<double>(config.users[k]));
    means.push_back(m.mean);
  }
  const auto [slope, intercept] = fit_line(ks, means);
  t.summary = {{"slope_calls_per_user", slope},
               {"intercept_calls", intercept},
               {"ratio_last_to_first", means.front() > 0.0 ? means.back() / means.front() : 0.0}};
  return t;
}

Table run_snr_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::size_t users = config.users.front();
  const auto per_snr = static_cast<std::size_t>(config.realizations);
  struct Point {
    double pa_eq = 0.0, pa_uneq = 0.0, sp = 0.0, sm_eq = 0.0, sm_uneq = 0.0;
    bool ordered = true;
    int nonconverged = 0;
  };
  const auto points = detail::parallel_map<Point>(
      config.snr_db.size() * per_snr, config.workers, [&](std::size_t item) {
        const double snr_db = config.snr_db[item / per_snr];
        const std::size_t r = item % per_snr;
        return tagged(r, [&] {
          // Per-user total power over unit noise; the same channels at every SNR.
          const double total = std::pow(10.0, snr_db / 10.0);
          const auto channels =
              sample_realization(config.seed, r, users, config.rx, config.tx);
          const MacInstance equal = make_instance(
              channels, std::vector<PowerBudget>(
                            users, split_total(config.tx, total, ConstraintMode::kPerAntennaEqual)));
          const MacInstance unequal = equal.with_budgets(std::vector<PowerBudget>(
              users, split_total(config.tx, total, ConstraintMode::kPerAntennaUnequal)));

          const SolveReport pa_eq =
              solve_under(equal, ConstraintMode::kPerAntennaEqual, options_from(config));
          const SolveReport pa_uneq =
              solve_under(unequal, ConstraintMode::kPerAntennaUnequal, options_from(config));
          const SolveReport sp =
              solve_under(equal, ConstraintMode::kSumPower, reference_options(config));
          Point p;
          p.pa_eq = pa_eq.sum_rate_bits();
          p.pa_uneq = pa_uneq.sum_rate_bits();
          p.sp = sp.sum_rate_bits();
          p.sm_eq = nats_to_bits(spatial_multiplexing_rate(equal));
          p.sm_uneq = nats_to_bits(spatial_multiplexing_rate(unequal));
          p.ordered = p.sp >= p.pa_eq - kOrderingTolBits && p.sp >= p.pa_uneq - kOrderingTolBits &&
                      p.pa_eq >= p.sm_eq - kOrderingTolBits &&
                      p.pa_uneq >= p.sm_uneq - kOrderingTolBits;
          p.nonconverged = !pa_eq.converged + !pa_uneq.converged + !sp.converged;
          return p;
        });
      });

  Table t;
  t.columns = {"snr_db"};
  for (const ConstraintMode mode : kAllConstraintModes) {
    t.columns.push_back(to_string(mode) + "_mean_bits");
    t.columns.push_back(to_string(mode) + "_se_bits");
  }
  for (const char* c : {"gap_sp_minus_pa_equal_bits", "gap_pa_minus_sm_equal_bits",
                        "gap_pa_minus_sm_unequal_bits", "pa_equal_minus_unequal_mean_bits",
                        "pa_equal_minus_unequal_se_bits", "ordering_violations", "nonconverged"}) {
    t.columns.push_back(c);
  }
  for (std::size_t s = 0; s < config.snr_db.size(); ++s) {
    std::vector<double> pa_eq, pa_uneq, sp, sm_eq, sm_uneq, diff;
    std::size_t violations = 0;
    std::size_t failed = 0;
    for (std::size_t r = 0; r < per_snr; ++r) {
      const Point& p = points[s * per_snr + r];
      pa_eq.push_back(p.pa_eq);
      pa_uneq.push_back(p.pa_uneq);
      sp.push_back(p.sp);
      sm_eq.push_back(p.sm_eq);
      sm_uneq.push_back(p.sm_uneq);
      diff.push_back(p.pa_eq - p.pa_uneq);
      violations += p.ordered ? 0 : 1;
      failed += static_cast<std::size_t>(p.nonconverged);
    }
    // Same order as kAllConstraintModes.
    const Moments m[] = {moments(pa_eq), moments(pa_uneq), moments(sp), moments(sm_eq),
                         moments(sm_uneq)};
    std::vector<json> row{config.snr_db[s]};
    for (const Moments& mm : m) {
      row.push_back(mm.mean);
      row.push_back(mm.se);
    }
    const Moments d = moments(diff);
    row.insert(row.end(), {m[2].mean - m[0].mean, m[0].mean - m[3].mean, m[1].mean - m[4].mean,
                           d.mean, d.se, violations, failed});
    t.rows.push_back(std::move(row));
    t.nonconverged += failed;
  }
  return t;
}

Table run_user_sweep(const ExperimentConfig& config) {
  config.validate();
  const ConstraintMode pa_mode = per_antenna_flavour(config.constraint);
  const ConstraintMode sm_mode = sm_flavour(config.constraint);
  const auto per_k = static_cast<std::size_t>(config.realizations);
  struct Point {
    double pa = 0.0, sp = 0.0, sm = 0.0, first = 0.0, first_gap = 0.0;
    bool gap_feasible = true;
    int nonconverged = 0;
  };
  const auto points = detail::parallel_map<Point>(
      config.users.size() * per_k, config.workers, [&](std::size_t item) {
        const std::size_t users = config.users[item / per_k];
        const std::size_t r = item % per_k;
        return tagged(r, [&] {
          const MacInstance instance = sample_instance(config, users, r, pa_mode);
          const SolveReport pa = solve_under(instance, pa_mode, options_from(config));
          const SolveReport sp =
              solve_under(instance, ConstraintMode::kSumPower, options_from(config));
          MacOptions one = options_from(config);
          one.max_iterations = 1;
          one.stop_early = false;
          const SolveReport first = solve_mac(instance, one);
          Point p;
          p.pa = pa.sum_rate_bits();
          p.sp = sp.sum_rate_bits();
          p.sm = nats_to_bits(solve_under(instance, sm_mode, options_from(config)).sum_rate_nats());
          p.first = first.sum_rate_bits();
          try {
            p.first_gap = multiuser_gap(instance, first.covariances, first.duals);
          } catch (const DualInfeasible&) {
            p.gap_feasible = false;
          }
          p.nonconverged = !pa.converged + !sp.converged;
          return p;
        });
      });

  Table t;
  t.columns = {"users",          "pa_mean_bits",       "pa_se_bits",         "sp_mean_bits",
               "sp_se_bits",     "sm_mean_bits",       "sm_se_bits",         "first_iter_mean_bits",
               "first_iter_se_bits", "first_gap_mean_nats", "first_gap_max_nats", "gap_bound_nats",
               "bound_violations", "half_bound_fraction", "nonconverged"};
  for (std::size_t k = 0; k < config.users.size(); ++k) {
    const double bound =
        static_cast<double>(config.users[k] - 1) * static_cast<double>(config.rx);
    std::vector<double> pa, sp, sm, first, gaps;
    std::size_t violations = 0;
    std::size_t within_half = 0;
    std::size_t failed = 0;
    for (std::size_t r = 0; r < per_k; ++r) {
      const Point& p = points[k * per_k + r];
      pa.push_back(p.pa);
      sp.push_back(p.sp);
      sm.push_back(p.sm);
      first.push_back(p.first);
      failed += static_cast<std::size_t>(p.nonconverged);
      if (!p.gap_feasible) {
        ++violations;
        continue;
      }
      gaps.push_back(p.first_gap);
      if (p.first_gap > bound + kGapSlackNats) ++violations;
      if (p.first_gap <= bound / 2.0 + kGapSlackNats) ++within_half;
    }
    const Moments mpa = moments(pa), msp = moments(sp), msm = moments(sm), mf = moments(first);
    const double gap_max = gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
    t.rows.push_back({config.users[k], mpa.mean, mpa.se, msp.mean, msp.se, msm.mean, msm.se,
                      mf.mean, mf.se, moments(gaps).mean, gap_max, bound, violations,
                      static_cast<double>(within_half) / static_cast<double>(per_k), failed});
    t.nonconverged += failed;
  }
  return t;
}

RegionBounds two_user_region(const MacInstance& instance, ConstraintMode mode,
                             const MacOptions& options) {
  if (instance.num_users() != 2) {
    throw NotTwoUsers("two_user_region: instance has " + std::to_string(instance.num_users()) +
                      " users");
  }
  if (mode == ConstraintMode::kSmEqual || mode == ConstraintMode::kSmUnequal) {
    throw std::invalid_argument("two_user_region: spatial multiplexing has no region solver");
  }
  auto solve = [&](SweepOrder order, bool to_convergence) {
    MacOptions o = options;
    o.order = order;
    o.warm_start.reset();
    if (!to_convergence) {
      o.max_iterations = 1;
      o.stop_early = false;
    }
    return solve_under(instance, mode, o);
  };
  const SolveReport a = solve(SweepOrder::kDescending, false);
  const SolveReport b = solve(SweepOrder::kAscending, false);
  const SolveReport c = solve(SweepOrder::kDescending, true);
  const SolveReport d = solve(SweepOrder::kAscending, true);

  // The user decoded last sees no interference; the other gets the remainder.
  auto last_decoded = [&](std::size_t user, const CovarianceSet& qs) {
    const double own = nats_to_bits(single_user_rate(instance.channel(user), qs[user]));
    const double rest = nats_to_bits(sum_rate(instance, qs)) - own;
    return user == 0 ? RatePair{own, rest} : RatePair{rest, own};
  };
  auto mix = [](const CovarianceSet& x, const CovarianceSet& y, double mu) {
    CovarianceSet out;
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(hermitize(mu * x[i] + (1.0 - mu) * y[i]));
    return out;
  };

  RegionBounds region;
  region.a = last_decoded(1, a.covariances);
  region.b = last_decoded(0, b.covariances);
  region.c = last_decoded(1, c.covariances);
  region.d = last_decoded(0, d.covariances);
  region.single_user_1 = region.b.r1;
  region.single_user_2 = region.a.r2;
  region.sum_capacity = std::max(c.sum_rate_bits(), d.sum_rate_bits());
  region.converged = c.converged && d.converged;

  const double steps = kRegionCurvePoints - 1;
  region.inner.push_back({0.0, region.single_user_2});
  for (int k = 0; k < kRegionCurvePoints; ++k) {
    region.inner.push_back(last_decoded(1, mix(a.covariances, c.covariances, 1.0 - k / steps)));
  }
  for (int k = 0; k < kRegionCurvePoints; ++k) {
    region.inner.push_back(last_decoded(0, mix(b.covariances, d.covariances, k / steps)));
  }
  region.inner.push_back({region.single_user_1, 0.0});

  // Every inner point is achievable, so each capacity is at least the best
  // value seen anywhere; the solver estimates are only good to tolerance.
  for (const RatePair& p : region.inner) {
    region.single_user_1 = std::max(region.single_user_1, p.r1);
    region.single_user_2 = std::max(region.single_user_2, p.r2);
    region.sum_capacity = std::max(region.sum_capacity, p.r1 + p.r2);
  }
  region.inner.front().r2 = region.single_user_2;
  region.inner.back().r1 = region.single_user_1;

  region.outer = {{0.0, region.single_user_2},
                  {region.sum_capacity - region.single_user_2, region.single_user_2},
                  {region.single_user_1, region.sum_capacity - region.single_user_1},
                  {region.single_user_1, 0.0}};
  return region;
}

double corner_line_error(const RegionBounds& region) {
  return std::max(std::abs(region.c.r1 + region.c.r2 - region.sum_capacity),
                  std::abs(region.d.r1 + region.d.r2 - region.sum_capacity));
}

double inner_excess(const RegionBounds& region) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const RatePair& p : region.inner) {
    worst = std::max({worst, p.r1 - region.single_user_1, p.r2 - region.single_user_2,
                      p.r1 + p.r2 - region.sum_capacity});
  }
  return worst;
}

Table run_region(const ExperimentConfig& config) {
  config.validate();
  const MacInstance instance =
      config.instance_path
          ? load_instance(*config.instance_path)
          : sample_instance(config, config.users.front(), 0, per_antenna_flavour(config.constraint));
  MacOptions options = options_from(config);
  options.tol_bits = std::min(config.tol_bits, kRegionTolBits);

  Table t;
  t.columns = {"constraint", "series", "point", "r1_bits", "r2_bits"};
  for (const ConstraintMode mode : {ConstraintMode::kPerAntennaEqual, ConstraintMode::kSumPower}) {
    const RegionBounds region = two_user_region(instance, mode, options);
    const std::string name = mode == ConstraintMode::kSumPower ? "sum-power" : "per-antenna";
    auto emit = [&](const char* series, const std::vector<RatePair>& pts) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        t.rows.push_back({name, series, i, pts[i].r1, pts[i].r2});
      }
    };
    emit("A", {region.a});
    emit("B", {region.b});
    emit("C", {region.c});
    emit("D", {region.d});
    emit("inner", region.inner);
    emit("outer", region.outer);
    t.summary[name] = {{"sum_capacity_bits", region.sum_capacity},
                       {"single_user_1_bits", region.single_user_1},
                       {"single_user_2_bits", region.single_user_2},
                       {"corner_line_error_bits", corner_line_error(region)},
                       {"inner_excess_bits", inner_excess(region)}};
    t.nonconverged += region.converged ? 0 : 1;
  }
  return t;
}

Table run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kSolve: return solve_table(run_solve(config).report);
    case ExperimentKind::kConvergence: return run_convergence(config);
    case ExperimentKind::kComplexity: return run_complexity(config);
    case ExperimentKind::kRegion: return run_region(config);
    case ExperimentKind::kSnrSweep: return run_snr_sweep(config);
    case ExperimentKind::kUserSweep: return run_user_sweep(config);
  }
  throw std::invalid_argument("unknown experiment kind");
}

}  // namespace modedrop
