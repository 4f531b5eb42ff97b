#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "modedrop/baselines.hpp"
#include "modedrop/channel_model.hpp"
#include "modedrop/mac_solver.hpp"

namespace modedrop {

enum class ExperimentKind { kSolve, kConvergence, kComplexity, kRegion, kSnrSweep, kUserSweep };

/// "solve", "convergence", "complexity", "region", "snr-sweep", "user-sweep"
std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSolve;
  /// Number of users; sweeps over K (complexity, user-sweep) use every entry,
  /// everything else uses the first.
  std::vector<std::size_t> users{4};
  Eigen::Index rx = 4;
  Eigen::Index tx = 4;
  /// One entry: power per antenna. tx entries: the per-antenna budget itself.
  /// Ignored by snr-sweep, where the SNR sets each user's total power.
  std::vector<double> power{0.5};
  ConstraintMode constraint = ConstraintMode::kPerAntennaEqual;
  int realizations = 200;
  std::uint64_t seed = 1;
  double tol_bits = 1e-6;
  /// Outer sweep cap; also the length of the convergence trace.
  int max_iters = 100;
  /// Per-user SNR grid (dB) for snr-sweep.
  std::vector<double> snr_db{-10, -5, 0, 5, 10, 15, 20};
  /// solve / region: read the instance here instead of sampling one.
  std::optional<std::string> instance_path;
  /// Execution detail only; never changes results and is not serialized.
  int workers = 1;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Every field that can influence results (so not `workers`).
nlohmann::json config_to_json(const ExperimentConfig& config);

/// A result table. Cells are numbers or strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  nlohmann::json summary = nlohmann::json::object();
  /// Realizations whose solve hit the iteration cap; their best iterate is used.
  std::size_t nonconverged = 0;

  bool partial() const { return nonconverged > 0; }
};

/// "# config: {...}", a header row, the data rows, then "# summary: {...}"
/// and, for partial results, a "# partial: ..." line.
void write_csv(std::ostream& out, const ExperimentConfig& config, const Table& table);
/// {"config", "columns", "rows", "summary", "partial", "nonconverged"}
void write_json(std::ostream& out, const ExperimentConfig& config, const Table& table);

/// Per-antenna budget of one user under `mode` (equal or index-proportional
/// split) from the configured power.
PowerBudget configured_budget(const ExperimentConfig& config, ConstraintMode mode);

/// The instance for one realization: seeded Rayleigh channels and the
/// configured budgets under `mode`.
MacInstance sample_instance(const ExperimentConfig& config, std::size_t users,
                            std::uint64_t realization, ConstraintMode mode);

/// Solves an instance under `mode`: mode-dropping for per-antenna modes,
/// iterative water-filling with matching totals for sum-power, and the fixed
/// diagonal covariances (zero iterations) for spatial multiplexing.
/// Never throws MaxItersExceeded; check report.converged.
SolveReport solve_under(const MacInstance& instance, ConstraintMode mode,
                        const MacOptions& options);

struct SolveOutcome {
  MacInstance instance;
  SolveReport report;
};

/// kind = solve: the instance file if given, else realization 0.
SolveOutcome run_solve(const ExperimentConfig& config);
/// Per-sweep rate and gap of a single solve.
Table solve_table(const SolveReport& report);

/// Mean (and standard error) sum rate per sweep for mode-dropping and
/// water-filling. Solves stop at convergence; later sweeps repeat the final rate.
Table run_convergence(const ExperimentConfig& config);

/// Per K: single-user solves until the rate is within tol_bits of its
/// converged value. Summary carries the least-squares slope over K.
Table run_complexity(const ExperimentConfig& config);

/// Per SNR point: mean capacity of all five modes, capacity gaps, and a count
/// of per-realization violations of sum-power >= per-antenna >= SM (1e-8 bits).
Table run_snr_sweep(const ExperimentConfig& config);

/// Per K: converged capacity for per-antenna, sum-power and SM, plus the
/// per-antenna rate and certified gap after exactly one sweep.
Table run_user_sweep(const ExperimentConfig& config);

struct RatePair {
  double r1 = 0.0;  // bits
  double r2 = 0.0;
};

struct RegionBounds {
  /// A: one sweep, user 2 first. B: one sweep, user 1 first.
  RatePair a, b;
  /// Sum-capacity corners: C decodes user 2 last, D decodes user 1 last.
  RatePair c, d;
  /// (0, C2), the A-C curve, the D-B curve, (C1, 0).
  std::vector<RatePair> inner;
  /// (0, C2), (Csum - C2, C2), (C1, Csum - C1), (C1, 0).
  std::vector<RatePair> outer;
  /// Best values reached by any computed point (bits); the outer bound uses these.
  double sum_capacity = 0.0;
  double single_user_1 = 0.0;
  double single_user_2 = 0.0;
  bool converged = true;
};

/// Points traced along each mixed-covariance curve.
inline constexpr int kRegionCurvePoints = 33;

/// Two-user rate-region bounds under per-antenna (either per-antenna mode)
/// or sum-power constraints. C and D come from converged solves in reverse
/// and natural user order; `options` sets their tolerance and sweep cap.
/// Throws NotTwoUsers unless K = 2 and std::invalid_argument for
/// spatial-multiplexing modes.
RegionBounds two_user_region(const MacInstance& instance, ConstraintMode mode,
                             const MacOptions& options);

/// max distance (bits) of C and D from the sum-capacity line.
double corner_line_error(const RegionBounds& region);
/// Largest amount (bits) by which an inner point leaves the outer bound; <= 0 when inside.
double inner_excess(const RegionBounds& region);

/// kind = region: per-antenna and sum-power bounds of one instance.
Table run_region(const ExperimentConfig& config);

/// Dispatches on config.kind (solve gives solve_table).
Table run_experiment(const ExperimentConfig& config);

}  // namespace modedrop
