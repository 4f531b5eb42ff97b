// Command-line front end: one subcommand per study.
//
//   modedrop solve       --users 4 --power 0.5
//   modedrop convergence --users 15 --max-iters 20 --realizations 50
//   modedrop complexity  --users 2,4,8 --realizations 100
//   modedrop region      --users 2 --instance two_users.json
//   modedrop snr-sweep   --users 4 --snr-db -10,0,10,20
//   modedrop user-sweep  --users 1,2,4,8,15
//
// Exit status: 0 on success, 1 on bad input or solver errors, 2 when some
// solve hit the iteration cap (results are still written, flagged partial).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modedrop/errors.hpp"
#include "modedrop/experiment.hpp"
#include "modedrop/serialization.hpp"

namespace {

using modedrop::ExperimentConfig;
using modedrop::ExperimentKind;

struct RawArgs {
  std::string users = "4";
  long rx = 4;
  long tx = 4;
  std::string power = "0.5";
  std::string constraint = "pa-equal";
  int realizations = 200;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int max_iters = 100;
  std::string format = "csv";
  std::string out;
  std::string instance;
  int workers = 1;
  std::string snr_db = "-10,-5,0,5,10,15,20";
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream one(item);
    T v{};
    if (!(one >> v) || !(one >> std::ws).eof()) {
      throw std::invalid_argument(std::string(flag) + ": cannot parse '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument(std::string(flag) + ": empty list");
  return values;
}

void add_options(CLI::App* cmd, RawArgs& a) {
  cmd->add_option("--users", a.users, "user count K, or a comma list for K sweeps")
      ->capture_default_str();
  cmd->add_option("--rx", a.rx, "receive antennas m")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--tx", a.tx, "transmit antennas n per user")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--power", a.power, "per-antenna power, or a comma list with one entry per antenna")
      ->capture_default_str();
  cmd->add_option("--constraint", a.constraint, "pa-equal|pa-unequal|sum-power|sm-equal|sm-unequal")
      ->capture_default_str();
  cmd->add_option("--realizations", a.realizations, "Monte-Carlo channel draws")->capture_default_str();
  cmd->add_option("--seed", a.seed, "base seed")->capture_default_str();
  cmd->add_option("--tol", a.tol, "outer tolerance in bits")->capture_default_str();
  cmd->add_option("--max-iters", a.max_iters, "outer sweep cap (convergence: trace length)")
      ->capture_default_str();
  cmd->add_option("--format", a.format, "csv|json")->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", a.out, "output file (default stdout)");
  cmd->add_option("--instance", a.instance, "instance JSON file (solve, region)")->check(CLI::ExistingFile);
  cmd->add_option("--workers", a.workers, "worker threads; output does not depend on it")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--snr-db", a.snr_db, "per-user SNR grid in dB (snr-sweep)")->capture_default_str();
}

ExperimentConfig to_config(ExperimentKind kind, const RawArgs& a) {
  ExperimentConfig c;
  c.kind = kind;
  c.users = parse_list<std::size_t>(a.users, "--users");
  c.rx = a.rx;
  c.tx = a.tx;
  c.power = parse_list<double>(a.power, "--power");
  c.constraint = modedrop::parse_constraint_mode(a.constraint);
  c.realizations = a.realizations;
  c.seed = a.seed;
  c.tol_bits = a.tol;
  c.max_iters = a.max_iters;
  c.snr_db = parse_list<double>(a.snr_db, "--snr-db");
  if (!a.instance.empty()) c.instance_path = a.instance;
  c.workers = a.workers;
  c.validate();
  return c;
}

// Returns the process exit status.
int run(const ExperimentConfig& config, const std::string& format, std::ostream& out) {
  if (config.kind == ExperimentKind::kSolve) {
    const modedrop::SolveOutcome outcome = modedrop::run_solve(config);
    if (format == "json") {
      nlohmann::json doc = modedrop::report_to_json(outcome.report);
      doc["config"] = modedrop::config_to_json(config);
      out << doc.dump(2) << '\n';
    } else {
      modedrop::write_csv(out, config, modedrop::solve_table(outcome.report));
    }
    return outcome.report.converged ? 0 : 2;
  }
  const modedrop::Table table = modedrop::run_experiment(config);
  if (format == "json") {
    modedrop::write_json(out, config, table);
  } else {
    modedrop::write_csv(out, config, table);
  }
  return table.partial() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum capacity of the Gaussian MIMO MAC under per-antenna power constraints"};
  app.require_subcommand(1);
  RawArgs args;
  std::vector<std::pair<CLI::App*, ExperimentKind>> commands;
  for (const auto& [name, kind, help] :
       {std::tuple{"solve", ExperimentKind::kSolve, "solve one instance"},
        std::tuple{"convergence", ExperimentKind::kConvergence, "mean sum rate per sweep"},
        std::tuple{"complexity", ExperimentKind::kComplexity, "single-user solves vs K"},
        std::tuple{"region", ExperimentKind::kRegion, "two-user rate region bounds"},
        std::tuple{"snr-sweep", ExperimentKind::kSnrSweep, "capacity vs per-user SNR, all modes"},
        std::tuple{"user-sweep", ExperimentKind::kUserSweep, "capacity vs number of users"}}) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_options(cmd, args);
    commands.emplace_back(cmd, kind);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every usage error is 1, keeping 2 for non-convergence.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    ExperimentKind kind = ExperimentKind::kSolve;
    for (const auto& [cmd, k] : commands) {
      if (cmd->parsed()) kind = k;
    }
    const ExperimentConfig config = to_config(kind, args);
    if (args.out.empty()) return run(config, args.format, std::cout);
    std::ofstream file(args.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + args.out + " for writing");
    const int status = run(config, args.format, file);
    file.close();
    if (!file) throw std::runtime_error("failed writing " + args.out);
    return status;
  } catch (const std::exception& e) {
    std::cerr << "modedrop: " << e.what() << '\n';
    return 1;
  }
}
