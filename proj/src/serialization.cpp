#include "modedrop/serialization.hpp"

#include <fstream>
#include <stdexcept>

#include "modedrop/errors.hpp"

namespace modedrop {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back({a(r, c).real(), a(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
    throw std::invalid_argument("matrix must be a nonempty array of nonempty rows");
  }
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = static_cast<Eigen::Index>(rows[0].size());
  ComplexMatrix a(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw std::invalid_argument("matrix rows must all have the same length");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      const json& entry = row[static_cast<std::size_t>(c)];
      if (entry.is_number()) {
        a(r, c) = Complex(entry.get<double>(), 0.0);
      } else if (entry.is_array() && entry.size() == 2 && entry[0].is_number() &&
                 entry[1].is_number()) {
        a(r, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
      } else {
        throw std::invalid_argument("matrix entries must be [re, im] pairs");
      }
    }
  }
  return a;
}

json instance_to_json(const MacInstance& instance) {
  json users = json::array();
  for (std::size_t i = 0; i < instance.num_users(); ++i) {
    const RealVector& p = instance.budget(i).per_antenna();
    users.push_back({{"H", matrix_to_json(instance.channel(i))},
                     {"P", std::vector<double>(p.data(), p.data() + p.size())}});
  }
  return {{"m", instance.rx_antennas()}, {"users", std::move(users)}};
}

MacInstance instance_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("users") || !doc["users"].is_array() ||
      doc["users"].empty()) {
    throw std::invalid_argument("instance JSON needs a nonempty \"users\" array");
  }
  std::vector<ChannelMatrix> channels;
  std::vector<PowerBudget> budgets;
  for (const json& user : doc["users"]) {
    if (!user.contains("H") || !user.contains("P") || !user["P"].is_array()) {
      throw std::invalid_argument("each user needs \"H\" and \"P\"");
    }
    channels.push_back(matrix_from_json(user["H"]));
    const auto p = user["P"].get<std::vector<double>>();
    budgets.emplace_back(Eigen::Map<const RealVector>(p.data(), static_cast<Eigen::Index>(p.size())));
  }
  if (doc.contains("m") && doc["m"].get<Eigen::Index>() != channels.front().rows()) {
    throw DimensionMismatch("\"m\" disagrees with the channel row count");
  }
  return make_instance(std::move(channels), std::move(budgets));
}

MacInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("instance file " + path + ": " + e.what());
  }
  return instance_from_json(doc);
}

json report_to_json(const SolveReport& report) {
  std::vector<double> rates;
  rates.reserve(report.iteration_rates_nats.size());
  for (const double r : report.iteration_rates_nats) rates.push_back(nats_to_bits(r));
  json covariances = json::array();
  for (const HermitianMatrix& q : report.covariances) covariances.push_back(matrix_to_json(q));
  return {{"sum_rate_bits", report.sum_rate_bits()},
          {"rate_trace_bits", std::move(rates)},
          {"gap_trace_nats", report.gap_trace_nats},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"covariances", std::move(covariances)}};
}

}  // namespace modedrop
