#pragma once

#include <string>

#include <json.hpp>

#include "modedrop/channel_model.hpp"
#include "modedrop/mac_solver.hpp"

namespace modedrop {

/// {"m": m, "users": [{"H": [[[re, im], ...], ...], "P": [...]}, ...]}, row-major.
nlohmann::json instance_to_json(const MacInstance& instance);

/// Throws std::invalid_argument on malformed JSON structure, and the usual
/// make_instance errors (DimensionMismatch, RankDeficientChannel).
MacInstance instance_from_json(const nlohmann::json& doc);

/// Reads and parses an instance file; std::runtime_error if it cannot be opened.
MacInstance load_instance(const std::string& path);

/// {"sum_rate_bits", "rate_trace_bits", "gap_trace_nats", "iterations",
///  "converged", "covariances"}; rate_trace_bits is per sweep.
nlohmann::json report_to_json(const SolveReport& report);

nlohmann::json matrix_to_json(const ComplexMatrix& a);
ComplexMatrix matrix_from_json(const nlohmann::json& rows);

}  // namespace modedrop
