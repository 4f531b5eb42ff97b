#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "modedrop/errors.hpp"
#include "modedrop/serialization.hpp"

using namespace modedrop;
using nlohmann::json;

TEST_CASE("instance JSON round trip is exact") {
  const auto hs = sample_realization(5, 0, 3, 2, 3);
  const MacInstance inst = make_instance(
      hs, {PowerBudget::uniform(3, 0.5), PowerBudget::proportional_to_index(3, 1.5), PowerBudget::uniform(3, 2.0)});
  const json doc = instance_to_json(inst);
  CHECK(doc["m"] == 2);
  CHECK(doc["users"].size() == 3);
  // through text and back
  const MacInstance back = instance_from_json(json::parse(doc.dump()));
  REQUIRE(back.num_users() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((back.channel(i) - inst.channel(i)).norm() == 0.0);
    CHECK((back.budget(i).per_antenna() - inst.budget(i).per_antenna()).norm() == 0.0);
  }
}

TEST_CASE("instance JSON accepts real entries and omitted m") {
  const json doc = json::parse(R"({"users": [{"H": [[1, [0, 2]]], "P": [0.5, 0.25]}]})");
  const MacInstance inst = instance_from_json(doc);
  CHECK(inst.channel(0)(0, 0) == Complex(1.0, 0.0));
  CHECK(inst.channel(0)(0, 1) == Complex(0.0, 2.0));
  CHECK(inst.budget(0)(1) == 0.25);
}

TEST_CASE("instance JSON errors") {
  CHECK_THROWS_AS(instance_from_json(json::parse(R"({"users": []})")), std::invalid_argument);
  CHECK_THROWS_AS(instance_from_json(json::parse(R"({"users": [{"H": [[1, 2], [3]], "P": [1, 1]}]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(instance_from_json(json::parse(R"({"users": [{"H": [["x"]], "P": [1]}]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(instance_from_json(json::parse(R"({"m": 2, "users": [{"H": [[1]], "P": [1]}]})")),
                  DimensionMismatch);
  CHECK_THROWS_AS(instance_from_json(json::parse(R"({"users": [{"H": [[1, 0], [2, 0]], "P": [1, 1]}]})")),
                  RankDeficientChannel);
  CHECK_THROWS_AS(instance_from_json(json::parse(R"({"users": [{"H": [[1]], "P": [-1]}]})")),
                  std::invalid_argument);
}

TEST_CASE("load_instance") {
  const auto path = std::filesystem::temp_directory_path() / "modedrop_test_instance.json";
  {
    std::ofstream out(path);
    out << R"({"m": 1, "users": [{"H": [[[2, 0]]], "P": [1]}]})";
  }
  CHECK(load_instance(path.string()).channel(0)(0, 0) == Complex(2.0, 0.0));
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK_THROWS_AS(load_instance(path.string()), std::invalid_argument);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_instance(path.string()), std::runtime_error);
}

TEST_CASE("report JSON") {
  const MacInstance inst = make_instance({ComplexMatrix::Ones(1, 1), ComplexMatrix::Ones(1, 1)},
                                         {PowerBudget::uniform(1, 1.0), PowerBudget::uniform(1, 1.0)});
  const SolveReport r = solve_mac(inst);
  const json doc = report_to_json(r);
  for (const char* key : {"sum_rate_bits", "rate_trace_bits", "gap_trace_nats", "iterations", "converged",
                          "covariances"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["sum_rate_bits"].get<double>() == doctest::Approx(std::log2(3.0)));
  CHECK(doc["rate_trace_bits"].size() == static_cast<std::size_t>(r.iterations));
  CHECK((matrix_from_json(doc["covariances"][0]) - r.covariances[0]).norm() == 0.0);
}
