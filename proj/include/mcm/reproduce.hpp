#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcm/config.hpp"

namespace mcm {

struct Check {
  std::string name;
  double measured = 0.0;
  std::string target;
  std::string tolerance;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string key;     // module filter key
  std::string title;
  std::vector<Check> checks;
  double budget_seconds = 0.0;
  double seconds = 0.0;  // wall time; kept out of the JSON report
  bool pass() const;
};

struct ReproduceOptions {
  // Keys ("spam", "budget", ...) or criterion numbers; empty runs everything.
  std::vector<std::string> only;
  std::int64_t shots = 10000;          // per end-to-end experiment
  std::int64_t ramsey_shots = 2500;    // per Ramsey phase
  int ramsey_points = 12;
};

// Filter keys in criterion order.
const std::vector<std::pair<int, std::string>>& criterion_keys();

// Throws std::invalid_argument for an unknown filter entry.
std::vector<CriterionResult> reproduce(const RunConfig& cfg, const ReproduceOptions& opts);

// Deterministic report: no timings, fixed key order.
nlohmann::ordered_json reproduce_json(const std::vector<CriterionResult>& results, const RunConfig& cfg);
// Human-readable table including wall times.
std::string reproduce_table(const std::vector<CriterionResult>& results);

}  // namespace mcm
