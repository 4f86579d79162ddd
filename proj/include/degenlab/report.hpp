#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace degenlab {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

enum class Status { Pass, Fail, Degenerate, Inconclusive, HypothesisViolation };

std::string_view to_string(Status s);
std::optional<Status> status_from_string(std::string_view s);

struct GridInfo {
  double h = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Structured outcome of one verification.
///
/// `expected` is set when the caller knows the outcome the instance should
/// produce (for example a counterexample that must be detected as a
/// violation). A report is `ok()` when the observed status matches the
/// expectation, or is Pass when no expectation is attached.
struct CheckReport {
  std::string check;
  Json params = Json::object();
  Status status = Status::Pass;
  // Largest (measured - allowed) seen; positive means violated.
  double worst_violation = -std::numeric_limits<double>::infinity();
  std::vector<double> witness;
  std::map<std::string, double> tolerances;
  std::optional<GridInfo> grid;
  std::optional<std::uint64_t> seed;
  Json metrics = Json::object();
  std::vector<std::string> notes;
  std::optional<Status> expected;
  double elapsed_ms = 0.0;

  bool ok() const { return expected ? status == *expected : status == Status::Pass; }

  // Records a candidate violation; keeps the largest one and its witness.
  void observe(double violation, const std::vector<double>& at);

  Json to_json(bool deterministic = false) const;
};

CheckReport report_from_json(const Json& j);

}  // namespace degenlab
