#include "degenlab/report.hpp"

#include <cmath>

#include "degenlab/error.hpp"

namespace degenlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Hypothesis: return "hypothesis-violation";
    case ErrorKind::Stencil: return "stencil";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Degenerate: return "degenerate-input";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Degenerate: return "degenerate";
    case Status::Inconclusive: return "inconclusive";
    case Status::HypothesisViolation: return "hypothesis_violation";
  }
  return "fail";
}

std::optional<Status> status_from_string(std::string_view s) {
  for (Status st : {Status::Pass, Status::Fail, Status::Degenerate, Status::Inconclusive,
                    Status::HypothesisViolation}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

void CheckReport::observe(double violation, const std::vector<double>& at) {
  if (!(violation <= worst_violation)) {
    worst_violation = violation;
    witness = at;
  }
}

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// Non-finite doubles are not representable in JSON; map them to null recursively.
Json sanitize(const Json& j) {
  if (j.is_number_float()) return finite_or_null(j.get<double>());
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& e : j) out.push_back(sanitize(e));
    return out;
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = sanitize(it.value());
    return out;
  }
  return j;
}

}  // namespace

Json CheckReport::to_json(bool deterministic) const {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["check"] = check;
  j["params"] = sanitize(params);
  j["status"] = std::string(to_string(status));
  j["pass"] = ok();
  j["expected"] = expected ? Json(std::string(to_string(*expected))) : Json(nullptr);
  j["worst_violation"] = finite_or_null(worst_violation);
  j["witness"] = sanitize(Json(witness));
  Json tol = Json::object();
  for (const auto& [k, v] : tolerances) tol[k] = finite_or_null(v);
  j["tolerances"] = tol;
  if (grid) {
    j["grid"] = {{"h", grid->h}, {"extents", {{"lower", grid->lower}, {"upper", grid->upper}}}};
  } else {
    j["grid"] = nullptr;
  }
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["metrics"] = sanitize(metrics);
  j["notes"] = notes;
  if (!deterministic) j["elapsed_ms"] = elapsed_ms;
  return j;
}

CheckReport report_from_json(const Json& j) {
  CheckReport r;
  r.check = j.at("check").get<std::string>();
  r.params = j.value("params", Json::object());
  auto st = status_from_string(j.at("status").get<std::string>());
  require(st.has_value(), ErrorKind::Input, "unknown status in report JSON");
  r.status = *st;
  if (j.contains("expected") && !j["expected"].is_null()) {
    r.expected = status_from_string(j["expected"].get<std::string>());
  }
  if (!j.at("worst_violation").is_null()) r.worst_violation = j["worst_violation"].get<double>();
  for (const auto& w : j.at("witness")) r.witness.push_back(w.is_null() ? NAN : w.get<double>());
  for (auto it = j.at("tolerances").begin(); it != j["tolerances"].end(); ++it) {
    r.tolerances[it.key()] = it.value().is_null() ? NAN : it.value().get<double>();
  }
  if (!j.at("grid").is_null()) {
    GridInfo g;
    g.h = j["grid"]["h"].get<double>();
    g.lower = j["grid"]["extents"]["lower"].get<std::vector<double>>();
    g.upper = j["grid"]["extents"]["upper"].get<std::vector<double>>();
    r.grid = g;
  }
  if (!j.at("seed").is_null()) r.seed = j["seed"].get<std::uint64_t>();
  r.metrics = j.value("metrics", Json::object());
  r.notes = j.value("notes", std::vector<std::string>{});
  r.elapsed_ms = j.value("elapsed_ms", 0.0);
  return r;
}

}  // namespace degenlab
