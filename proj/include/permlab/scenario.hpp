#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "permlab/permstore.hpp"

namespace permlab {

struct ScenarioEvent {
  enum class Kind { kRequest, kQuery, kSessionEnd, kClosePwa };
  std::string actor;
  Kind kind = Kind::kQuery;
  std::optional<std::string> descriptor;  // request/query
  std::optional<UserAction> action;       // request
  std::optional<QueryOutcome> expect;
};

// A replayable store interaction: one store configuration, a cast of apps,
// and an ordered event list with optional expected outcomes.
struct Scenario {
  std::string description;
  StoreConfig config;
  std::vector<Actor> actors;
  std::vector<ScenarioEvent> events;

  static Scenario from_json(const nlohmann::json& doc);
  static Scenario load_file(const std::string& path);
};

struct TraceEntry {
  std::size_t index = 0;
  std::string actor;
  std::string event;    // human-readable event description
  std::string outcome;  // outcome token, or "action-mismatch"
  std::optional<std::string> expected;
  bool ok = true;  // expectation held (vacuously true when none given)
};

struct ScenarioTrace {
  std::vector<TraceEntry> entries;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

// Deterministic replay: executes events in order against a fresh store,
// records each outcome, and compares against expectations where present.
// An ActionMismatchError inside an event is recorded in-trace as outcome
// "action-mismatch" (failing any expectation), not thrown.
ScenarioTrace run_scenario(const Scenario& scenario, const Registry& registry,
                           const PermissionMatrix& matrix);

}  // namespace permlab
