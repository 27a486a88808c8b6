#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "permlab/matrix.hpp"

namespace permlab {

// What a probe script can actually see: the context-resolved default state.
// GrantedWhenInstalled never appears here; the classifier resolves g* cells
// through the observation's context before comparing.
enum class ObservedState { kGranted, kPrompted, kDenied, kUnsupported };

std::string_view observed_token(ObservedState state);
ObservedState observed_from_token(std::string_view token);  // throws ParseError

// The ObservedState a probe on `target` would report for `descriptor`.
ObservedState observe_cell(const PermissionMatrix& matrix, std::string_view descriptor,
                           std::string_view target, QueryContext context);

// A partial set of probed default states gathered on some device.
struct Observation {
  QueryContext context = QueryContext::kBrowserTab;
  std::map<std::string, ObservedState> states;

  // {"context": "installed"|"tab", "states": {name: "granted"|...}}.
  // context defaults to "tab" when absent.
  static Observation from_json(const nlohmann::json& doc);
  static Observation load_file(const std::string& path);
  nlohmann::json to_json() const;
};

struct TargetMismatch {
  std::string target;
  int mismatch_count = 0;
};

struct ClassificationResult {
  // Targets whose columns are fully consistent with the observation.
  std::vector<std::string> exact;
  // Every matrix target once, ascending by (mismatch_count, target id).
  std::vector<TargetMismatch> ranked;

  nlohmann::json to_json() const;
};

// Hamming-distance decision-table classification over the observed keys only;
// unobserved descriptors contribute nothing. Throws UnknownNameError if an
// observation key is not a matrix descriptor.
ClassificationResult classify(const Observation& observation, const PermissionMatrix& matrix);

// Greedy probe planning: repeatedly pick the descriptor that splits the
// current target groups into the most groups, ties broken by lexicographic
// descriptor name; stop when every group is a singleton or max_probes is
// reached (or no descriptor refines further). Cells are compared as
// InstalledPwa-resolved values, the same value space classify sees when the
// plan is executed, so a claimed split is always observable.
std::vector<std::string> plan_probes(const std::vector<std::string>& targets,
                                     const PermissionMatrix& matrix, int max_probes);

// True iff probing exactly `probes` distinguishes every target in `targets`
// from every other (on InstalledPwa-resolved values).
bool probes_separate(const std::vector<std::string>& probes,
                     const std::vector<std::string>& targets, const PermissionMatrix& matrix);

}  // namespace permlab
