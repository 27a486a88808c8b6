#include "permlab/fingerprint.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "permlab/errors.hpp"

namespace permlab {

std::string_view observed_token(ObservedState state) {
  switch (state) {
    case ObservedState::kGranted:
      return "granted";
    case ObservedState::kPrompted:
      return "prompted";
    case ObservedState::kDenied:
      return "denied";
    case ObservedState::kUnsupported:
      return "unsupported";
  }
  return "unsupported";
}

ObservedState observed_from_token(std::string_view token) {
  if (token == "granted") return ObservedState::kGranted;
  if (token == "prompted") return ObservedState::kPrompted;
  if (token == "denied") return ObservedState::kDenied;
  if (token == "unsupported") return ObservedState::kUnsupported;
  throw ParseError("unknown observed state token: '" + std::string(token) + "'");
}

ObservedState observe_cell(const PermissionMatrix& matrix, std::string_view descriptor,
                           std::string_view target, QueryContext context) {
  switch (matrix.default_state(descriptor, target, context)) {
    case DefaultState::kGranted:
      return ObservedState::kGranted;
    case DefaultState::kPrompted:
      return ObservedState::kPrompted;
    case DefaultState::kDenied:
      return ObservedState::kDenied;
    case DefaultState::kUnsupported:
      return ObservedState::kUnsupported;
    case DefaultState::kGrantedWhenInstalled:
      break;  // unreachable: resolve_state eliminates it
  }
  return ObservedState::kUnsupported;
}

Observation Observation::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("observation document must be an object");
  Observation obs;
  if (auto it = doc.find("context"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("observation 'context' must be a string");
    obs.context = context_from_token(it->get<std::string>());
  }
  auto states = doc.find("states");
  if (states == doc.end() || !states->is_object()) {
    throw ParseError("observation document needs a 'states' object");
  }
  for (const auto& [name, value] : states->items()) {
    if (!value.is_string()) {
      throw ParseError("observation state for '" + name + "' must be a string");
    }
    obs.states[name] = observed_from_token(value.get<std::string>());
  }
  return obs;
}

Observation Observation::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open observation file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) throw ParseError("observation file is not valid JSON: " + path);
  return from_json(doc);
}

nlohmann::json Observation::to_json() const {
  nlohmann::json states = nlohmann::json::object();
  for (const auto& [name, state] : this->states) {
    states[name] = observed_token(state);
  }
  return nlohmann::json{{"context", context_token(context)}, {"states", std::move(states)}};
}

nlohmann::json ClassificationResult::to_json() const {
  nlohmann::json ranked_json = nlohmann::json::array();
  for (const auto& entry : ranked) {
    ranked_json.push_back({{"target", entry.target}, {"mismatches", entry.mismatch_count}});
  }
  return nlohmann::json{{"exact", exact}, {"ranked", std::move(ranked_json)}};
}

ClassificationResult classify(const Observation& observation, const PermissionMatrix& matrix) {
  ClassificationResult result;
  for (const auto& target : matrix.targets()) {
    int mismatches = 0;
    for (const auto& [descriptor, observed] : observation.states) {
      if (observe_cell(matrix, descriptor, target.id, observation.context) != observed) {
        ++mismatches;
      }
    }
    result.ranked.push_back({target.id, mismatches});
  }
  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const TargetMismatch& a, const TargetMismatch& b) {
              return std::tie(a.mismatch_count, a.target) < std::tie(b.mismatch_count, b.target);
            });
  for (const auto& entry : result.ranked) {
    if (entry.mismatch_count == 0) result.exact.push_back(entry.target);
  }
  return result;
}

namespace {

// Targets carrying the same probe signature so far.
using Partition = std::vector<std::vector<std::string>>;

Partition split_by(const Partition& groups, const std::string& descriptor,
                   const PermissionMatrix& matrix) {
  Partition next;
  for (const auto& group : groups) {
    std::map<ObservedState, std::vector<std::string>> buckets;
    for (const auto& target : group) {
      buckets[observe_cell(matrix, descriptor, target, QueryContext::kInstalledPwa)].push_back(
          target);
    }
    for (auto& [state, members] : buckets) {
      next.push_back(std::move(members));
    }
  }
  return next;
}

}  // namespace

std::vector<std::string> plan_probes(const std::vector<std::string>& targets,
                                     const PermissionMatrix& matrix, int max_probes) {
  std::set<std::string> unique;
  for (const auto& id : targets) {
    matrix.target_at(id);
    unique.insert(id);
  }
  if (unique.empty()) throw ParseError("plan_probes needs at least one target");

  Partition groups{std::vector<std::string>(unique.begin(), unique.end())};

  // Lexicographic candidate order makes "first strictly better" the
  // documented tie-break.
  std::vector<std::string> candidates = matrix.descriptor_names();
  std::sort(candidates.begin(), candidates.end());

  std::vector<std::string> chosen;
  while (static_cast<int>(chosen.size()) < max_probes && groups.size() < unique.size()) {
    const std::string* best = nullptr;
    Partition best_partition;
    std::size_t best_count = groups.size();
    for (const auto& descriptor : candidates) {
      if (std::find(chosen.begin(), chosen.end(), descriptor) != chosen.end()) continue;
      Partition refined = split_by(groups, descriptor, matrix);
      if (refined.size() > best_count) {
        best = &descriptor;
        best_count = refined.size();
        best_partition = std::move(refined);
      }
    }
    if (!best) break;  // nothing refines further; best effort
    chosen.push_back(*best);
    groups = std::move(best_partition);
  }
  return chosen;
}

bool probes_separate(const std::vector<std::string>& probes,
                     const std::vector<std::string>& targets, const PermissionMatrix& matrix) {
  std::set<std::string> unique(targets.begin(), targets.end());
  std::set<std::vector<ObservedState>> signatures;
  for (const auto& target : unique) {
    std::vector<ObservedState> signature;
    signature.reserve(probes.size());
    for (const auto& descriptor : probes) {
      signature.push_back(observe_cell(matrix, descriptor, target, QueryContext::kInstalledPwa));
    }
    if (!signatures.insert(std::move(signature)).second) return false;
  }
  return true;
}

}  // namespace permlab
