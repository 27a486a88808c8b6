#include "permlab/scenario.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "permlab/errors.hpp"

namespace permlab {
namespace {

// Case/separator tolerant token compare ("session-end" == "session_end").
std::string fold(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (c == '-' || c == '_') continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

ScenarioEvent::Kind event_kind_from_token(const std::string& token) {
  std::string t = fold(token);
  if (t == "request") return ScenarioEvent::Kind::kRequest;
  if (t == "query") return ScenarioEvent::Kind::kQuery;
  if (t == "sessionend") return ScenarioEvent::Kind::kSessionEnd;
  if (t == "closepwa") return ScenarioEvent::Kind::kClosePwa;
  throw ParseError("unknown event kind: '" + token + "'");
}

UserAction::Kind action_kind_from_token(const std::string& token) {
  std::string t = fold(token);
  if (t == "allow") return UserAction::Kind::kAllow;
  if (t == "deny") return UserAction::Kind::kDeny;
  if (t == "ignore") return UserAction::Kind::kIgnore;
  if (t == "nopromptneeded" || t == "noprompt") return UserAction::Kind::kNoPromptNeeded;
  throw ParseError("unknown action: '" + token + "'");
}

std::string_view event_kind_token(ScenarioEvent::Kind kind) {
  switch (kind) {
    case ScenarioEvent::Kind::kRequest:
      return "request";
    case ScenarioEvent::Kind::kQuery:
      return "query";
    case ScenarioEvent::Kind::kSessionEnd:
      return "session-end";
    case ScenarioEvent::Kind::kClosePwa:
      return "close-pwa";
  }
  return "query";
}

std::string_view action_token(UserAction::Kind kind) {
  switch (kind) {
    case UserAction::Kind::kAllow:
      return "allow";
    case UserAction::Kind::kDeny:
      return "deny";
    case UserAction::Kind::kIgnore:
      return "ignore";
    case UserAction::Kind::kNoPromptNeeded:
      return "no-prompt-needed";
  }
  return "no-prompt-needed";
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

StoreConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("scenario 'config' must be an object");
  StoreConfig config;

  std::string mode = fold(require_string(doc, "scoping_mode", "scenario config"));
  if (mode == "perorigin") {
    config.scoping_mode = ScopingMode::kPerOrigin;
  } else if (mode == "perapp") {
    config.scoping_mode = ScopingMode::kPerApp;
  } else {
    throw ParseError("scenario config: scoping_mode must be \"per-origin\" or \"per-app\"");
  }

  std::string policy = fold(require_string(doc, "policy", "scenario config"));
  if (policy == "persistent") {
    config.policy = Policy::persistent();
  } else if (policy == "adaptive") {
    config.policy = Policy::adaptive();
  } else if (policy == "ephemeral") {
    config.policy = Policy::ephemeral();
    if (auto it = doc.find("exceptions"); it != doc.end()) {
      if (!it->is_array()) throw ParseError("scenario config: 'exceptions' must be an array");
      config.policy.ephemeral_exceptions.clear();
      for (const auto& name : *it) {
        if (!name.is_string()) throw ParseError("scenario config: exceptions must be strings");
        config.policy.ephemeral_exceptions.insert(name.get<std::string>());
      }
    }
  } else {
    throw ParseError("scenario config: policy must be persistent, adaptive or ephemeral");
  }

  config.target = require_string(doc, "target", "scenario config");
  if (auto it = doc.find("context"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("scenario config: 'context' must be a string");
    config.context = context_from_token(it->get<std::string>());
  }
  if (auto it = doc.find("auto_deny_threshold"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1) {
      throw ParseError("scenario config: auto_deny_threshold must be a positive integer");
    }
    config.auto_deny_threshold = it->get<int>();
  }
  return config;
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("scenario document must be an object");
  Scenario scenario;
  if (auto it = doc.find("description"); it != doc.end() && it->is_string()) {
    scenario.description = it->get<std::string>();
  }
  if (!doc.contains("config")) throw ParseError("scenario document needs a 'config' object");
  scenario.config = config_from_json(doc.at("config"));

  auto actors = doc.find("actors");
  if (actors == doc.end() || !actors->is_array()) {
    throw ParseError("scenario document needs an 'actors' array");
  }
  std::set<std::string> labels;
  for (const auto& item : *actors) {
    if (!item.is_object()) throw ParseError("scenario actors must be objects");
    Actor actor;
    actor.label = require_string(item, "label", "scenario actor");
    if (!labels.insert(actor.label).second) {
      throw ParseError("duplicate actor label: '" + actor.label + "'");
    }
    actor.origin = require_string(item, "origin", "actor '" + actor.label + "'");
    if (auto it = item.find("document_url"); it != item.end()) {
      if (!it->is_string()) throw ParseError("actor '" + actor.label + "': document_url must be a string");
      actor.document_url = it->get<std::string>();
    }
    if (auto it = item.find("manifest"); it != item.end()) {
      std::optional<std::string> manifest_url;
      if (auto url = item.find("manifest_url"); url != item.end() && url->is_string()) {
        manifest_url = url->get<std::string>();
      }
      actor.manifest = AppManifest::from_json(*it, std::move(manifest_url));
    }
    scenario.actors.push_back(std::move(actor));
  }

  auto events = doc.find("events");
  if (events == doc.end() || !events->is_array()) {
    throw ParseError("scenario document needs an 'events' array");
  }
  std::size_t index = 0;
  for (const auto& item : *events) {
    const std::string where = "event " + std::to_string(index);
    if (!item.is_object()) throw ParseError(where + ": must be an object");
    ScenarioEvent event;
    event.actor = require_string(item, "actor", where);
    if (!labels.count(event.actor)) {
      throw ParseError(where + ": unknown actor '" + event.actor + "'");
    }
    event.kind = event_kind_from_token(require_string(item, "kind", where));

    bool needs_descriptor =
        event.kind == ScenarioEvent::Kind::kRequest || event.kind == ScenarioEvent::Kind::kQuery;
    if (needs_descriptor) {
      event.descriptor = require_string(item, "descriptor", where);
    }
    if (event.kind == ScenarioEvent::Kind::kRequest) {
      UserAction action;
      action.kind = action_kind_from_token(require_string(item, "action", where));
      if (auto it = item.find("remember"); it != item.end()) {
        if (!it->is_boolean()) throw ParseError(where + ": 'remember' must be a boolean");
        action.remember = it->get<bool>();
      }
      event.action = action;
    }
    if (auto it = item.find("expect"); it != item.end()) {
      if (!it->is_string()) throw ParseError(where + ": 'expect' must be a string");
      event.expect = outcome_from_token(it->get<std::string>());
    }
    scenario.events.push_back(std::move(event));
    ++index;
  }
  return scenario;
}

Scenario Scenario::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) throw ParseError("scenario file is not valid JSON: " + path);
  return from_json(doc);
}

bool ScenarioTrace::all_passed() const {
  for (const auto& entry : entries) {
    if (!entry.ok) return false;
  }
  return true;
}

nlohmann::json ScenarioTrace::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : entries) {
    nlohmann::json record = {
        {"index", entry.index}, {"actor", entry.actor},     {"event", entry.event},
        {"outcome", entry.outcome}, {"pass", entry.ok},
    };
    if (entry.expected) record["expected"] = *entry.expected;
    out.push_back(std::move(record));
  }
  return nlohmann::json{{"trace", std::move(out)}, {"all_passed", all_passed()}};
}

ScenarioTrace run_scenario(const Scenario& scenario, const Registry& registry,
                           const PermissionMatrix& matrix) {
  PermissionStore store(scenario.config, registry, matrix);

  std::map<std::string, const Actor*> actors;
  for (const auto& actor : scenario.actors) {
    actors[actor.label] = &actor;
    store.scope_for(actor);  // surfaces unresolvable actor identities up front
  }
  for (const auto& event : scenario.events) {
    if (event.descriptor) registry.at(*event.descriptor);
  }

  ScenarioTrace trace;
  std::size_t index = 0;
  for (const auto& event : scenario.events) {
    const Actor& actor = *actors.at(event.actor);
    TraceEntry entry;
    entry.index = index++;
    entry.actor = actor.label;

    switch (event.kind) {
      case ScenarioEvent::Kind::kQuery:
        entry.event = "query " + *event.descriptor;
        entry.outcome = outcome_token(store.query(actor, *event.descriptor));
        break;
      case ScenarioEvent::Kind::kRequest:
        entry.event = "request " + *event.descriptor + " [" +
                      std::string(action_token(event.action->kind)) + "]";
        try {
          entry.outcome = outcome_token(store.request(actor, *event.descriptor, *event.action));
        } catch (const ActionMismatchError&) {
          entry.outcome = "action-mismatch";
        }
        break;
      case ScenarioEvent::Kind::kSessionEnd:
      case ScenarioEvent::Kind::kClosePwa:
        entry.event = std::string(event_kind_token(event.kind));
        if (event.kind == ScenarioEvent::Kind::kSessionEnd) {
          store.session_end(actor);
        } else {
          store.close_pwa(actor);
        }
        entry.outcome = "ok";
        break;
    }
    if (event.expect) {
      entry.expected = std::string(outcome_token(*event.expect));
      entry.ok = entry.outcome == *entry.expected;
    }
    trace.entries.push_back(std::move(entry));
  }
  return trace;
}

}  // namespace permlab
