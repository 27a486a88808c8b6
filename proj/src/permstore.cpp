#include "permlab/permstore.hpp"

#include <algorithm>

#include "permlab/errors.hpp"

namespace permlab {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string normalize_origin(const std::string& origin) {
  if (auto normalized = origin_of(origin)) return *normalized;
  // Not an absolute URL; keep a folded copy so equal spellings compare equal.
  std::string out = lowercase(origin);
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out;
}

Url actor_document_url(const Actor& actor) {
  if (actor.document_url) {
    if (auto url = Url::parse(*actor.document_url)) return *url;
    throw AppIdError("actor '" + actor.label + "': document_url is not an absolute URL: " +
                     *actor.document_url);
  }
  if (auto url = Url::parse(actor.origin + "/")) return *url;
  if (auto url = Url::parse(actor.origin)) return *url;
  throw AppIdError("actor '" + actor.label + "': origin is not an absolute URL: " + actor.origin);
}

}  // namespace

AppManifest AppManifest::from_json(const nlohmann::json& doc,
                                   std::optional<std::string> manifest_url) {
  if (!doc.is_object()) throw ParseError("manifest document must be a JSON object");
  AppManifest manifest;
  manifest.raw = doc;
  manifest.manifest_url = std::move(manifest_url);
  auto take_string = [&doc](const char* key) -> std::optional<std::string> {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  manifest.id = take_string("id");
  manifest.start_url = take_string("start_url");
  manifest.name = take_string("name");
  manifest.display = take_string("display");
  return manifest;
}

std::string Scope::str() const {
  return (kind == Kind::kOrigin ? "origin:" : "app:") + key;
}

std::string_view outcome_token(QueryOutcome outcome) {
  switch (outcome) {
    case QueryOutcome::kGranted:
      return "granted";
    case QueryOutcome::kDenied:
      return "denied";
    case QueryOutcome::kPrompt:
      return "prompt";
    case QueryOutcome::kUnsupported:
      return "unsupported";
  }
  return "unsupported";
}

QueryOutcome outcome_from_token(std::string_view token) {
  if (token == "granted") return QueryOutcome::kGranted;
  if (token == "denied") return QueryOutcome::kDenied;
  if (token == "prompt") return QueryOutcome::kPrompt;
  if (token == "unsupported") return QueryOutcome::kUnsupported;
  throw ParseError("unknown outcome token: '" + std::string(token) + "'");
}

std::string derive_app_id(const AppManifest& manifest, const Url& document_url) {
  if (manifest.id && !manifest.id->empty()) return *manifest.id;
  if (!manifest.start_url || manifest.start_url->empty()) {
    throw AppIdError("manifest has neither id nor start_url; no app identity derivable");
  }
  // Relative start_url resolves against the manifest's own URL when known,
  // matching how browsers compute the app's start URL.
  Url base = document_url;
  if (manifest.manifest_url) {
    auto parsed = Url::parse(*manifest.manifest_url);
    if (!parsed) {
      throw AppIdError("manifest URL is not an absolute URL: " + *manifest.manifest_url);
    }
    base = *parsed;
  }
  Url resolved = base.resolve(*manifest.start_url);
  if (resolved.host.empty() || !resolved.is_http_family()) {
    throw AppIdError("start_url does not resolve to an absolute http(s) URL: " +
                     *manifest.start_url);
  }
  return resolved.without_fragment().str();
}

Scope resolve_scope(const std::string& origin, const AppManifest* manifest,
                    const Url& document_url, ScopingMode mode) {
  std::string normalized = normalize_origin(origin);
  if (mode == ScopingMode::kPerApp && manifest != nullptr &&
      normalized.rfind("https://", 0) == 0) {
    return Scope::app(derive_app_id(*manifest, document_url));
  }
  return Scope::origin(std::move(normalized));
}

PermissionStore::PermissionStore(StoreConfig config, const Registry& registry,
                                 const PermissionMatrix& matrix)
    : config_(std::move(config)), registry_(registry), matrix_(matrix) {
  matrix_.target_at(config_.target);
  if (config_.auto_deny_threshold < 1) {
    throw ParseError("auto_deny_threshold must be a positive integer");
  }
  for (const auto& name : config_.policy.ephemeral_exceptions) {
    registry_.at(name);
  }
}

Scope PermissionStore::scope_for(const Actor& actor) const {
  return resolve_scope(actor.origin, actor.manifest ? &*actor.manifest : nullptr,
                       actor_document_url(actor), config_.scoping_mode);
}

const GrantRecord* PermissionStore::record(const Scope& scope, std::string_view descriptor) const {
  auto it = records_.find({scope, std::string(descriptor)});
  if (it == records_.end()) return nullptr;
  return &it->second;
}

GrantRecord& PermissionStore::record_slot(const Scope& scope, std::string_view descriptor) {
  return records_[{scope, std::string(descriptor)}];
}

QueryOutcome PermissionStore::query(const Actor& actor, std::string_view descriptor) const {
  const PermissionDescriptor* desc = registry_.find(descriptor);
  if (!desc) return QueryOutcome::kUnsupported;

  DefaultState fallback =
      resolve_state(matrix_.raw_state(desc->name, config_.target), config_.context);
  if (fallback == DefaultState::kUnsupported) return QueryOutcome::kUnsupported;

  if (const GrantRecord* rec = record(scope_for(actor), desc->name);
      rec && rec->state != GrantState::kDefault) {
    return rec->state == GrantState::kGranted ? QueryOutcome::kGranted : QueryOutcome::kDenied;
  }
  switch (fallback) {
    case DefaultState::kGranted:
      return QueryOutcome::kGranted;
    case DefaultState::kDenied:
      return QueryOutcome::kDenied;
    default:
      return QueryOutcome::kPrompt;
  }
}

QueryOutcome PermissionStore::request(const Actor& actor, std::string_view descriptor,
                                      UserAction action) {
  const PermissionDescriptor* desc = registry_.find(descriptor);
  if (!desc) return QueryOutcome::kUnsupported;

  DefaultState fallback =
      resolve_state(matrix_.raw_state(desc->name, config_.target), config_.context);
  if (fallback == DefaultState::kUnsupported) return QueryOutcome::kUnsupported;

  Scope scope = scope_for(actor);
  const GrantRecord* existing = record(scope, desc->name);
  GrantState stored = existing ? existing->state : GrantState::kDefault;

  // A prompt is shown only when no decision is stored and the default is
  // the prompting state. Everything else resolves silently.
  bool prompt_occurs = stored == GrantState::kDefault && fallback == DefaultState::kPrompted;

  if (!prompt_occurs) {
    if (action.kind != UserAction::Kind::kNoPromptNeeded) {
      throw ActionMismatchError("request for '" + desc->name +
                                "' shows no prompt; action must be no-prompt-needed");
    }
    if (stored != GrantState::kDefault) {
      return stored == GrantState::kGranted ? QueryOutcome::kGranted : QueryOutcome::kDenied;
    }
    // Granted-by-default never creates a record; the matrix answers every
    // later query the same way.
    return fallback == DefaultState::kGranted ? QueryOutcome::kGranted : QueryOutcome::kDenied;
  }

  bool remember = config_.policy.kind == Policy::Kind::kPersistent ||
                  (config_.policy.kind == Policy::Kind::kAdaptive && action.remember);
  switch (action.kind) {
    case UserAction::Kind::kNoPromptNeeded:
      throw ActionMismatchError("request for '" + desc->name +
                                "' shows a prompt; no-prompt-needed does not fit");
    case UserAction::Kind::kAllow: {
      GrantRecord& slot = record_slot(scope, desc->name);
      slot.state = GrantState::kGranted;
      slot.remembered = remember;
      slot.ignore_count = 0;
      return QueryOutcome::kGranted;
    }
    case UserAction::Kind::kDeny: {
      GrantRecord& slot = record_slot(scope, desc->name);
      slot.state = GrantState::kDenied;
      slot.remembered = remember;
      slot.ignore_count = 0;
      return QueryOutcome::kDenied;
    }
    case UserAction::Kind::kIgnore: {
      GrantRecord& slot = record_slot(scope, desc->name);
      slot.ignore_count += 1;
      if (slot.ignore_count >= config_.auto_deny_threshold) {
        slot.state = GrantState::kDenied;
        // Only the persistent policy keeps an ignore-based denial across
        // sessions; adaptive and ephemeral stores prompt again next time.
        slot.remembered = config_.policy.kind == Policy::Kind::kPersistent;
        return QueryOutcome::kDenied;
      }
      return QueryOutcome::kPrompt;
    }
  }
  return QueryOutcome::kPrompt;  // unreachable
}

void PermissionStore::session_end(const Actor& actor) {
  Scope scope = scope_for(actor);
  switch (config_.policy.kind) {
    case Policy::Kind::kPersistent:
      return;
    case Policy::Kind::kAdaptive: {
      std::erase_if(records_, [&](const auto& entry) {
        return entry.first.first == scope && !entry.second.remembered;
      });
      return;
    }
    case Policy::Kind::kEphemeral: {
      std::erase_if(records_, [&](const auto& entry) {
        return entry.first.first == scope &&
               !config_.policy.ephemeral_exceptions.count(entry.first.second);
      });
      return;
    }
  }
}

void PermissionStore::close_pwa(const Actor& actor) {
  session_end(actor);
}

nlohmann::json LeakageReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& pair : pairs) {
    out.push_back({
        {"first", pair.first_label},
        {"second", pair.second_label},
        {"origin", pair.origin},
        {"descriptors", pair.descriptors},
    });
  }
  return nlohmann::json{{"pairs", std::move(out)}};
}

LeakageReport leakage_audit(const PermissionStore& store, const std::vector<Actor>& apps) {
  LeakageReport report;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    for (std::size_t j = i + 1; j < apps.size(); ++j) {
      const Actor& a = apps[i];
      const Actor& b = apps[j];
      std::string origin_a = normalize_origin(a.origin);
      if (origin_a != normalize_origin(b.origin)) continue;

      // The pair is auditable only when per-app scoping would actually give
      // the two apps distinct scopes (https gate passed, distinct ids).
      Scope per_app_a, per_app_b;
      try {
        per_app_a = resolve_scope(a.origin, a.manifest ? &*a.manifest : nullptr,
                                  actor_document_url(a), ScopingMode::kPerApp);
        per_app_b = resolve_scope(b.origin, b.manifest ? &*b.manifest : nullptr,
                                  actor_document_url(b), ScopingMode::kPerApp);
      } catch (const AppIdError&) {
        continue;
      }
      if (per_app_a.kind != Scope::Kind::kApp || per_app_b.kind != Scope::Kind::kApp ||
          per_app_a == per_app_b) {
        continue;
      }

      Scope actual_a = store.scope_for(a);
      if (actual_a != store.scope_for(b)) continue;  // nothing shared (per-app store)

      std::vector<std::string> granted;
      for (const auto& [key, rec] : store.records()) {
        if (key.first == actual_a && rec.state == GrantState::kGranted) {
          granted.push_back(key.second);
        }
      }
      if (granted.empty()) continue;
      std::sort(granted.begin(), granted.end());
      report.pairs.push_back({a.label, b.label, origin_a, std::move(granted)});
    }
  }
  return report;
}

}  // namespace permlab
