#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "permlab/matrix.hpp"
#include "permlab/registry.hpp"
#include "permlab/url.hpp"

namespace permlab {

struct AppManifest {
  std::optional<std::string> id;
  std::optional<std::string> start_url;
  std::optional<std::string> name;
  std::optional<std::string> display;
  // Where the manifest was fetched from; the resolution base for a relative
  // start_url when known.
  std::optional<std::string> manifest_url;
  nlohmann::json raw;  // retained source document

  static AppManifest from_json(const nlohmann::json& doc,
                               std::optional<std::string> manifest_url = std::nullopt);
};

// The key permission decisions are stored under: a whole origin, or one
// app identity within it.
struct Scope {
  enum class Kind { kOrigin, kApp };
  Kind kind = Kind::kOrigin;
  std::string key;

  static Scope origin(std::string origin_str) { return {Kind::kOrigin, std::move(origin_str)}; }
  static Scope app(std::string app_id) { return {Kind::kApp, std::move(app_id)}; }

  auto operator<=>(const Scope&) const = default;
  std::string str() const;
};

enum class ScopingMode { kPerOrigin, kPerApp };

// Decision lifetime across session boundaries.
struct Policy {
  enum class Kind { kPersistent, kAdaptive, kEphemeral };
  Kind kind = Kind::kPersistent;
  // Ephemeral only: descriptors whose decisions survive session_end.
  std::set<std::string> ephemeral_exceptions;

  static Policy persistent() { return {Kind::kPersistent, {}}; }
  static Policy adaptive() { return {Kind::kAdaptive, {}}; }
  static Policy ephemeral(std::set<std::string> exceptions = {"geolocation"}) {
    return {Kind::kEphemeral, std::move(exceptions)};
  }
};

enum class GrantState { kDefault, kGranted, kDenied };

struct GrantRecord {
  GrantState state = GrantState::kDefault;
  bool remembered = false;
  // Unanswered prompts so far; reaching the store's auto_deny_threshold
  // flips state to kDenied.
  int ignore_count = 0;

  bool operator==(const GrantRecord&) const = default;
};

struct UserAction {
  enum class Kind { kAllow, kDeny, kIgnore, kNoPromptNeeded };
  Kind kind = Kind::kNoPromptNeeded;
  // Meaningful under the Adaptive policy only (the per-prompt "remember this
  // decision" choice); ignored otherwise.
  bool remember = false;

  static UserAction allow(bool remember = false) { return {Kind::kAllow, remember}; }
  static UserAction deny(bool remember = false) { return {Kind::kDeny, remember}; }
  static UserAction ignore() { return {Kind::kIgnore, false}; }
  static UserAction no_prompt_needed() { return {Kind::kNoPromptNeeded, false}; }
};

// One app/site interacting with the store.
struct Actor {
  std::string label;
  std::string origin;  // normalized by the store on use
  std::optional<AppManifest> manifest;
  // The page URL; fallback base for start_url resolution when the manifest
  // has no recorded URL. Defaults to origin + "/".
  std::optional<std::string> document_url;
};

enum class QueryOutcome { kGranted, kDenied, kPrompt, kUnsupported };

std::string_view outcome_token(QueryOutcome outcome);
QueryOutcome outcome_from_token(std::string_view token);  // throws ParseError

// App identity per the id-then-start_url preference: manifest.id verbatim if
// present, else start_url resolved absolute (fragment stripped, query kept)
// against the manifest's own URL, falling back to document_url. Throws
// AppIdError when neither field is present or resolution fails.
std::string derive_app_id(const AppManifest& manifest, const Url& document_url);

// PerApp mode grants an app its own scope only behind the https + manifest
// gate; everything else (and all of PerOrigin mode) stores by origin.
Scope resolve_scope(const std::string& origin, const AppManifest* manifest,
                    const Url& document_url, ScopingMode mode);

struct StoreConfig {
  ScopingMode scoping_mode = ScopingMode::kPerOrigin;
  Policy policy = Policy::persistent();
  std::string target;  // BrowserTarget id
  QueryContext context = QueryContext::kBrowserTab;
  int auto_deny_threshold = 3;
};

// Simulated browser permission store: defaults come from the matrix, user
// decisions are recorded per scope, session boundaries apply the policy.
// Single-owner mutable state; distinct stores are independent.
class PermissionStore {
 public:
  // registry and matrix must outlive the store. Throws UnknownNameError if
  // config.target is not a matrix target.
  PermissionStore(StoreConfig config, const Registry& registry, const PermissionMatrix& matrix);

  const StoreConfig& config() const { return config_; }

  // Total and side-effect free: unknown descriptors and unsupported cells
  // come back as kUnsupported, never as an exception or a crash.
  QueryOutcome query(const Actor& actor, std::string_view descriptor) const;

  // Simulates an invocation plus the user's reaction to any prompt. Throws
  // ActionMismatchError when the action does not fit (prompt-bearing action
  // without a prompt, or kNoPromptNeeded when one occurs); the store is
  // unchanged in that case.
  QueryOutcome request(const Actor& actor, std::string_view descriptor, UserAction action);

  // Applies the policy's session boundary for the actor's scope:
  // Persistent keeps everything, Adaptive drops records not remembered,
  // Ephemeral drops all but the exception descriptors.
  void session_end(const Actor& actor);
  // Closing the installed app is modeled as a session boundary.
  void close_pwa(const Actor& actor);

  Scope scope_for(const Actor& actor) const;

  // Introspection for audits and tests.
  const GrantRecord* record(const Scope& scope, std::string_view descriptor) const;
  const std::map<std::pair<Scope, std::string>, GrantRecord>& records() const { return records_; }

 private:
  GrantRecord& record_slot(const Scope& scope, std::string_view descriptor);

  StoreConfig config_;
  const Registry& registry_;
  const PermissionMatrix& matrix_;
  std::map<std::pair<Scope, std::string>, GrantRecord> records_;
};

struct LeakagePair {
  std::string first_label;
  std::string second_label;
  std::string origin;
  // Descriptors granted for the scope both apps share under the store's
  // actual mode that per-app scoping would have kept at Default.
  std::vector<std::string> descriptors;
};

struct LeakageReport {
  std::vector<LeakagePair> pairs;
  bool empty() const { return pairs.empty(); }
  nlohmann::json to_json() const;
};

// Silently-inherited grants: for every pair of apps on one origin with
// distinct derivable app ids, the descriptors whose grant the pair shares
// only because the store does not scope per app.
LeakageReport leakage_audit(const PermissionStore& store, const std::vector<Actor>& apps);

}  // namespace permlab
