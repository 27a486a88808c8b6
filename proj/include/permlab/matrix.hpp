#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "permlab/registry.hpp"

namespace permlab {

enum class Platform { kIos, kAndroid, kDesktop };

struct BrowserTarget {
  std::string id;
  Platform platform = Platform::kDesktop;
  std::string browser_label;
  bool pwa_install_supported = false;
};

// Default permission state a page observes when no stored decision exists.
// kGrantedWhenInstalled (raw code "g*") behaves as granted inside an
// installed-app window and as denied in a plain browser tab.
enum class DefaultState {
  kGranted,              // "g"
  kPrompted,             // "p"
  kDenied,               // "d"
  kUnsupported,          // "-"
  kGrantedWhenInstalled  // "g*"
};

// The surface a page runs on when it queries. Interface boundaries default
// to kBrowserTab, the surface with fewer silent grants.
enum class QueryContext { kInstalledPwa, kBrowserTab };

// Collapses kGrantedWhenInstalled per the context; other states pass through.
DefaultState resolve_state(DefaultState raw, QueryContext context);

std::string_view state_code(DefaultState state);
DefaultState state_from_code(std::string_view code);  // throws ParseError

std::string_view platform_token(Platform platform);
Platform platform_from_token(std::string_view token);  // throws ParseError

std::string_view context_token(QueryContext context);    // "installed" | "tab"
QueryContext context_from_token(std::string_view token);  // throws ParseError

struct CellDiff {
  std::string descriptor;
  DefaultState left;
  DefaultState right;
};

// The cross-browser default-state grid: a total map over
// (descriptor, target). Loading validates bidirectionally against the
// registry: every registry descriptor needs a cell for every target, and
// every cell key must resolve in the registry.
class PermissionMatrix {
 public:
  static PermissionMatrix from_json(const nlohmann::json& doc, const Registry& registry);
  static PermissionMatrix from_text(std::string_view json_text, const Registry& registry);
  static PermissionMatrix load_file(const std::string& path, const Registry& registry);
  // The snapshot compiled into the library, validated against
  // Registry::embedded().
  static const PermissionMatrix& embedded();

  const std::vector<BrowserTarget>& targets() const { return targets_; }
  const BrowserTarget* find_target(std::string_view id) const;
  const BrowserTarget& target_at(std::string_view id) const;  // throws UnknownNameError

  // Descriptor names in registry order.
  const std::vector<std::string>& descriptor_names() const { return descriptor_names_; }

  // The raw table cell, g* preserved. Throws UnknownNameError on either key.
  DefaultState raw_state(std::string_view descriptor, std::string_view target) const;

  // The cell as observed from `context`.
  DefaultState default_state(std::string_view descriptor, std::string_view target,
                             QueryContext context = QueryContext::kBrowserTab) const;

  // Descriptors whose raw cells differ between the two targets, sorted by
  // descriptor name. g* compares as its own value, unresolved.
  std::vector<CellDiff> diff_targets(std::string_view left, std::string_view right) const;

  std::size_t cell_count() const { return cells_.size(); }

  nlohmann::json to_json() const;

 private:
  std::vector<BrowserTarget> targets_;
  std::map<std::string, std::size_t, std::less<>> target_index_;
  std::vector<std::string> descriptor_names_;
  std::map<std::string, std::size_t, std::less<>> descriptor_index_;
  std::vector<DefaultState> cells_;  // descriptor-major, cells_[d * |targets| + t]
};

}  // namespace permlab
