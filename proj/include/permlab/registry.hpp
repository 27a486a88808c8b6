#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace permlab {

enum class Category {
  kSensor,
  kHardwareAccess,
  kClipboardDataAccess,
  kNotificationsBackground,
  kLocationEnvironment,
  kWindowUi,
  kPaymentAuth,
  kDesktopRelated,
  kLegacy,
};

// Whether invoking the capability can show a user prompt. kNotApplicable is
// reserved for descriptors that are registered but not invocable from page
// script.
enum class Prompted { kYes, kNo, kNotApplicable };

struct PermissionDescriptor {
  std::string name;
  Category category = Category::kLegacy;
  bool mobile_enhancing = false;
  std::string web_api;
  bool invocable = false;
  Prompted prompted = Prompted::kNotApplicable;
  bool sw_queryable = false;
  // Observed-in-the-wild usage count from a large crawl; reference metadata
  // only, never recomputed by this library.
  std::int64_t reference_count = 0;
  // Alternate names that resolve to this descriptor (e.g. a renamed
  // predecessor). Most descriptors have none.
  std::vector<std::string> aliases;
};

// Immutable catalog of permission descriptors. The shipped snapshot has
// exactly 33 entries; loading enforces per-descriptor invariants (unique
// names, known category tokens, prompted/invocable pairing) but not a fixed
// count, so user-supplied data can track future browsers.
class Registry {
 public:
  static Registry from_json(const nlohmann::json& doc);
  static Registry from_text(std::string_view json_text);
  static Registry load_file(const std::string& path);
  // The snapshot compiled into the library.
  static const Registry& embedded();

  const std::vector<PermissionDescriptor>& descriptors() const { return descriptors_; }

  // Alias-aware lookup; nullptr when unknown.
  const PermissionDescriptor* find(std::string_view name) const;
  // Alias-aware lookup; throws UnknownNameError when unknown.
  const PermissionDescriptor& at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  // All descriptors of one category, in registry order.
  std::vector<const PermissionDescriptor*> by_category(Category category) const;

  nlohmann::json to_json() const;

 private:
  std::vector<PermissionDescriptor> descriptors_;
  std::map<std::string, std::size_t, std::less<>> index_;  // canonical names and aliases
};

// Token mapping for data files and the CLI. category_from_token is tolerant
// of case and separators ("Sensor", "sensor", "window-ui" all resolve);
// serialization always emits the canonical token.
std::string_view category_token(Category category);
Category category_from_token(std::string_view token);  // throws ParseError

std::string_view prompted_token(Prompted prompted);
Prompted prompted_from_token(std::string_view token);  // throws ParseError

}  // namespace permlab
