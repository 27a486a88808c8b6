#include "permlab/registry.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "permlab/embedded_data.hpp"
#include "permlab/errors.hpp"

namespace permlab {
namespace {

struct CategoryToken {
  Category category;
  std::string_view token;
};

constexpr CategoryToken kCategoryTokens[] = {
    {Category::kSensor, "Sensor"},
    {Category::kHardwareAccess, "HardwareAccess"},
    {Category::kClipboardDataAccess, "ClipboardDataAccess"},
    {Category::kNotificationsBackground, "NotificationsBackground"},
    {Category::kLocationEnvironment, "LocationEnvironment"},
    {Category::kWindowUi, "WindowUI"},
    {Category::kPaymentAuth, "PaymentAuth"},
    {Category::kDesktopRelated, "DesktopRelated"},
    {Category::kLegacy, "Legacy"},
};

// Case/separator-insensitive form for token comparison.
std::string fold_token(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

const nlohmann::json& require_field(const nlohmann::json& item, const char* key,
                                    const std::string& where) {
  auto it = item.find(key);
  if (it == item.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& item, const char* key, const std::string& where) {
  const auto& value = require_field(item, key, where);
  if (!value.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return value.get<std::string>();
}

bool require_bool(const nlohmann::json& item, const char* key, const std::string& where) {
  const auto& value = require_field(item, key, where);
  if (!value.is_boolean()) throw ParseError(where + ": field '" + key + "' must be a boolean");
  return value.get<bool>();
}

}  // namespace

std::string_view category_token(Category category) {
  for (const auto& entry : kCategoryTokens) {
    if (entry.category == category) return entry.token;
  }
  return "Legacy";
}

Category category_from_token(std::string_view token) {
  std::string needle = fold_token(token);
  for (const auto& entry : kCategoryTokens) {
    if (fold_token(entry.token) == needle) return entry.category;
  }
  throw ParseError("unknown category token: '" + std::string(token) + "'");
}

std::string_view prompted_token(Prompted prompted) {
  switch (prompted) {
    case Prompted::kYes:
      return "yes";
    case Prompted::kNo:
      return "no";
    case Prompted::kNotApplicable:
      return "na";
  }
  return "na";
}

Prompted prompted_from_token(std::string_view token) {
  if (token == "yes") return Prompted::kYes;
  if (token == "no") return Prompted::kNo;
  if (token == "na") return Prompted::kNotApplicable;
  throw ParseError("prompted must be \"yes\", \"no\" or \"na\", got '" + std::string(token) + "'");
}

Registry Registry::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("descriptors") || !doc.at("descriptors").is_array()) {
    throw ParseError("registry document needs a top-level 'descriptors' array");
  }

  Registry registry;
  for (const auto& item : doc.at("descriptors")) {
    if (!item.is_object()) throw ParseError("registry descriptor entries must be objects");
    PermissionDescriptor d;
    d.name = require_string(item, "name", "registry descriptor");
    const std::string where = "descriptor '" + d.name + "'";
    if (d.name.empty()) throw ParseError("registry descriptor with empty name");

    d.category = category_from_token(require_string(item, "category", where));
    d.mobile_enhancing = require_bool(item, "mobile_enhancing", where);
    d.web_api = require_string(item, "web_api", where);
    d.invocable = require_bool(item, "invocable", where);
    d.prompted = prompted_from_token(require_string(item, "prompted", where));
    d.sw_queryable = require_bool(item, "sw_queryable", where);

    const auto& count = require_field(item, "reference_count", where);
    if (!count.is_number_integer()) {
      throw ParseError(where + ": field 'reference_count' must be an integer");
    }
    d.reference_count = count.get<std::int64_t>();

    if (auto aliases = item.find("aliases"); aliases != item.end()) {
      if (!aliases->is_array()) throw ParseError(where + ": 'aliases' must be an array");
      for (const auto& alias : *aliases) {
        if (!alias.is_string() || alias.get<std::string>().empty()) {
          throw ParseError(where + ": aliases must be non-empty strings");
        }
        d.aliases.push_back(alias.get<std::string>());
      }
    }

    // Capability pairing rules: a prompt implies invocability, and a
    // descriptor page script cannot invoke has neither prompt data nor
    // usage counts.
    if (d.prompted == Prompted::kYes && !d.invocable) {
      throw ParseError(where + ": prompted=yes requires invocable=true");
    }
    if (!d.invocable && d.prompted != Prompted::kNotApplicable) {
      throw ParseError(where + ": non-invocable descriptors must have prompted=na");
    }
    if (d.invocable && d.prompted == Prompted::kNotApplicable) {
      throw ParseError(where + ": invocable descriptors must have prompted=yes or no");
    }
    if (!d.invocable && d.reference_count != 0) {
      throw ParseError(where + ": non-invocable descriptors must have reference_count 0");
    }
    if (d.reference_count < 0) throw ParseError(where + ": reference_count must be >= 0");

    std::size_t slot = registry.descriptors_.size();
    if (!registry.index_.emplace(d.name, slot).second) {
      throw ParseError("duplicate descriptor name: '" + d.name + "'");
    }
    for (const auto& alias : d.aliases) {
      if (!registry.index_.emplace(alias, slot).second) {
        throw ParseError("duplicate descriptor name: '" + alias + "'");
      }
    }
    registry.descriptors_.push_back(std::move(d));
  }
  return registry;
}

Registry Registry::from_text(std::string_view json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("registry document is not valid JSON");
  return from_json(doc);
}

Registry Registry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open registry file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

const Registry& Registry::embedded() {
  static const Registry instance = from_text(embedded::registry_json());
  return instance;
}

const PermissionDescriptor* Registry::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return nullptr;
  return &descriptors_[it->second];
}

const PermissionDescriptor& Registry::at(std::string_view name) const {
  const PermissionDescriptor* d = find(name);
  if (!d) throw UnknownNameError("unknown permission descriptor: '" + std::string(name) + "'");
  return *d;
}

std::vector<const PermissionDescriptor*> Registry::by_category(Category category) const {
  std::vector<const PermissionDescriptor*> out;
  for (const auto& d : descriptors_) {
    if (d.category == category) out.push_back(&d);
  }
  return out;
}

nlohmann::json Registry::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& d : descriptors_) {
    nlohmann::json item = {
        {"name", d.name},
        {"category", category_token(d.category)},
        {"mobile_enhancing", d.mobile_enhancing},
        {"web_api", d.web_api},
        {"invocable", d.invocable},
        {"prompted", prompted_token(d.prompted)},
        {"sw_queryable", d.sw_queryable},
        {"reference_count", d.reference_count},
    };
    if (!d.aliases.empty()) item["aliases"] = d.aliases;
    items.push_back(std::move(item));
  }
  return nlohmann::json{{"descriptors", std::move(items)}};
}

}  // namespace permlab
