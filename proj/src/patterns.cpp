#include "permlab/patterns.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "permlab/embedded_data.hpp"
#include "permlab/errors.hpp"

namespace permlab {
namespace {

UsagePattern::Attribution attribution_from_token(const std::string& token,
                                                 const std::string& where) {
  if (token == "fixed") return UsagePattern::Attribution::kFixed;
  if (token == "media-constraints") return UsagePattern::Attribution::kMediaConstraints;
  if (token == "query-name") return UsagePattern::Attribution::kQueryName;
  throw ParseError(where + ": unknown attribution '" + token + "'");
}

std::string_view attribution_token(UsagePattern::Attribution attribution) {
  switch (attribution) {
    case UsagePattern::Attribution::kFixed:
      return "fixed";
    case UsagePattern::Attribution::kMediaConstraints:
      return "media-constraints";
    case UsagePattern::Attribution::kQueryName:
      return "query-name";
  }
  return "fixed";
}

}  // namespace

PatternTable PatternTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("patterns") || !doc.at("patterns").is_array()) {
    throw ParseError("pattern table needs a top-level 'patterns' array");
  }
  PatternTable table;
  std::set<std::string> ids;
  for (const auto& item : doc.at("patterns")) {
    if (!item.is_object()) throw ParseError("pattern entries must be objects");
    UsagePattern pattern;
    if (!item.contains("id") || !item.at("id").is_string()) {
      throw ParseError("pattern entry missing string 'id'");
    }
    pattern.id = item.at("id").get<std::string>();
    const std::string where = "pattern '" + pattern.id + "'";
    if (pattern.id.empty()) throw ParseError("pattern with empty id");
    if (pattern.id == kUnknownQueryPatternId) {
      throw ParseError(where + ": this id is reserved for unknown query names");
    }
    if (!ids.insert(pattern.id).second) throw ParseError("duplicate pattern id: " + pattern.id);

    if (!item.contains("expression") || !item.at("expression").is_string()) {
      throw ParseError(where + ": missing string 'expression'");
    }
    pattern.expression = item.at("expression").get<std::string>();
    try {
      pattern.compiled = std::regex(pattern.expression, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ParseError(where + ": expression does not compile: " + e.what());
    }

    if (!item.contains("attribution") || !item.at("attribution").is_string()) {
      throw ParseError(where + ": missing string 'attribution'");
    }
    pattern.attribution = attribution_from_token(item.at("attribution").get<std::string>(), where);

    if (auto it = item.find("descriptors"); it != item.end()) {
      if (!it->is_array()) throw ParseError(where + ": 'descriptors' must be an array");
      for (const auto& name : *it) {
        if (!name.is_string() || name.get<std::string>().empty()) {
          throw ParseError(where + ": descriptors must be non-empty strings");
        }
        pattern.descriptors.push_back(name.get<std::string>());
      }
    }

    switch (pattern.attribution) {
      case UsagePattern::Attribution::kFixed:
        if (pattern.descriptors.empty()) {
          throw ParseError(where + ": fixed attribution needs at least one descriptor");
        }
        break;
      case UsagePattern::Attribution::kMediaConstraints:
        if (pattern.descriptors.size() != 2) {
          throw ParseError(where + ": media-constraints attribution needs exactly the camera and "
                                   "microphone descriptors");
        }
        break;
      case UsagePattern::Attribution::kQueryName:
        if (!pattern.descriptors.empty()) {
          throw ParseError(where + ": query-name attribution derives its descriptor; the list "
                                   "must be empty");
        }
        if (pattern.compiled.mark_count() < 1) {
          throw ParseError(where + ": query-name expression needs a capture group for the name");
        }
        break;
    }
    table.patterns_.push_back(std::move(pattern));
  }
  return table;
}

PatternTable PatternTable::from_text(std::string_view json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("pattern table is not valid JSON");
  return from_json(doc);
}

PatternTable PatternTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pattern table file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

const PatternTable& PatternTable::embedded() {
  static const PatternTable instance = from_text(embedded::patterns_json());
  return instance;
}

nlohmann::json PatternTable::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& pattern : patterns_) {
    items.push_back({
        {"id", pattern.id},
        {"expression", pattern.expression},
        {"attribution", attribution_token(pattern.attribution)},
        {"descriptors", pattern.descriptors},
    });
  }
  return nlohmann::json{{"patterns", std::move(items)}};
}

}  // namespace permlab
