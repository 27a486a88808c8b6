#pragma once

#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace permlab {

// One scan rule. Matching is textual over raw script bodies: no parsing, no
// execution, and matches inside comments or string literals count (the
// methodology accepts those false positives by design).
struct UsagePattern {
  // How a match turns into descriptor findings.
  enum class Attribution {
    kFixed,             // the listed descriptors, always
    kMediaConstraints,  // camera/microphone by video/audio keywords in the call args
    kQueryName,         // descriptor named inside a permissions query literal
  };

  std::string id;
  std::string expression;
  Attribution attribution = Attribution::kFixed;
  std::vector<std::string> descriptors;
  std::regex compiled;
};

class PatternTable {
 public:
  static PatternTable from_json(const nlohmann::json& doc);
  static PatternTable from_text(std::string_view json_text);
  static PatternTable load_file(const std::string& path);
  static const PatternTable& embedded();

  const std::vector<UsagePattern>& patterns() const { return patterns_; }
  nlohmann::json to_json() const;

 private:
  std::vector<UsagePattern> patterns_;
};

// Reported as the pattern_id of a permissions-query match whose name literal
// is not a registry descriptor; such findings carry no descriptor.
inline constexpr std::string_view kUnknownQueryPatternId = "permissions-query-unknown";

}  // namespace permlab
