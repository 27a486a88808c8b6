#include "permlab/patterns.hpp"

#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "permlab/errors.hpp"
#include "permlab/registry.hpp"
#include "permlab/scanner.hpp"

using permlab::ParseError;
using permlab::PatternTable;
using permlab::Registry;
using permlab::SiteSnapshot;
using permlab::UsageFinding;
using permlab::UsagePattern;
using nlohmann::json;

namespace {

SiteSnapshot snapshot_with_script(std::string body) {
  SiteSnapshot snapshot;
  snapshot.document_url = "https://site.example/";
  permlab::Script script;
  script.source.kind = permlab::ScriptSource::Kind::kInline;
  script.source.inline_offset = 0;
  script.body = std::move(body);
  snapshot.scripts.push_back(std::move(script));
  return snapshot;
}

std::vector<UsageFinding> scan(std::string body) {
  return permlab::find_permission_usages(snapshot_with_script(std::move(body)),
                                         Registry::embedded(), PatternTable::embedded());
}

std::vector<std::string> descriptors_of(const std::vector<UsageFinding>& findings) {
  std::vector<std::string> out;
  for (const auto& finding : findings) {
    out.push_back(finding.descriptor.value_or("<none>"));
  }
  return out;
}

json pattern_entry(const std::string& id) {
  return json{{"id", id},
              {"expression", "beamUp"},
              {"attribution", "fixed"},
              {"descriptors", json::array({"geolocation"})}};
}

json table_doc(std::initializer_list<json> entries) {
  json doc;
  doc["patterns"] = json::array();
  for (const auto& entry : entries) doc["patterns"].push_back(entry);
  return doc;
}

}  // namespace

TEST_CASE("the bundled pattern table holds 22 well-formed rules") {
  const PatternTable& table = PatternTable::embedded();
  CHECK(table.patterns().size() == 22);

  std::set<std::string> ids;
  int media_constraints = 0;
  int query_name = 0;
  for (const auto& pattern : table.patterns()) {
    CHECK(ids.insert(pattern.id).second);
    for (const auto& name : pattern.descriptors) {
      CHECK(Registry::embedded().contains(name));
    }
    if (pattern.attribution == UsagePattern::Attribution::kMediaConstraints) ++media_constraints;
    if (pattern.attribution == UsagePattern::Attribution::kQueryName) ++query_name;
  }
  CHECK(media_constraints == 1);
  CHECK(query_name == 1);
}

TEST_CASE("pattern table JSON serialization round-trips") {
  const PatternTable& table = PatternTable::embedded();
  PatternTable reparsed = PatternTable::from_json(table.to_json());
  CHECK(reparsed.patterns().size() == table.patterns().size());
  CHECK(reparsed.to_json() == table.to_json());
}

TEST_CASE("fixed patterns attribute their listed descriptor") {
  auto findings = scan("navigator.geolocation.getCurrentPosition(onOk);");
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].descriptor == "geolocation");
  CHECK(findings[0].pattern_id == "geo-direct");
  CHECK(findings[0].excerpt == "navigator.geolocation.getCurrentPosition");
}

TEST_CASE("camera and microphone attribution follows the constraint keywords") {
  CHECK(descriptors_of(scan("getUserMedia({video: true})")) ==
        std::vector<std::string>{"camera"});
  CHECK(descriptors_of(scan("getUserMedia({audio: true})")) ==
        std::vector<std::string>{"microphone"});
  CHECK(descriptors_of(scan("getUserMedia({audio: true, video: {width: 640}})")) ==
        std::vector<std::string>{"camera", "microphone"});
  // No keyword in the argument text is undecidable; both are reported.
  CHECK(descriptors_of(scan("getUserMedia(constraints)")) ==
        std::vector<std::string>{"camera", "microphone"});
  CHECK(descriptors_of(scan("getUserMedia()")) ==
        std::vector<std::string>{"camera", "microphone"});
}

TEST_CASE("constraint sniffing stays within the call parentheses") {
  // `video` appears after the call closes, so only `audio` counts.
  auto findings = scan("getUserMedia({audio: true}); attach(video);");
  CHECK(descriptors_of(findings) == std::vector<std::string>{"microphone"});
}

TEST_CASE("periodic sync registration does not collide with one-shot sync") {
  auto periodic = scan("registration.periodicSync.register('refresh', opts);");
  REQUIRE(periodic.size() == 1);
  CHECK(periodic[0].descriptor == "periodic-background-sync");
  CHECK(periodic[0].pattern_id == "periodic-sync-register");

  auto one_shot = scan("registration.sync.register('outbox');");
  REQUIRE(one_shot.size() == 1);
  CHECK(one_shot[0].descriptor == "background-sync");
}

TEST_CASE("persist matches the call but not the probe") {
  CHECK(descriptors_of(scan("navigator.storage.persist()")) ==
        std::vector<std::string>{"persistent-storage"});
  CHECK(scan("navigator.storage.persisted().then(show);").empty());
}

TEST_CASE("a permissions query names its descriptor") {
  auto findings = scan("navigator.permissions.query({ name: 'geolocation' })");
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].descriptor == "geolocation");
  CHECK(findings[0].pattern_id == "permissions-query");
}

TEST_CASE("a permissions query through an alias reports the canonical name") {
  auto findings = scan("navigator.permissions.query({name: \"window-placement\"})");
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].descriptor == "window-management");
  CHECK(findings[0].pattern_id == "permissions-query");
}

TEST_CASE("a permissions query for an unknown name is flagged without a descriptor") {
  auto findings = scan("navigator.permissions.query({ name: 'super-zap' })");
  REQUIRE(findings.size() == 1);
  CHECK_FALSE(findings[0].descriptor.has_value());
  CHECK(findings[0].pattern_id == permlab::kUnknownQueryPatternId);
}

TEST_CASE("matches inside comments and strings count by design") {
  auto commented = scan("// navigator.clipboard.readText() someday\n");
  REQUIRE(commented.size() == 1);
  CHECK(commented[0].descriptor == "clipboard-read");

  auto quoted = scan("const hint = 'call Notification.requestPermission first';");
  REQUIRE(quoted.size() == 1);
  CHECK(quoted[0].descriptor == "notifications");
}

TEST_CASE("findings carry one-based line and column positions") {
  auto findings = scan("const a = 1;\n  requestMIDIAccess();\n");
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].descriptor == "midi");
  CHECK(findings[0].line == 2);
  CHECK(findings[0].column == 3);
}

TEST_CASE("findings within a script come out in source order") {
  auto findings = scan("wakeLock.request('screen');\nnavigator.clipboard.writeText(x);\n"
                       "IdleDetector.requestPermission();\n");
  CHECK(descriptors_of(findings) ==
        std::vector<std::string>{"screen-wake-lock", "clipboard-write", "idle-detection"});
}

TEST_CASE("each script contributes findings in script order") {
  SiteSnapshot snapshot = snapshot_with_script("requestFullscreen();");
  permlab::Script second;
  second.source.kind = permlab::ScriptSource::Kind::kExternal;
  second.source.url = "https://site.example/app.js";
  second.body = "requestPointerLock();";
  snapshot.scripts.push_back(std::move(second));

  auto findings = permlab::find_permission_usages(snapshot, Registry::embedded(),
                                                  PatternTable::embedded());
  REQUIRE(findings.size() == 2);
  CHECK(findings[0].descriptor == "fullscreen");
  CHECK(findings[0].source.kind == permlab::ScriptSource::Kind::kInline);
  CHECK(findings[1].descriptor == "pointer-lock");
  CHECK(findings[1].source.url == "https://site.example/app.js");
}

TEST_CASE("a quiet script yields no findings") {
  CHECK(scan("console.log('hello');").empty());
  CHECK(scan("").empty());
}

TEST_CASE("pattern table loading rejects malformed rules") {
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({pattern_entry(""), })), ParseError);
  CHECK_THROWS_AS(
      PatternTable::from_json(table_doc({pattern_entry("dup"), pattern_entry("dup")})),
      ParseError);
  CHECK_THROWS_AS(PatternTable::from_json(
                      table_doc({pattern_entry(std::string(permlab::kUnknownQueryPatternId))})),
                  ParseError);

  json bad_regex = pattern_entry("bad");
  bad_regex["expression"] = "([unclosed";
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({bad_regex})), ParseError);

  json bad_attribution = pattern_entry("bad");
  bad_attribution["attribution"] = "fuzzy";
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({bad_attribution})), ParseError);

  json fixed_without_descriptors = pattern_entry("bad");
  fixed_without_descriptors["descriptors"] = json::array();
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({fixed_without_descriptors})), ParseError);

  json media_with_one = pattern_entry("bad");
  media_with_one["attribution"] = "media-constraints";
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({media_with_one})), ParseError);

  json query_with_descriptors = pattern_entry("bad");
  query_with_descriptors["attribution"] = "query-name";
  query_with_descriptors["expression"] = "name: '([a-z-]+)'";
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({query_with_descriptors})), ParseError);

  json query_without_capture = pattern_entry("bad");
  query_without_capture["attribution"] = "query-name";
  query_without_capture["descriptors"] = json::array();
  CHECK_THROWS_AS(PatternTable::from_json(table_doc({query_without_capture})), ParseError);

  CHECK_THROWS_AS(PatternTable::from_text("not json"), ParseError);
  CHECK_THROWS_AS(PatternTable::load_file("/nonexistent/patterns.json"), ParseError);
}
