#include "permlab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = permlab::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json parse_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  REQUIRE_FALSE(doc.is_discarded());
  return doc;
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

// Writes content to a unique file under the system temp dir; removes it on
// destruction so test runs do not accumulate files.
class TempFile {
 public:
  TempFile(const std::string& stem, const std::string& content) {
    path_ = (fs::temp_directory_path() / ("permlab_cli_" + stem)).string();
    std::ofstream file(path_, std::ios::binary);
    REQUIRE(file.good());
    file << content;
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string fixture_dir(const std::string& name) {
  return std::string(PERMLAB_SOURCE_DATA_DIR) + "/fixtures/" + name;
}

std::string scenario_file(const std::string& name) {
  return std::string(PERMLAB_SOURCE_DATA_DIR) + "/scenarios/" + name;
}

}  // namespace

TEST_CASE("running without a subcommand prints help and succeeds") {
  CliResult result = run({});
  CHECK(result.code == 0);
  CHECK(result.out.find("Usage") != std::string::npos);
  CHECK(result.out.find("registry") != std::string::npos);
  CHECK(result.out.find("scan") != std::string::npos);
}

TEST_CASE("the help flag exits cleanly") {
  CliResult result = run({"--help"});
  CHECK(result.code == 0);
  CHECK(result.out.find("Usage") != std::string::npos);
}

TEST_CASE("an unknown subcommand is a usage error") {
  CliResult result = run({"frobnicate"});
  CHECK(result.code == 2);
  CHECK_FALSE(result.err.empty());
}

TEST_CASE("an invalid format value is a usage error") {
  CliResult result = run({"--format", "xml", "registry", "list"});
  CHECK(result.code == 2);
}

TEST_CASE("registry list prints one row per descriptor") {
  CliResult result = run({"registry", "list"});
  CHECK(result.code == 0);
  CHECK(count_lines(result.out) == 34);  // header plus 33 descriptors
  CHECK(result.out.find("geolocation") != std::string::npos);
}

TEST_CASE("registry list as JSON carries every descriptor") {
  CliResult result = run({"--format", "json", "registry", "list"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  REQUIRE(doc.at("descriptors").is_array());
  CHECK(doc.at("descriptors").size() == 33);
  bool saw_nfc = false;
  for (const auto& d : doc.at("descriptors")) {
    if (d.at("name") == "nfc") saw_nfc = true;
  }
  CHECK(saw_nfc);
}

TEST_CASE("registry list can filter by category") {
  CliResult result = run({"--format", "json", "registry", "list", "--category", "sensor"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  REQUIRE(doc.at("descriptors").size() == 4);
  for (const auto& d : doc.at("descriptors")) {
    CHECK(d.at("category") == "Sensor");
  }
}

TEST_CASE("registry show prints one descriptor in both formats") {
  CliResult table = run({"registry", "show", "nfc"});
  CHECK(table.code == 0);
  CHECK(table.out.find("Web NFC API") != std::string::npos);

  CliResult as_json = run({"--format", "json", "registry", "show", "nfc"});
  REQUIRE(as_json.code == 0);
  json doc = parse_json(as_json.out);
  CHECK(doc.at("name") == "nfc");
  CHECK(doc.at("category") == "HardwareAccess");
  CHECK(doc.at("prompted") == "yes");
}

TEST_CASE("registry show for an unknown name is a usage error") {
  CliResult result = run({"registry", "show", "hyperdrive"});
  CHECK(result.code == 2);
  CHECK(result.err.find("error:") != std::string::npos);
}

TEST_CASE("matrix show lists all states for one target") {
  CliResult result = run({"--format", "json", "matrix", "show", "--target", "ios-combined"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  CHECK(doc.at("target") == "ios-combined");
  CHECK(doc.at("platform") == "ios");
  REQUIRE(doc.at("states").size() == 33);
  CHECK(doc.at("states").at("camera") == "p");
}

TEST_CASE("matrix show for an unknown target is a usage error") {
  CHECK(run({"matrix", "show", "--target", "android-netscape"}).code == 2);
}

TEST_CASE("matrix diff reports the cells separating two targets") {
  CliResult result = run({"--format", "json", "matrix", "diff", "desktop-chrome", "desktop-edge"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  REQUIRE(doc.at("differences").size() == 1);
  CHECK(doc.at("differences")[0].at("descriptor") == "midi");
  CHECK(doc.at("differences")[0].at("left") == "g");
  CHECK(doc.at("differences")[0].at("right") == "p");

  CliResult table = run({"matrix", "diff", "desktop-chrome", "desktop-edge"});
  CHECK(table.code == 0);
  CHECK(table.out.find("midi") != std::string::npos);
}

TEST_CASE("fingerprint classify matches an observation file") {
  TempFile observation("observation.json",
                       R"({"context": "tab", "states": {"nfc": "denied"}})");
  CliResult result = run({"--format", "json", "fingerprint", "classify", "--observation",
                          observation.path()});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  REQUIRE(doc.at("exact").size() == 1);
  CHECK(doc.at("exact")[0] == "android-opera");
  CHECK(doc.at("ranked").size() == 9);
}

TEST_CASE("fingerprint plan expands platform groups") {
  CliResult result = run({"--format", "json", "fingerprint", "plan", "--targets", "android"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  CHECK(doc.at("targets").size() == 6);
  REQUIRE(doc.at("probes").size() == 2);
  CHECK(doc.at("probes")[0] == "periodic-background-sync");
  CHECK(doc.at("probes")[1] == "storage-access");
  CHECK(doc.at("verified") == true);
}

TEST_CASE("fingerprint plan separates an explicit target pair") {
  CliResult result = run({"--format", "json", "fingerprint", "plan", "--targets",
                          "desktop-chrome", "--targets", "desktop-edge"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  REQUIRE(doc.at("probes").size() == 1);
  CHECK(doc.at("probes")[0] == "midi");
  CHECK(doc.at("verified") == true);
}

TEST_CASE("fingerprint plan honors the probe budget") {
  CliResult result = run({"--format", "json", "fingerprint", "plan", "--targets", "all",
                          "--max", "1"});
  REQUIRE(result.code == 0);
  json doc = parse_json(result.out);
  CHECK(doc.at("probes").size() == 1);
  CHECK(doc.at("verified") == false);
}

TEST_CASE("simulate replays a bundled scenario") {
  CliResult result = run({"simulate", "--scenario", scenario_file("ignore_autodeny.json")});
  CHECK(result.code == 0);
  CHECK(result.out.find("all expectations passed") != std::string::npos);
}

TEST_CASE("simulate reports a failed expectation through the exit code") {
  json doc = {
      {"description", "failing"},
      {"config",
       {{"scoping_mode", "per-origin"},
        {"policy", "persistent"},
        {"target", "android-chrome"},
        {"context", "installed"}}},
      {"actors", json::array({json{{"label", "a"}, {"origin", "https://site.example"}}})},
      {"events", json::array({json{{"actor", "a"},
                                   {"kind", "request"},
                                   {"descriptor", "geolocation"},
                                   {"action", "allow"},
                                   {"expect", "denied"}}})},
  };
  TempFile scenario("failing_scenario.json", doc.dump());
  CliResult result = run({"simulate", "--scenario", scenario.path()});
  CHECK(result.code == 1);
  CHECK(result.out.find("FAIL") != std::string::npos);
}

TEST_CASE("simulate with a missing scenario file is a usage error") {
  CliResult result = run({"simulate", "--scenario", "/nonexistent/scenario.json"});
  CHECK(result.code == 2);
  CHECK(result.err.find("error:") != std::string::npos);
}

TEST_CASE("scan requires at least one input") {
  CliResult result = run({"scan"});
  CHECK(result.code == 2);
  CHECK(result.err.find("scan needs") != std::string::npos);
}

TEST_CASE("scan analyses fixture directories") {
  CliResult result = run({"scan", "--fixture-dir", fixture_dir("arcade-alpha"),
                          "--fixture-dir", fixture_dir("arcade-beta")});
  CHECK(result.code == 0);
  CHECK(result.out.find("origin https://arcade.example") != std::string::npos);
  CHECK(result.out.find("multi-pwa: yes") != std::string::npos);
  CHECK(result.out.find("shared risk: geolocation") != std::string::npos);
}

TEST_CASE("scan writes the same JSON report to stdout and the out file") {
  std::string out_path =
      (fs::temp_directory_path() / "permlab_cli_report.json").string();
  CliResult result = run({"--format", "json", "scan", "--fixture-dir",
                          fixture_dir("arcade-alpha"), "--out", out_path});
  REQUIRE(result.code == 0);

  json from_stdout = parse_json(result.out);
  std::ifstream file(out_path);
  REQUIRE(file.good());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  CHECK(parse_json(buffer.str()) == from_stdout);
  fs::remove(out_path);

  REQUIRE(from_stdout.at("origin_reports").size() == 1);
  CHECK(from_stdout.at("origin_reports")[0].at("origin") == "https://arcade.example");
  CHECK(from_stdout.at("aggregate").contains("usage_ranking"));
  CHECK(from_stdout.at("aggregate").contains("multi_pwa_origins"));
  CHECK(from_stdout.at("aggregate").contains("shared_risk_origins"));
}

TEST_CASE("scan with a missing fixture directory is a usage error") {
  CliResult result = run({"scan", "--fixture-dir", "/nonexistent/fixture"});
  CHECK(result.code == 2);
  CHECK(result.err.find("error:") != std::string::npos);
}

TEST_CASE("data files can come from a directory named in the environment") {
  unsetenv("PERMLAB_DATA_DIR");
  json doc = {{"descriptors",
               json::array({json{{"name", "custom-cap"},
                                 {"category", "Sensor"},
                                 {"mobile_enhancing", false},
                                 {"web_api", "Custom API"},
                                 {"invocable", true},
                                 {"prompted", "no"},
                                 {"sw_queryable", false},
                                 {"reference_count", 3}}})}};

  fs::path dir = fs::temp_directory_path() / "permlab_cli_data";
  fs::create_directories(dir);
  std::ofstream((dir / "registry.json").string()) << doc.dump();

  setenv("PERMLAB_DATA_DIR", dir.string().c_str(), 1);
  CliResult via_env = run({"--format", "json", "registry", "list"});
  unsetenv("PERMLAB_DATA_DIR");
  REQUIRE(via_env.code == 0);
  json listed = parse_json(via_env.out);
  REQUIRE(listed.at("descriptors").size() == 1);
  CHECK(listed.at("descriptors")[0].at("name") == "custom-cap");

  CliResult via_flag = run({"--format", "json", "--registry",
                            (dir / "registry.json").string(), "registry", "list"});
  REQUIRE(via_flag.code == 0);
  CHECK(parse_json(via_flag.out).at("descriptors").size() == 1);

  fs::remove_all(dir);
  CliResult embedded = run({"--format", "json", "registry", "list"});
  REQUIRE(embedded.code == 0);
  CHECK(parse_json(embedded.out).at("descriptors").size() == 33);
}
