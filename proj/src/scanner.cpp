#include "permlab/scanner.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "permlab/errors.hpp"
#include "permlab/url.hpp"

namespace permlab {
namespace {

namespace fs = std::filesystem;

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Case-insensitive (ASCII) substring search.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    std::size_t j = 0;
    while (j < needle.size() &&
           std::tolower(static_cast<unsigned char>(haystack[i + j])) ==
               std::tolower(static_cast<unsigned char>(needle[j]))) {
      ++j;
    }
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// Value of `name="..."` (or '...' or bare) inside a tag's attribute text.
std::optional<std::string> find_attr(std::string_view tag, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = ifind(tag, name, pos)) != std::string_view::npos) {
    bool starts_clean = pos == 0 || is_space(tag[pos - 1]);
    std::size_t after = pos + name.size();
    if (!starts_clean) {
      pos = after;
      continue;
    }
    std::size_t eq = after;
    while (eq < tag.size() && is_space(tag[eq])) ++eq;
    if (eq >= tag.size() || tag[eq] != '=') {
      pos = after;
      continue;
    }
    ++eq;
    while (eq < tag.size() && is_space(tag[eq])) ++eq;
    if (eq >= tag.size()) return std::string{};
    if (tag[eq] == '"' || tag[eq] == '\'') {
      char quote = tag[eq];
      std::size_t end = tag.find(quote, eq + 1);
      if (end == std::string_view::npos) return std::string(tag.substr(eq + 1));
      return std::string(tag.substr(eq + 1, end - eq - 1));
    }
    std::size_t end = eq;
    while (end < tag.size() && !is_space(tag[end]) && tag[end] != '>') ++end;
    return std::string(tag.substr(eq, end - eq));
  }
  return std::nullopt;
}

std::string resolve_against(const std::string& document_url, const std::string& reference) {
  if (auto base = Url::parse(document_url)) {
    Url resolved = base->resolve(reference);
    if (!resolved.host.empty() && resolved.is_http_family()) return resolved.str();
  }
  return reference;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Argument text of the call starting right after `open_paren_end` (the
// position just past the '('), up to the balanced close paren. Purely
// textual: parens inside strings count, which is fine for keyword sniffing.
std::string call_argument_text(const std::string& body, std::size_t open_paren_end) {
  constexpr std::size_t kArgScanCap = 2000;
  int depth = 1;
  std::size_t end = open_paren_end;
  std::size_t limit = std::min(body.size(), open_paren_end + kArgScanCap);
  while (end < limit && depth > 0) {
    if (body[end] == '(') ++depth;
    if (body[end] == ')') --depth;
    ++end;
  }
  std::size_t len = (depth == 0 ? end - 1 : end) - open_paren_end;
  return body.substr(open_paren_end, len);
}

void position_to_line_column(const std::string& body, std::size_t pos, std::size_t& line,
                             std::size_t& column) {
  line = 1;
  std::size_t last_newline = std::string::npos;
  for (std::size_t i = 0; i < pos && i < body.size(); ++i) {
    if (body[i] == '\n') {
      ++line;
      last_newline = i;
    }
  }
  column = last_newline == std::string::npos ? pos + 1 : pos - last_newline;
}

const std::regex& service_worker_pattern() {
  static const std::regex pattern(R"(serviceWorker\s*\.\s*register)");
  return pattern;
}

}  // namespace

std::string ScriptSource::str() const {
  if (kind == Kind::kInline) return "inline@" + std::to_string(inline_offset);
  return url;
}

std::vector<Script> extract_scripts(const std::string& html, const std::string& document_url,
                                    int max_scripts) {
  std::vector<Script> scripts;
  std::size_t pos = 0;
  while (scripts.size() < static_cast<std::size_t>(max_scripts)) {
    pos = ifind(html, "<script", pos);
    if (pos == std::string::npos) break;
    std::size_t after_name = pos + 7;
    if (after_name < html.size() && !is_space(html[after_name]) && html[after_name] != '>' &&
        html[after_name] != '/') {
      pos = after_name;  // "<scripting...", not a script tag
      continue;
    }
    std::size_t tag_end = html.find('>', pos);
    if (tag_end == std::string::npos) break;
    std::string_view attrs(html.data() + after_name, tag_end - after_name);

    if (auto src = find_attr(attrs, "src"); src && !src->empty()) {
      Script script;
      script.source.kind = ScriptSource::Kind::kExternal;
      script.source.url = resolve_against(document_url, *src);
      scripts.push_back(std::move(script));
      pos = tag_end + 1;
      continue;
    }

    std::size_t body_start = tag_end + 1;
    std::size_t close = ifind(html, "</script", body_start);
    std::size_t body_end = close == std::string::npos ? html.size() : close;
    Script script;
    script.source.kind = ScriptSource::Kind::kInline;
    script.source.inline_offset = body_start;
    script.body = html.substr(body_start, body_end - body_start);
    scripts.push_back(std::move(script));
    pos = body_end;
  }
  return scripts;
}

std::optional<std::string> find_manifest_link(const std::string& html,
                                              const std::string& document_url) {
  std::size_t pos = 0;
  while ((pos = ifind(html, "<link", pos)) != std::string::npos) {
    std::size_t after_name = pos + 5;
    if (after_name < html.size() && !is_space(html[after_name]) && html[after_name] != '>') {
      pos = after_name;
      continue;
    }
    std::size_t tag_end = html.find('>', pos);
    if (tag_end == std::string::npos) break;
    std::string_view attrs(html.data() + after_name, tag_end - after_name);

    if (auto rel = find_attr(attrs, "rel")) {
      // rel is a whitespace-separated token list.
      std::istringstream tokens(lowercase(*rel));
      std::string token;
      bool is_manifest = false;
      while (tokens >> token) {
        if (token == "manifest") is_manifest = true;
      }
      if (is_manifest) {
        if (auto href = find_attr(attrs, "href"); href && !href->empty()) {
          return resolve_against(document_url, *href);
        }
      }
    }
    pos = tag_end + 1;
  }
  return std::nullopt;
}

bool detect_sw(const SiteSnapshot& snapshot) {
  for (const auto& script : snapshot.scripts) {
    if (std::regex_search(script.body, service_worker_pattern())) return true;
  }
  return false;
}

PwaCheck check_installable(const SiteSnapshot& snapshot) {
  PwaCheck check;
  auto doc = Url::parse(snapshot.document_url);
  check.https = doc.has_value() && doc->is_https();
  check.has_manifest = snapshot.manifest.has_value();
  if (snapshot.manifest) {
    const AppManifest& manifest = *snapshot.manifest;
    check.has_name = manifest.name && !manifest.name->empty();
    check.has_display = manifest.display && !manifest.display->empty();
    if (manifest.start_url && !manifest.start_url->empty()) {
      std::optional<Url> base;
      if (manifest.manifest_url) base = Url::parse(*manifest.manifest_url);
      if (!base && snapshot.manifest_url) base = Url::parse(*snapshot.manifest_url);
      if (!base) base = doc;
      if (base) {
        Url resolved = base->resolve(*manifest.start_url);
        if (!resolved.host.empty() && resolved.is_http_family()) {
          check.start_url_resolved = resolved.without_fragment().str();
        }
      }
    }
    if (doc) {
      try {
        check.app_id = derive_app_id(manifest, *doc);
      } catch (const AppIdError&) {
        // identity stays unset; not an error for a scan
      }
    } else if (manifest.id && !manifest.id->empty()) {
      check.app_id = manifest.id;
    }
  }
  check.sw_detected = detect_sw(snapshot);
  check.installable = check.https && check.has_manifest && check.has_name && check.has_display;
  return check;
}

std::vector<UsageFinding> find_permission_usages(const SiteSnapshot& snapshot,
                                                 const Registry& registry,
                                                 const PatternTable& patterns) {
  std::vector<UsageFinding> findings;
  constexpr std::size_t kExcerptCap = 160;

  for (const auto& script : snapshot.scripts) {
    // (position, insertion order) keeps output deterministic and in source
    // order within each script.
    std::vector<std::pair<std::size_t, UsageFinding>> local;
    for (const auto& pattern : patterns.patterns()) {
      auto begin = std::sregex_iterator(script.body.begin(), script.body.end(), pattern.compiled);
      for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& match = *it;
        std::size_t pos = static_cast<std::size_t>(match.position(0));

        UsageFinding base;
        base.pattern_id = pattern.id;
        base.source = script.source;
        base.excerpt = match.str(0).substr(0, kExcerptCap);
        position_to_line_column(script.body, pos, base.line, base.column);

        switch (pattern.attribution) {
          case UsagePattern::Attribution::kFixed:
            for (const auto& name : pattern.descriptors) {
              UsageFinding finding = base;
              finding.descriptor = registry.at(name).name;
              local.emplace_back(pos, std::move(finding));
            }
            break;
          case UsagePattern::Attribution::kMediaConstraints: {
            // descriptors[0] is the video-keyed capability, descriptors[1]
            // the audio-keyed one; no keyword at all means undecidable, so
            // both are reported.
            std::string args =
                call_argument_text(script.body, pos + static_cast<std::size_t>(match.length(0)));
            bool video = args.find("video") != std::string::npos;
            bool audio = args.find("audio") != std::string::npos;
            if (!video && !audio) video = audio = true;
            if (video) {
              UsageFinding finding = base;
              finding.descriptor = registry.at(pattern.descriptors[0]).name;
              local.emplace_back(pos, std::move(finding));
            }
            if (audio) {
              UsageFinding finding = base;
              finding.descriptor = registry.at(pattern.descriptors[1]).name;
              local.emplace_back(pos, std::move(finding));
            }
            break;
          }
          case UsagePattern::Attribution::kQueryName: {
            std::string name = match.str(1);
            UsageFinding finding = base;
            if (const PermissionDescriptor* d = registry.find(name)) {
              finding.descriptor = d->name;
            } else {
              finding.descriptor.reset();
              finding.pattern_id = std::string(kUnknownQueryPatternId);
            }
            local.emplace_back(pos, std::move(finding));
            break;
          }
        }
      }
    }
    std::stable_sort(local.begin(), local.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [pos, finding] : local) {
      findings.push_back(std::move(finding));
    }
  }
  return findings;
}

std::vector<OriginReport> group_origin(const std::vector<SiteSnapshot>& snapshots,
                                       const Registry& registry, const PatternTable& patterns) {
  std::map<std::string, OriginReport> by_origin;
  for (const auto& snapshot : snapshots) {
    std::string origin =
        origin_of(snapshot.document_url).value_or(lowercase(snapshot.document_url));
    OriginReport& report = by_origin[origin];
    report.origin = origin;

    AppReport app;
    app.document_url = snapshot.document_url;
    app.check = check_installable(snapshot);
    app.usages = find_permission_usages(snapshot, registry, patterns);
    app.fetch_failure = snapshot.failure;
    report.apps.push_back(std::move(app));
  }

  std::vector<OriginReport> reports;
  reports.reserve(by_origin.size());
  for (auto& [origin, report] : by_origin) {
    std::set<std::string> installable_ids;
    for (const auto& app : report.apps) {
      if (app.check.installable && app.check.app_id) installable_ids.insert(*app.check.app_id);
    }
    report.multi_pwa = installable_ids.size() >= 2;

    std::map<std::string, std::set<std::string>> descriptor_apps;
    for (const auto& app : report.apps) {
      if (!app.check.app_id) continue;
      for (const auto& finding : app.usages) {
        if (finding.descriptor) descriptor_apps[*finding.descriptor].insert(*app.check.app_id);
      }
    }
    for (const auto& [descriptor, ids] : descriptor_apps) {
      if (ids.size() >= 2) report.shared_risk_descriptors.push_back(descriptor);
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

AggregateStats aggregate(const std::vector<OriginReport>& reports, const Registry& registry) {
  AggregateStats stats;
  std::map<std::string, int> app_counts;
  for (const auto& report : reports) {
    for (const auto& app : report.apps) {
      std::set<std::string> seen;
      for (const auto& finding : app.usages) {
        if (finding.descriptor) seen.insert(*finding.descriptor);
      }
      for (const auto& descriptor : seen) {
        app_counts[descriptor] += 1;
      }
    }
    if (report.multi_pwa) stats.multi_pwa_origins += 1;
    for (const auto& descriptor : report.shared_risk_descriptors) {
      stats.shared_risk_origins[descriptor] += 1;
    }
  }
  for (const auto& [descriptor, count] : app_counts) {
    const PermissionDescriptor& d = registry.at(descriptor);
    stats.usage_ranking.push_back({descriptor, count, d.invocable, d.prompted});
  }
  std::sort(stats.usage_ranking.begin(), stats.usage_ranking.end(),
            [](const DescriptorUsageCount& a, const DescriptorUsageCount& b) {
              if (a.app_count != b.app_count) return a.app_count > b.app_count;
              return a.descriptor < b.descriptor;
            });
  return stats;
}

SiteSnapshot load_fixture(const std::string& fixture_dir) {
  fs::path dir(fixture_dir);
  nlohmann::json site =
      nlohmann::json::parse(read_text_file(dir / "site.json"), nullptr, false);
  if (site.is_discarded() || !site.is_object()) {
    throw ParseError("fixture site.json is not a JSON object: " + fixture_dir);
  }
  if (!site.contains("document_url") || !site.at("document_url").is_string()) {
    throw ParseError("fixture site.json needs a string 'document_url': " + fixture_dir);
  }

  SiteSnapshot snapshot;
  snapshot.document_url = site.at("document_url").get<std::string>();

  struct FixtureFile {
    std::string role;
    std::string path;
    std::string url;
  };
  std::vector<FixtureFile> files;
  if (auto it = site.find("files"); it != site.end()) {
    if (!it->is_array()) throw ParseError("fixture 'files' must be an array: " + fixture_dir);
    for (const auto& item : *it) {
      FixtureFile file;
      if (!item.is_object() || !item.contains("role") || !item.contains("path")) {
        throw ParseError("fixture file entries need 'role' and 'path': " + fixture_dir);
      }
      file.role = item.at("role").get<std::string>();
      file.path = item.at("path").get<std::string>();
      if (item.contains("url") && item.at("url").is_string()) {
        file.url = item.at("url").get<std::string>();
      }
      if (file.role != "document" && file.role != "manifest" && file.role != "script") {
        throw ParseError("fixture file role must be document, manifest or script, got '" +
                         file.role + "': " + fixture_dir);
      }
      files.push_back(std::move(file));
    }
  }

  const FixtureFile* document_file = nullptr;
  const FixtureFile* manifest_file = nullptr;
  for (const auto& file : files) {
    if (file.role == "document") {
      if (document_file) throw ParseError("fixture has more than one document: " + fixture_dir);
      document_file = &file;
    } else if (file.role == "manifest") {
      if (manifest_file) throw ParseError("fixture has more than one manifest: " + fixture_dir);
      manifest_file = &file;
    }
  }
  if (!document_file) throw ParseError("fixture has no document file: " + fixture_dir);

  snapshot.html = read_text_file(dir / document_file->path);
  snapshot.fetch_log.push_back(
      {snapshot.document_url, 200, snapshot.html.size(), 0.0, std::nullopt});

  snapshot.scripts = extract_scripts(snapshot.html, snapshot.document_url);

  std::optional<std::string> link = find_manifest_link(snapshot.html, snapshot.document_url);
  if (manifest_file) {
    std::string manifest_url = !manifest_file->url.empty()
                                   ? manifest_file->url
                                   : link.value_or(resolve_against(snapshot.document_url,
                                                                   "manifest.json"));
    snapshot.manifest_url = manifest_url;
    std::string body = read_text_file(dir / manifest_file->path);
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      snapshot.fetch_log.push_back(
          {manifest_url, 200, body.size(), 0.0, std::string("manifest-parse")});
    } else {
      snapshot.manifest = AppManifest::from_json(doc, manifest_url);
      snapshot.fetch_log.push_back({manifest_url, 200, body.size(), 0.0, std::nullopt});
    }
  } else if (link) {
    // The document links a manifest the fixture does not provide; record the
    // miss the same way a live fetch would record an unreachable resource.
    snapshot.manifest_url = link;
    snapshot.fetch_log.push_back({*link, 0, 0, 0.0, std::string("not-in-fixture")});
  }

  std::map<std::string, const FixtureFile*> scripts_by_url;
  for (const auto& file : files) {
    if (file.role == "script" && !file.url.empty()) scripts_by_url[file.url] = &file;
  }
  for (auto& script : snapshot.scripts) {
    if (script.source.kind != ScriptSource::Kind::kExternal) continue;
    auto it = scripts_by_url.find(script.source.url);
    if (it == scripts_by_url.end()) {
      snapshot.fetch_log.push_back(
          {script.source.url, 0, 0, 0.0, std::string("not-in-fixture")});
      continue;
    }
    script.body = read_text_file(dir / it->second->path);
    snapshot.fetch_log.push_back({script.source.url, 200, script.body.size(), 0.0, std::nullopt});
  }
  return snapshot;
}

nlohmann::json report_to_json(const std::vector<OriginReport>& reports,
                              const AggregateStats& stats) {
  nlohmann::json origin_reports = nlohmann::json::array();
  for (const auto& report : reports) {
    nlohmann::json apps = nlohmann::json::array();
    for (const auto& app : report.apps) {
      nlohmann::json check = {
          {"https", app.check.https},
          {"has_manifest", app.check.has_manifest},
          {"has_name", app.check.has_name},
          {"has_display", app.check.has_display},
          {"sw_detected", app.check.sw_detected},
          {"installable", app.check.installable},
      };
      if (app.check.start_url_resolved) check["start_url_resolved"] = *app.check.start_url_resolved;
      if (app.check.app_id) check["app_id"] = *app.check.app_id;

      nlohmann::json usages = nlohmann::json::array();
      for (const auto& finding : app.usages) {
        nlohmann::json source;
        if (finding.source.kind == ScriptSource::Kind::kInline) {
          source = {{"kind", "inline"}, {"offset", finding.source.inline_offset}};
        } else {
          source = {{"kind", "external"}, {"url", finding.source.url}};
        }
        nlohmann::json usage = {
            {"pattern_id", finding.pattern_id}, {"source", std::move(source)},
            {"line", finding.line},             {"column", finding.column},
            {"excerpt", finding.excerpt},
        };
        if (finding.descriptor) usage["descriptor"] = *finding.descriptor;
        usages.push_back(std::move(usage));
      }

      nlohmann::json app_json = {
          {"document_url", app.document_url},
          {"check", std::move(check)},
          {"usages", std::move(usages)},
      };
      if (app.fetch_failure) app_json["fetch_failure"] = *app.fetch_failure;
      apps.push_back(std::move(app_json));
    }
    origin_reports.push_back({
        {"origin", report.origin},
        {"multi_pwa", report.multi_pwa},
        {"shared_risk_descriptors", report.shared_risk_descriptors},
        {"apps", std::move(apps)},
    });
  }

  nlohmann::json ranking = nlohmann::json::array();
  for (const auto& entry : stats.usage_ranking) {
    ranking.push_back({
        {"descriptor", entry.descriptor},
        {"app_count", entry.app_count},
        {"invocable", entry.invocable},
        {"prompted", prompted_token(entry.prompted)},
    });
  }
  nlohmann::json aggregate_json = {
      {"usage_ranking", std::move(ranking)},
      {"multi_pwa_origins", stats.multi_pwa_origins},
      {"shared_risk_origins", stats.shared_risk_origins},
  };
  return nlohmann::json{{"origin_reports", std::move(origin_reports)},
                        {"aggregate", std::move(aggregate_json)}};
}

}  // namespace permlab
