#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "permlab/patterns.hpp"
#include "permlab/permstore.hpp"
#include "permlab/registry.hpp"

namespace permlab {

// Script extraction stops after this many scripts per site (inline and
// external combined).
inline constexpr int kMaxScriptsPerSite = 64;

struct ScriptSource {
  enum class Kind { kInline, kExternal };
  Kind kind = Kind::kInline;
  // kInline: byte offset of the script body within the document text.
  std::size_t inline_offset = 0;
  // kExternal: the resolved script URL.
  std::string url;

  std::string str() const;
};

struct Script {
  ScriptSource source;
  std::string body;
};

struct FetchLogEntry {
  std::string url;
  int status = 0;  // 0 when no response was received
  std::size_t bytes = 0;
  double duration_ms = 0.0;
  std::optional<std::string> error;
};

// Everything the scanner knows about one site, whether fetched live or
// loaded from a fixture directory. `failure` is set when the site as a whole
// could not be scanned (unreachable document, whole-site timeout); partial
// per-resource problems only appear in fetch_log.
struct SiteSnapshot {
  std::string document_url;  // final URL after redirects
  std::string html;
  std::vector<Script> scripts;
  std::optional<std::string> manifest_url;
  std::optional<AppManifest> manifest;
  std::vector<FetchLogEntry> fetch_log;
  std::optional<std::string> failure;
};

// Installability verdict plus the facts it rests on.
struct PwaCheck {
  bool https = false;
  bool has_manifest = false;
  bool has_name = false;
  bool has_display = false;
  bool sw_detected = false;
  bool installable = false;  // https && has_manifest && has_name && has_display
  std::optional<std::string> start_url_resolved;
  std::optional<std::string> app_id;
};

struct UsageFinding {
  // Absent only for permissions-query matches naming an unknown descriptor.
  std::optional<std::string> descriptor;
  std::string pattern_id;
  ScriptSource source;
  std::size_t line = 0;    // 1-based, within the script body
  std::size_t column = 0;  // 1-based
  std::string excerpt;     // matched text, verbatim
};

struct AppReport {
  std::string document_url;
  PwaCheck check;
  std::vector<UsageFinding> usages;
  std::optional<std::string> fetch_failure;
};

struct OriginReport {
  std::string origin;
  std::vector<AppReport> apps;
  // Two or more installable apps with distinct app ids on this origin.
  bool multi_pwa = false;
  // Descriptors with findings under at least two distinct app ids here.
  std::vector<std::string> shared_risk_descriptors;
};

struct DescriptorUsageCount {
  std::string descriptor;
  int app_count = 0;
  bool invocable = false;
  Prompted prompted = Prompted::kNotApplicable;
};

struct AggregateStats {
  // Apps with at least one finding per descriptor, sorted by count
  // descending then name, joined with the registry capability flags.
  std::vector<DescriptorUsageCount> usage_ranking;
  int multi_pwa_origins = 0;
  // Origins where the descriptor appears in shared_risk_descriptors.
  std::map<std::string, int> shared_risk_origins;
};

// --- snapshot analysis (pure) ---

// Textual <script> extraction: inline bodies and resolved src URLs, document
// order, capped at max_scripts. External entries carry empty bodies until
// someone fills them (the fetcher or the fixture loader).
std::vector<Script> extract_scripts(const std::string& html, const std::string& document_url,
                                    int max_scripts = kMaxScriptsPerSite);

// The manifest link target, resolved against the document URL.
std::optional<std::string> find_manifest_link(const std::string& html,
                                              const std::string& document_url);

// True iff any script body contains a serviceWorker registration call.
// Purely textual, so registrations inside comments or strings also count.
bool detect_sw(const SiteSnapshot& snapshot);

PwaCheck check_installable(const SiteSnapshot& snapshot);

std::vector<UsageFinding> find_permission_usages(const SiteSnapshot& snapshot,
                                                 const Registry& registry,
                                                 const PatternTable& patterns);

// Partitions snapshots by normalized origin and derives per-origin flags.
// Reports are ordered by origin; apps keep input order.
std::vector<OriginReport> group_origin(const std::vector<SiteSnapshot>& snapshots,
                                       const Registry& registry, const PatternTable& patterns);

AggregateStats aggregate(const std::vector<OriginReport>& reports, const Registry& registry);

// --- fixtures ---

// Loads a fixture directory shaped like a fetched site: site.json names the
// document, optional manifest, and external script files; inline scripts
// come from the document itself. Missing referenced resources become
// fetch_log errors, exactly as a live fetch would record them.
SiteSnapshot load_fixture(const std::string& fixture_dir);

// --- report rendering ---

nlohmann::json report_to_json(const std::vector<OriginReport>& reports,
                              const AggregateStats& stats);

// Real-crawl scale, kept for context in reports; this scanner never
// recomputes them.
inline constexpr long kReferenceCrawlPwaCount = 291583;
inline constexpr int kReferenceMultiPwaOrigins = 12487;

}  // namespace permlab
