#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "permlab/scanner.hpp"

namespace permlab {

// Responsible-crawling limits applied to every live scan.
struct FetchLimits {
  double per_site_timeout_secs = 30.0;  // whole-site budget
  int max_redirects = 5;
  std::size_t max_body_bytes = 5 * 1024 * 1024;  // per resource
  int max_scripts = kMaxScriptsPerSite;
};

// Fetches one site: document (following redirects), manifest, external
// scripts. Every network request lands in fetch_log; exactly one request per
// distinct resource URL, no retries. Whole-site problems (unreachable
// document, redirect limit, budget exhausted) set snapshot.failure and the
// snapshot holds whatever was gathered before.
SiteSnapshot fetch_site(const std::string& url, const FetchLimits& limits = {});

// Fetches up to `concurrency` sites in parallel (at most two in-flight
// requests per site); result order matches input order.
std::vector<SiteSnapshot> fetch_sites(const std::vector<std::string>& urls,
                                      const FetchLimits& limits, int concurrency);

}  // namespace permlab
