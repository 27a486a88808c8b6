#include "permlab/fetch.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <set>
#include <thread>

#include "httplib.h"
#include "permlab/url.hpp"

namespace permlab {
namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kUserAgent = "permlab-scanner/0.1";

struct FetchOutcome {
  std::string final_url;
  std::string body;
  int status = 0;
  std::optional<std::string> error;
  std::size_t last_log_index = 0;  // valid once at least one entry was logged
};

std::chrono::milliseconds remaining_budget(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return std::max(left, std::chrono::milliseconds(1));
}

// One GET with manual redirect handling; every hop becomes a fetch_log entry.
FetchOutcome fetch_following(std::string current, const FetchLimits& limits,
                             Clock::time_point deadline, std::vector<FetchLogEntry>& log) {
  FetchOutcome out;
  int hops = 0;
  for (;;) {
    if (Clock::now() >= deadline) {
      log.push_back({current, 0, 0, 0.0, std::string("timeout")});
      out.last_log_index = log.size() - 1;
      out.error = "timeout";
      return out;
    }
    auto url = Url::parse(current);
    if (!url) {
      log.push_back({current, 0, 0, 0.0, std::string("invalid-url")});
      out.last_log_index = log.size() - 1;
      out.error = "invalid-url";
      return out;
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url->is_https()) {
      log.push_back({current, 0, 0, 0.0, std::string("https-unsupported")});
      out.last_log_index = log.size() - 1;
      out.error = "https-unsupported";
      return out;
    }
#endif

    httplib::Client client(url->origin());
    if (!client.is_valid()) {
      log.push_back({current, 0, 0, 0.0, std::string("invalid-url")});
      out.last_log_index = log.size() - 1;
      out.error = "invalid-url";
      return out;
    }
    client.set_follow_location(false);
    auto budget = remaining_budget(deadline);
    client.set_connection_timeout(budget);
    client.set_read_timeout(budget);
    client.set_write_timeout(budget);

    std::string target = url->path.empty() ? "/" : url->path;
    if (url->query) target += "?" + *url->query;

    std::string body;
    bool too_large = false;
    int status = 0;
    auto started = Clock::now();
    auto res = client.Get(
        target, {{"User-Agent", kUserAgent}, {"Accept", "*/*"}},
        [&](const httplib::Response& response) {
          status = response.status;
          return true;
        },
        [&](const char* data, std::size_t len) {
          if (body.size() + len > limits.max_body_bytes) {
            too_large = true;
            return false;
          }
          body.append(data, len);
          return true;
        });
    double duration_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - started).count();

    if (too_large) {
      log.push_back({current, status, body.size(), duration_ms, std::string("too-large")});
      out.last_log_index = log.size() - 1;
      out.error = "too-large";
      return out;
    }
    if (!res) {
      std::string error = Clock::now() >= deadline ? "timeout" : "unreachable";
      log.push_back({current, 0, 0, duration_ms, error});
      out.last_log_index = log.size() - 1;
      out.error = error;
      return out;
    }

    log.push_back({current, status, body.size(), duration_ms, std::nullopt});
    out.last_log_index = log.size() - 1;

    if (status >= 300 && status < 400) {
      std::string location = res->get_header_value("Location");
      if (!location.empty()) {
        ++hops;
        if (hops > limits.max_redirects) {
          log.back().error = "redirect-limit";
          out.error = "redirect-limit";
          return out;
        }
        current = url->resolve(location).str();
        continue;
      }
    }
    if (status >= 200 && status < 300) {
      out.final_url = current;
      out.body = std::move(body);
      out.status = status;
      return out;
    }
    out.error = "http-status-" + std::to_string(status);
    log.back().error = out.error;
    return out;
  }
}

}  // namespace

SiteSnapshot fetch_site(const std::string& url, const FetchLimits& limits) {
  SiteSnapshot snapshot;
  snapshot.document_url = url;
  auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(limits.per_site_timeout_secs));

  FetchOutcome document = fetch_following(url, limits, deadline, snapshot.fetch_log);
  if (document.error) {
    snapshot.failure = document.error;
    return snapshot;
  }
  snapshot.document_url = document.final_url;
  snapshot.html = std::move(document.body);
  snapshot.scripts = extract_scripts(snapshot.html, snapshot.document_url, limits.max_scripts);

  // One request per distinct resource URL; later references reuse the body.
  std::map<std::string, std::optional<std::string>> fetched;

  if (auto link = find_manifest_link(snapshot.html, snapshot.document_url)) {
    snapshot.manifest_url = link;
    FetchOutcome res = fetch_following(*link, limits, deadline, snapshot.fetch_log);
    if (!res.error) {
      fetched[*link] = res.body;
      nlohmann::json doc = nlohmann::json::parse(res.body, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        snapshot.fetch_log[res.last_log_index].error = "manifest-parse";
      } else {
        snapshot.manifest = AppManifest::from_json(doc, res.final_url);
        snapshot.manifest_url = res.final_url;
      }
    } else {
      fetched[*link] = std::nullopt;
    }
  }

  for (auto& script : snapshot.scripts) {
    if (script.source.kind != ScriptSource::Kind::kExternal) continue;
    if (Clock::now() >= deadline) {
      snapshot.failure = "timeout";
      return snapshot;
    }
    auto it = fetched.find(script.source.url);
    if (it != fetched.end()) {
      if (it->second) script.body = *it->second;
      continue;
    }
    FetchOutcome res = fetch_following(script.source.url, limits, deadline, snapshot.fetch_log);
    if (!res.error) {
      script.body = res.body;
      fetched[script.source.url] = std::move(res.body);
    } else {
      fetched[script.source.url] = std::nullopt;
    }
  }
  return snapshot;
}

std::vector<SiteSnapshot> fetch_sites(const std::vector<std::string>& urls,
                                      const FetchLimits& limits, int concurrency) {
  std::vector<SiteSnapshot> out(urls.size());
  if (urls.empty()) return out;
  int workers = std::max(1, std::min(concurrency, static_cast<int>(urls.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= urls.size()) return;
      out[i] = fetch_site(urls[i], limits);
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) threads.emplace_back(work);
  for (auto& thread : threads) thread.join();
  return out;
}

}  // namespace permlab
