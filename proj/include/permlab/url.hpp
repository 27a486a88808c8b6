#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace permlab {

// Minimal http(s) URL support: parsing, origin normalization, and relative
// reference resolution (RFC 3986 section 5). Not a general URL library; it
// covers what manifest start_url handling and the scanner need.
struct Url {
  std::string scheme;  // lowercased
  std::string host;    // lowercased
  std::optional<int> port;
  std::string path;  // possibly empty; always begins with '/' when non-empty for http(s)
  std::optional<std::string> query;     // without the '?'
  std::optional<std::string> fragment;  // without the '#'

  // Absolute URLs only; std::nullopt when `text` has no scheme or no host.
  static std::optional<Url> parse(std::string_view text);

  // scheme://host[:port], default ports (http 80, https 443) elided.
  std::string origin() const;

  // Resolves `reference` (absolute, scheme-relative, absolute-path, relative
  // path, query-only, or fragment-only) against this base.
  Url resolve(std::string_view reference) const;

  Url without_fragment() const;

  std::string str() const;

  bool is_http_family() const { return scheme == "http" || scheme == "https"; }
  bool is_https() const { return scheme == "https"; }

  // Explicit port if set, otherwise the scheme default (80/443, 0 if unknown).
  int effective_port() const;
};

// Normalized origin of an absolute URL string, or std::nullopt if unparsable.
std::optional<std::string> origin_of(std::string_view url_text);

}  // namespace permlab
