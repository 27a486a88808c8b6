#include "permlab/url.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace permlab {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool looks_like_scheme(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text[0]))) return false;
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '+' || c == '-' || c == '.';
  });
}

// RFC 3986 section 5.2.4.
std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0) {
      in.replace(0, 4, "/");
      auto slash = out.find_last_of('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "/..") {
      in = "/";
      auto slash = out.find_last_of('/');
      out.erase(slash == std::string::npos ? 0 : slash);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      auto next = in.find('/', in[0] == '/' ? 1 : 0);
      out.append(in, 0, next);
      in.erase(0, next == std::string::npos ? in.size() : next);
    }
  }
  return out;
}

// Raw five-way split of a URI reference (RFC 3986 appendix B), no
// normalization. Each part may be absent; path is always present, possibly
// empty.
struct Parts {
  std::optional<std::string> scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

Parts split_reference(std::string_view text) {
  Parts parts;
  if (auto hash = text.find('#'); hash != std::string_view::npos) {
    parts.fragment = std::string(text.substr(hash + 1));
    text = text.substr(0, hash);
  }
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    auto slash = text.find('/');
    if ((slash == std::string_view::npos || colon < slash) &&
        looks_like_scheme(text.substr(0, colon))) {
      parts.scheme = lowercase(text.substr(0, colon));
      text = text.substr(colon + 1);
    }
  }
  if (text.rfind("//", 0) == 0) {
    auto rest = text.substr(2);
    auto end = rest.find_first_of("/?");
    parts.authority = std::string(rest.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  }
  if (auto q = text.find('?'); q != std::string_view::npos) {
    parts.query = std::string(text.substr(q + 1));
    text = text.substr(0, q);
  }
  parts.path = std::string(text);
  return parts;
}

// host[:port], userinfo tolerated and dropped. Returns false on a bad port.
bool apply_authority(std::string_view authority, Url& url) {
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  auto colon = authority.rfind(':');
  // An IPv6 literal would contain ':' inside brackets; this parser stays
  // http(s)-hostname oriented and treats a bracketed host as opaque.
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    std::string_view port_text = authority.substr(colon + 1);
    authority = authority.substr(0, colon);
    if (!port_text.empty()) {
      int port = 0;
      auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
      if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 ||
          port > 65535) {
        return false;
      }
      url.port = port;
    }
  }
  url.host = lowercase(authority);
  return true;
}

int default_port(const std::string& scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return 0;
}

}  // namespace

std::optional<Url> Url::parse(std::string_view text) {
  Parts parts = split_reference(text);
  if (!parts.scheme || !parts.authority) return std::nullopt;
  Url url;
  url.scheme = *parts.scheme;
  if (!apply_authority(*parts.authority, url) || url.host.empty()) return std::nullopt;
  url.path = remove_dot_segments(parts.path);
  url.query = std::move(parts.query);
  url.fragment = std::move(parts.fragment);
  if (url.port && *url.port == default_port(url.scheme)) url.port.reset();
  return url;
}

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port && *port != default_port(scheme)) {
    out += ':';
    out += std::to_string(*port);
  }
  return out;
}

Url Url::resolve(std::string_view reference) const {
  Parts ref = split_reference(reference);
  Url target;
  if (ref.scheme) {
    target.scheme = *ref.scheme;
    if (ref.authority) apply_authority(*ref.authority, target);
    target.path = remove_dot_segments(ref.path);
    target.query = std::move(ref.query);
  } else {
    target.scheme = scheme;
    if (ref.authority) {
      apply_authority(*ref.authority, target);
      target.path = remove_dot_segments(ref.path);
      target.query = std::move(ref.query);
    } else {
      target.host = host;
      target.port = port;
      if (ref.path.empty()) {
        target.path = path;
        target.query = ref.query ? std::move(ref.query) : query;
      } else {
        if (ref.path[0] == '/') {
          target.path = remove_dot_segments(ref.path);
        } else {
          // Merge (RFC 3986 section 5.2.3): base path up to its last slash,
          // or "/" when the base has an authority but an empty path.
          std::string merged;
          if (path.empty()) {
            merged = "/" + ref.path;
          } else {
            merged = path.substr(0, path.find_last_of('/') + 1) + ref.path;
          }
          target.path = remove_dot_segments(merged);
        }
        target.query = std::move(ref.query);
      }
    }
  }
  target.fragment = std::move(ref.fragment);
  if (target.port && *target.port == default_port(target.scheme)) target.port.reset();
  return target;
}

Url Url::without_fragment() const {
  Url copy = *this;
  copy.fragment.reset();
  return copy;
}

std::string Url::str() const {
  std::string out = scheme + "://" + host;
  if (port && *port != default_port(scheme)) {
    out += ':';
    out += std::to_string(*port);
  }
  if (path.empty()) {
    if (is_http_family()) out += '/';
  } else {
    out += path;
  }
  if (query) {
    out += '?';
    out += *query;
  }
  if (fragment) {
    out += '#';
    out += *fragment;
  }
  return out;
}

int Url::effective_port() const {
  if (port) return *port;
  return default_port(scheme);
}

std::optional<std::string> origin_of(std::string_view url_text) {
  auto url = Url::parse(url_text);
  if (!url) return std::nullopt;
  return url->origin();
}

}  // namespace permlab
