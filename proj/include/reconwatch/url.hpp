#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reconwatch/text.hpp"

namespace reconwatch {

// Minimal http/https URL model. Port 0 means the scheme default.
struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path = "/";
  std::string query;
  std::string fragment;

  static std::optional<Url> parse(std::string_view raw);

  int effective_port() const { return port != 0 ? port : (scheme == "https" ? 443 : 80); }
  bool is_https() const { return scheme == "https"; }

  bool same_host(const Url& other) const {
    return scheme == other.scheme && host == other.host &&
           effective_port() == other.effective_port();
  }

  // Request target: path plus query, as sent on the wire.
  std::string target() const {
    return query.empty() ? path : path + "?" + query;
  }

  std::string origin() const {
    std::string out = scheme + "://" + host;
    if (port != 0 && port != (scheme == "https" ? 443 : 80)) {
      out += ":" + std::to_string(port);
    }
    return out;
  }

  std::string str() const {
    std::string out = origin() + path;
    if (!query.empty()) out += "?" + query;
    if (!fragment.empty()) out += "#" + fragment;
    return out;
  }
};

namespace detail {

// RFC 3986 dot-segment removal.
inline std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  const bool trailing_slash =
      text::ends_with(path, "/") || text::ends_with(path, "/.") || text::ends_with(path, "/..");
  while (i < path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    std::string_view seg = path.substr(i, j - i);
    if (seg == "..") {
      if (!stack.empty()) stack.pop_back();
    } else if (!seg.empty() && seg != ".") {
      stack.emplace_back(seg);
    }
    i = j + 1;
  }
  std::string out;
  for (const auto& seg : stack) out += "/" + seg;
  if (out.empty() || trailing_slash) out += "/";
  return out;
}

}  // namespace detail

inline std::optional<Url> Url::parse(std::string_view raw) {
  const std::size_t scheme_end = raw.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
  Url url;
  url.scheme = text::to_lower_ascii(raw.substr(0, scheme_end));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;

  std::string_view rest = raw.substr(scheme_end + 3);
  const std::size_t frag = rest.find('#');
  if (frag != std::string_view::npos) {
    url.fragment = std::string(rest.substr(frag + 1));
    rest = rest.substr(0, frag);
  }
  const std::size_t q = rest.find('?');
  if (q != std::string_view::npos) {
    url.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  const std::size_t slash = rest.find('/');
  std::string_view authority = slash == std::string_view::npos ? rest : rest.substr(0, slash);
  if (slash != std::string_view::npos) {
    url.path = std::string(rest.substr(slash));
  }
  // No userinfo support: credentials in scan targets are rejected outright.
  if (authority.find('@') != std::string_view::npos) return std::nullopt;
  const std::size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    std::string_view port_str = authority.substr(colon + 1);
    if (port_str.empty()) return std::nullopt;
    int port = 0;
    for (char c : port_str) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
      if (port > 65535) return std::nullopt;
    }
    url.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  url.host = text::to_lower_ascii(authority);
  if (url.path.empty()) url.path = "/";
  return url;
}

// Dedup key: lowercased scheme/host, default port elided, dot-segments
// resolved, fragment stripped, query kept (forum pagination lives there).
inline std::string normalize_url(const Url& url) {
  Url n = url;
  n.fragment.clear();
  n.path = detail::remove_dot_segments(n.path);
  if (n.port == (n.scheme == "https" ? 443 : 80)) n.port = 0;
  return n.str();
}

inline std::optional<std::string> normalize_url(std::string_view raw) {
  auto url = Url::parse(raw);
  if (!url) return std::nullopt;
  return normalize_url(*url);
}

// Resolves an anchor href against its page URL. Returns nullopt for
// non-http(s) schemes (mailto:, javascript:, ...) and unparseable values.
inline std::optional<Url> resolve_href(const Url& base, std::string_view href) {
  std::string h = text::trim(href);
  if (h.empty()) return std::nullopt;

  const std::size_t colon = h.find(':');
  const std::size_t slash = h.find('/');
  if (colon != std::string::npos && (slash == std::string::npos || colon < slash)) {
    // Absolute URL with an explicit scheme.
    return Url::parse(h);
  }
  if (text::starts_with(h, "//")) {
    return Url::parse(base.scheme + ":" + h);
  }

  Url out = base;
  out.fragment.clear();
  out.query.clear();
  std::string path = h;
  const std::size_t frag = path.find('#');
  if (frag != std::string::npos) {
    out.fragment = path.substr(frag + 1);
    path = path.substr(0, frag);
  }
  const std::size_t q = path.find('?');
  if (q != std::string::npos) {
    out.query = path.substr(q + 1);
    path = path.substr(0, q);
  }
  if (path.empty()) {
    out.path = base.path;
    if (out.query.empty() && q == std::string::npos) out.query = base.query;
  } else if (path[0] == '/') {
    out.path = detail::remove_dot_segments(path);
  } else {
    const std::size_t last = base.path.rfind('/');
    const std::string dir = last == std::string::npos ? "/" : base.path.substr(0, last + 1);
    out.path = detail::remove_dot_segments(dir + path);
  }
  return out;
}

inline bool is_onion_host(std::string_view host) {
  return text::ends_with(text::to_lower_ascii(host), ".onion");
}

}  // namespace reconwatch
