#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "reconwatch/common.hpp"
#include "reconwatch/gateway.hpp"
#include "reconwatch/net.hpp"
#include "reconwatch/text.hpp"
#include "reconwatch/url.hpp"

namespace reconwatch {

struct CaseInsensitiveLess {
  bool operator()(const std::string& a, const std::string& b) const {
    return text::to_lower_ascii(a) < text::to_lower_ascii(b);
  }
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string, CaseInsensitiveLess> headers;
  std::string body;

  std::string header(const std::string& name) const {
    const auto it = headers.find(name);
    return it == headers.end() ? "" : it->second;
  }
};

// Hard cap on response bodies; dark-web pages are untrusted input.
inline constexpr std::size_t kMaxBodyBytes = 16 * 1024 * 1024;

namespace httpdetail {

inline std::unique_ptr<net::Stream> open_stream(const Url& url, const TransportRoute& route,
                                                net::milliseconds timeout) {
  int fd;
  if (route.network == NetworkClass::dark) {
    fd = net::connect_tcp(route.proxy->host, route.proxy->port, timeout);
    net::TcpStream proxy_stream(fd);
    socks5_tunnel(proxy_stream, url.host, url.effective_port(), timeout);
    fd = proxy_stream.release_fd();
  } else {
    fd = net::connect_tcp(url.host, url.effective_port(), timeout);
  }
  if (url.is_https()) {
    return std::make_unique<net::TlsStream>(fd, url.host, timeout);
  }
  return std::make_unique<net::TcpStream>(fd);
}

inline std::string read_until(net::Stream& s, std::string& buf, std::string_view delim,
                              net::milliseconds timeout, std::size_t max_bytes) {
  std::size_t scanned = 0;
  while (true) {
    const std::size_t pos = buf.find(delim, scanned > delim.size() ? scanned - delim.size() : 0);
    if (pos != std::string::npos) {
      std::string head = buf.substr(0, pos);
      buf.erase(0, pos + delim.size());
      return head;
    }
    scanned = buf.size();
    if (buf.size() > max_bytes) {
      throw net::NetException(net::NetErrorKind::transport, "response header too large");
    }
    char chunk[8192];
    const std::size_t n = s.read_some(chunk, sizeof(chunk), timeout);
    if (n == 0) {
      throw net::NetException(net::NetErrorKind::transport,
                              "connection closed before delimiter");
    }
    buf.append(chunk, n);
  }
}

inline std::string decode_chunked(net::Stream& s, std::string& buf,
                                  net::milliseconds timeout) {
  std::string body;
  while (true) {
    const std::string size_line = read_until(s, buf, "\r\n", timeout, 64 * 1024);
    std::size_t chunk_size = 0;
    for (const char c : size_line) {
      if (c == ';') break;  // chunk extensions ignored
      int digit;
      if (c >= '0' && c <= '9') digit = c - '0';
      else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
      else throw net::NetException(net::NetErrorKind::transport, "bad chunk size");
      chunk_size = chunk_size * 16 + static_cast<std::size_t>(digit);
    }
    if (body.size() + chunk_size > kMaxBodyBytes) {
      throw net::NetException(net::NetErrorKind::transport, "response body too large");
    }
    while (buf.size() < chunk_size + 2) {
      char chunk[8192];
      const std::size_t n = s.read_some(chunk, sizeof(chunk), timeout);
      if (n == 0) throw net::NetException(net::NetErrorKind::transport, "truncated chunk");
      buf.append(chunk, n);
    }
    body.append(buf, 0, chunk_size);
    buf.erase(0, chunk_size + 2);
    if (chunk_size == 0) break;
  }
  return body;
}

}  // namespace httpdetail

// One HTTP/1.1 GET over the given route. Plain GET only: the tool never
// sends authentication headers or request bodies. Connection: close keeps
// response framing simple. Redirects are handled by the caller.
inline HttpResponse http_get(const Url& url, const TransportRoute& route,
                             net::milliseconds timeout,
                             std::string_view user_agent = kUserAgent) {
  auto stream = httpdetail::open_stream(url, route, timeout);

  std::string host_header = url.host;
  if (url.port != 0 && url.port != (url.is_https() ? 443 : 80)) {
    host_header += ":" + std::to_string(url.port);
  }
  std::string request = "GET " + url.target() + " HTTP/1.1\r\n";
  request += "Host: " + host_header + "\r\n";
  request += "User-Agent: " + std::string(user_agent) + "\r\n";
  request += "Accept: text/html,application/xhtml+xml;q=0.9,*/*;q=0.5\r\n";
  request += "Connection: close\r\n\r\n";
  stream->write_all(request, timeout);

  std::string buf;
  const std::string status_line =
      httpdetail::read_until(*stream, buf, "\r\n", timeout, 64 * 1024);
  if (status_line.size() < 12 || !text::starts_with(status_line, "HTTP/")) {
    throw net::NetException(net::NetErrorKind::transport,
                            "malformed status line: " + status_line.substr(0, 64));
  }
  HttpResponse resp;
  resp.status = std::atoi(status_line.c_str() + 9);
  if (resp.status < 100 || resp.status > 599) {
    throw net::NetException(net::NetErrorKind::transport, "malformed HTTP status");
  }

  while (true) {
    const std::string line = httpdetail::read_until(*stream, buf, "\r\n", timeout, 64 * 1024);
    if (line.empty()) break;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string name = text::trim(line.substr(0, colon));
    std::string value = text::trim(line.substr(colon + 1));
    if (!name.empty()) resp.headers[name] = std::move(value);
  }

  const std::string transfer = text::to_lower_ascii(resp.header("Transfer-Encoding"));
  if (transfer.find("chunked") != std::string::npos) {
    resp.body = httpdetail::decode_chunked(*stream, buf, timeout);
    return resp;
  }
  const std::string length = resp.header("Content-Length");
  if (!length.empty()) {
    const std::size_t want = static_cast<std::size_t>(std::strtoull(length.c_str(), nullptr, 10));
    if (want > kMaxBodyBytes) {
      throw net::NetException(net::NetErrorKind::transport, "response body too large");
    }
    while (buf.size() < want) {
      char chunk[8192];
      const std::size_t n = stream->read_some(chunk, sizeof(chunk), timeout);
      if (n == 0) {
        throw net::NetException(net::NetErrorKind::transport, "truncated response body");
      }
      buf.append(chunk, n);
    }
    resp.body = buf.substr(0, want);
    return resp;
  }
  // No framing headers: read to EOF.
  while (true) {
    char chunk[8192];
    const std::size_t n = stream->read_some(chunk, sizeof(chunk), timeout);
    if (n == 0) break;
    if (buf.size() + n > kMaxBodyBytes) {
      throw net::NetException(net::NetErrorKind::transport, "response body too large");
    }
    buf.append(chunk, n);
  }
  resp.body = std::move(buf);
  return resp;
}

}  // namespace reconwatch
