#pragma once

#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include "reconwatch/common.hpp"
#include "reconwatch/net.hpp"
#include "reconwatch/url.hpp"

namespace reconwatch {

enum class NetworkClass { surface, dark };

struct ProxyEndpoint {
  std::string host = "127.0.0.1";
  int port = 9050;

  std::string str() const { return host + ":" + std::to_string(port); }
  bool operator==(const ProxyEndpoint&) const = default;

  static ProxyEndpoint parse(std::string_view s) {
    const std::size_t colon = s.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) {
      throw UsageError("invalid proxy endpoint \"" + std::string(s) +
                       "\": expected host:port");
    }
    ProxyEndpoint ep;
    ep.host = std::string(s.substr(0, colon));
    int port = 0;
    for (const char c : s.substr(colon + 1)) {
      if (c < '0' || c > '9') {
        throw UsageError("invalid proxy port in \"" + std::string(s) + "\"");
      }
      port = port * 10 + (c - '0');
      if (port > 65535) throw UsageError("proxy port out of range in \"" + std::string(s) + "\"");
    }
    if (port == 0) throw UsageError("proxy port must be non-zero in \"" + std::string(s) + "\"");
    ep.port = port;
    return ep;
  }
};

// Default SOCKS5 endpoint of a locally running Tor daemon, overridable via
// RECONWATCH_PROXY or --proxy.
inline ProxyEndpoint proxy_from_env(ProxyEndpoint fallback = {}) {
  if (const char* env = std::getenv(kProxyEnvVar); env != nullptr && *env != '\0') {
    return ProxyEndpoint::parse(env);
  }
  return fallback;
}

class InvalidOnionAddress : public UsageError {
 public:
  using UsageError::UsageError;
};

struct TransportRoute {
  NetworkClass network = NetworkClass::surface;
  std::optional<ProxyEndpoint> proxy;  // present iff network == dark
};

// v3 onion service labels are exactly 56 base32 characters.
inline bool is_valid_onion_label(std::string_view label) {
  if (label.size() != 56) return false;
  for (const char c : label) {
    const bool base32 = (c >= 'a' && c <= 'z') || (c >= '2' && c <= '7');
    if (!base32) return false;
  }
  return true;
}

// Pure classification: ".onion" hosts get a dark route through the proxy,
// everything else goes direct. Hostname resolution for dark routes happens
// proxy-side only.
inline TransportRoute classify_target(const Url& url, const ProxyEndpoint& proxy) {
  const std::string host = text::to_lower_ascii(url.host);
  if (!is_onion_host(host)) {
    return TransportRoute{NetworkClass::surface, std::nullopt};
  }
  const std::string label = host.substr(0, host.size() - 6);
  const std::size_t last_dot = label.rfind('.');
  const std::string_view final_label =
      last_dot == std::string::npos ? std::string_view(label)
                                    : std::string_view(label).substr(last_dot + 1);
  if (!is_valid_onion_label(final_label)) {
    throw InvalidOnionAddress("invalid onion address \"" + host +
                              "\": v3 requires a 56-character base32 label");
  }
  return TransportRoute{NetworkClass::dark, proxy};
}

enum class ProbeStatus { reachable, unreachable };

struct ProbeResult {
  ProbeStatus status = ProbeStatus::unreachable;
  std::string detail;
};

// SOCKS5 greeting handshake (RFC 1928): VER=0x05, one method, NO AUTH.
inline ProbeResult probe_proxy(const ProxyEndpoint& endpoint,
                               net::milliseconds timeout = net::milliseconds(5000)) {
  try {
    net::TcpStream stream(net::connect_tcp(endpoint.host, endpoint.port, timeout));
    stream.write_all(std::string_view("\x05\x01\x00", 3), timeout);
    char reply[2];
    net::read_exact(stream, reply, 2, timeout);
    if (reply[0] != 0x05) {
      return {ProbeStatus::unreachable,
              "protocol: expected SOCKS version 0x05, got 0x" +
                  std::to_string(static_cast<unsigned char>(reply[0]))};
    }
    if (reply[1] != 0x00) {
      return {ProbeStatus::unreachable, "protocol: proxy refused no-auth method"};
    }
    return {ProbeStatus::reachable, ""};
  } catch (const net::NetException& e) {
    const char* label = e.kind() == net::NetErrorKind::timeout ? "timeout: " : "refused: ";
    return {ProbeStatus::unreachable, label + std::string(e.what())};
  }
}

// Establishes a tunnel to host:port through the SOCKS5 proxy on an already
// connected proxy socket. Always sends address type 0x03 (domain name) so
// resolution happens proxy-side, the socks5h contract. Throws NetException
// with kind proxy on any handshake failure.
inline void socks5_tunnel(net::Stream& proxy_stream, const std::string& host, int port,
                          net::milliseconds timeout) {
  using net::NetErrorKind;
  using net::NetException;
  try {
    proxy_stream.write_all(std::string_view("\x05\x01\x00", 3), timeout);
    char method[2];
    net::read_exact(proxy_stream, method, 2, timeout);
    if (method[0] != 0x05 || method[1] != 0x00) {
      throw NetException(NetErrorKind::proxy, "SOCKS5 greeting rejected");
    }
    if (host.size() > 255) throw NetException(NetErrorKind::proxy, "hostname too long");
    std::string req;
    req += '\x05';  // VER
    req += '\x01';  // CMD connect
    req += '\x00';  // RSV
    req += '\x03';  // ATYP domain name
    req += static_cast<char>(host.size());
    req += host;
    req += static_cast<char>((port >> 8) & 0xFF);
    req += static_cast<char>(port & 0xFF);
    proxy_stream.write_all(req, timeout);

    char head[4];
    net::read_exact(proxy_stream, head, 4, timeout);
    if (head[0] != 0x05) throw NetException(NetErrorKind::proxy, "bad SOCKS5 reply version");
    if (head[1] != 0x00) {
      throw NetException(NetErrorKind::proxy,
                         "SOCKS5 connect refused (rep=0x" +
                             std::to_string(static_cast<unsigned char>(head[1])) + ")");
    }
    std::size_t addr_len = 0;
    switch (head[3]) {
      case 0x01: addr_len = 4; break;
      case 0x04: addr_len = 16; break;
      case 0x03: {
        char len = 0;
        net::read_exact(proxy_stream, &len, 1, timeout);
        addr_len = static_cast<unsigned char>(len);
        break;
      }
      default:
        throw NetException(NetErrorKind::proxy, "bad SOCKS5 bound address type");
    }
    char skip[272];
    net::read_exact(proxy_stream, skip, addr_len + 2, timeout);
  } catch (const NetException& e) {
    if (e.kind() == NetErrorKind::proxy) throw;
    throw NetException(NetErrorKind::proxy, std::string("SOCKS5 handshake failed: ") + e.what());
  }
}

}  // namespace reconwatch
