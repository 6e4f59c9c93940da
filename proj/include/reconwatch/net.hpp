#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/err.h>
#include <openssl/ssl.h>
#include <openssl/x509v3.h>

#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace reconwatch::net {

using std::chrono::milliseconds;

enum class NetErrorKind { timeout, transport, proxy, dns };

class NetException : public std::runtime_error {
 public:
  NetException(NetErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}
  NetErrorKind kind() const { return kind_; }

 private:
  NetErrorKind kind_;
};

inline void wait_readable(int fd, milliseconds timeout) {
  pollfd pfd{fd, POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc == 0) throw NetException(NetErrorKind::timeout, "read timed out");
  if (rc < 0) throw NetException(NetErrorKind::transport, std::strerror(errno));
}

inline void wait_writable(int fd, milliseconds timeout) {
  pollfd pfd{fd, POLLOUT, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc == 0) throw NetException(NetErrorKind::timeout, "write timed out");
  if (rc < 0) throw NetException(NetErrorKind::transport, std::strerror(errno));
}

// Blocking TCP connect with timeout. Resolution stays local; never call
// this with a .onion name.
inline int connect_tcp(const std::string& host, int port, milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  const int gai = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
  if (gai != 0) {
    throw NetException(NetErrorKind::dns,
                       "cannot resolve " + host + ": " + gai_strerror(gai));
  }
  std::unique_ptr<addrinfo, void (*)(addrinfo*)> guard(res, ::freeaddrinfo);

  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, SOCK_STREAM, 0);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
      if (rc == 0) {
        ::close(fd);
        last_error = "connect timed out";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc != 0) {
      last_error = std::strerror(errno);
      ::close(fd);
      continue;
    }
    ::fcntl(fd, F_SETFL, flags);  // back to blocking; reads go through poll
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return fd;
  }
  const auto kind = last_error == "connect timed out" ? NetErrorKind::timeout
                                                      : NetErrorKind::transport;
  throw NetException(kind, "connect to " + host + ":" + service + " failed: " + last_error);
}

// Byte stream over a connected socket, optionally TLS-wrapped.
class Stream {
 public:
  virtual ~Stream() = default;
  // Returns bytes read; 0 on orderly close. Throws on error/timeout.
  virtual std::size_t read_some(char* buf, std::size_t len, milliseconds timeout) = 0;
  virtual void write_all(std::string_view data, milliseconds timeout) = 0;
};

class TcpStream : public Stream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() override {
    if (fd_ >= 0) ::close(fd_);
  }

  int fd() const { return fd_; }
  int release_fd() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }

  std::size_t read_some(char* buf, std::size_t len, milliseconds timeout) override {
    wait_readable(fd_, timeout);
    const ssize_t n = ::recv(fd_, buf, len, 0);
    if (n < 0) throw NetException(NetErrorKind::transport, std::strerror(errno));
    return static_cast<std::size_t>(n);
  }

  void write_all(std::string_view data, milliseconds timeout) override {
    std::size_t off = 0;
    while (off < data.size()) {
      wait_writable(fd_, timeout);
      const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) throw NetException(NetErrorKind::transport, std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

 private:
  int fd_;
};

namespace detail {

inline SSL_CTX* tls_client_ctx() {
  static std::once_flag once;
  static SSL_CTX* ctx = nullptr;
  std::call_once(once, [] {
    ctx = SSL_CTX_new(TLS_client_method());
    SSL_CTX_set_min_proto_version(ctx, TLS1_2_VERSION);
    SSL_CTX_set_default_verify_paths(ctx);
    SSL_CTX_set_verify(ctx, SSL_VERIFY_PEER, nullptr);
  });
  return ctx;
}

inline std::string last_tls_error() {
  const unsigned long code = ERR_get_error();
  if (code == 0) return "TLS failure";
  char buf[256];
  ERR_error_string_n(code, buf, sizeof(buf));
  return buf;
}

}  // namespace detail

// TLS over an already-connected socket (direct or a SOCKS5 tunnel), with
// SNI and hostname verification against the target host.
class TlsStream : public Stream {
 public:
  TlsStream(int fd, const std::string& hostname, milliseconds timeout) : fd_(fd) {
    ssl_ = SSL_new(detail::tls_client_ctx());
    if (ssl_ == nullptr) {
      ::close(fd_);
      throw NetException(NetErrorKind::transport, detail::last_tls_error());
    }
    SSL_set_fd(ssl_, fd_);
    SSL_set_tlsext_host_name(ssl_, hostname.c_str());
    SSL_set1_host(ssl_, hostname.c_str());
    while (true) {
      const int rc = SSL_connect(ssl_);
      if (rc == 1) break;
      if (!retry_io(rc, timeout)) {
        const std::string err = "TLS handshake with " + hostname + " failed: " +
                                detail::last_tls_error();
        cleanup();
        throw NetException(NetErrorKind::transport, err);
      }
    }
  }
  TlsStream(const TlsStream&) = delete;
  TlsStream& operator=(const TlsStream&) = delete;
  ~TlsStream() override { cleanup(); }

  std::size_t read_some(char* buf, std::size_t len, milliseconds timeout) override {
    while (true) {
      const int n = SSL_read(ssl_, buf, static_cast<int>(len));
      if (n > 0) return static_cast<std::size_t>(n);
      const int err = SSL_get_error(ssl_, n);
      if (err == SSL_ERROR_ZERO_RETURN) return 0;
      if (!retry_io(n, timeout)) {
        if (err == SSL_ERROR_SYSCALL && n == 0) return 0;  // abrupt close
        throw NetException(NetErrorKind::transport,
                           "TLS read failed: " + detail::last_tls_error());
      }
    }
  }

  void write_all(std::string_view data, milliseconds timeout) override {
    std::size_t off = 0;
    while (off < data.size()) {
      const int n = SSL_write(ssl_, data.data() + off,
                              static_cast<int>(data.size() - off));
      if (n > 0) {
        off += static_cast<std::size_t>(n);
        continue;
      }
      if (!retry_io(n, timeout)) {
        throw NetException(NetErrorKind::transport,
                           "TLS write failed: " + detail::last_tls_error());
      }
    }
  }

 private:
  bool retry_io(int rc, milliseconds timeout) {
    const int err = SSL_get_error(ssl_, rc);
    if (err == SSL_ERROR_WANT_READ) {
      wait_readable(fd_, timeout);
      return true;
    }
    if (err == SSL_ERROR_WANT_WRITE) {
      wait_writable(fd_, timeout);
      return true;
    }
    return false;
  }

  void cleanup() {
    if (ssl_ != nullptr) {
      SSL_shutdown(ssl_);
      SSL_free(ssl_);
      ssl_ = nullptr;
    }
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  int fd_;
  SSL* ssl_ = nullptr;
};

// Reads exactly len bytes or throws.
inline void read_exact(Stream& s, char* buf, std::size_t len, milliseconds timeout) {
  std::size_t off = 0;
  while (off < len) {
    const std::size_t n = s.read_some(buf + off, len - off, timeout);
    if (n == 0) throw NetException(NetErrorKind::transport, "connection closed early");
    off += n;
  }
}

}  // namespace reconwatch::net
