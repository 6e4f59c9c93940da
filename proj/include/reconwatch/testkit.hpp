#pragma once

// Offline test apparatus: a loopback HTTP fixture server, a mock SOCKS5
// proxy that maps onion domains onto the fixture server, and corpus
// builders. No piece of this header touches the real network.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "reconwatch/gateway.hpp"
#include "reconwatch/net.hpp"

namespace reconwatch::testkit {

struct FixturePage {
  std::string body;
  std::string content_type = "text/html";
  int status = 200;
  std::string location;  // sent as the Location header when non-empty
};

inline FixturePage make_page(std::string body,
                             std::string content_type = "text/html") {
  FixturePage page;
  page.body = std::move(body);
  page.content_type = std::move(content_type);
  return page;
}

struct FixtureCorpus {
  std::map<std::string, FixturePage> pages;  // path -> page
  std::optional<std::string> robots;
};

struct AccessEntry {
  std::chrono::steady_clock::time_point at;
  std::string path;
  std::string target;  // raw request target including query
  std::string user_agent;
};

// Serves a corpus over plain HTTP on an ephemeral loopback port and records
// every request, in arrival order, with a steady-clock timestamp.
class FixtureServer {
 public:
  explicit FixtureServer(FixtureCorpus corpus) : corpus_(std::move(corpus)) {
    server_.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("fixture server: bind failed");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;
  ~FixtureServer() { stop(); }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }
  std::string host() const { return "127.0.0.1"; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::vector<AccessEntry> access_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_;
  }

  std::size_t request_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_.size();
  }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      log_.push_back(AccessEntry{std::chrono::steady_clock::now(), req.path, req.target,
                                 req.get_header_value("User-Agent")});
    }
    if (req.path == "/robots.txt" && corpus_.robots) {
      res.status = 200;
      res.set_content(*corpus_.robots, "text/plain");
      return;
    }
    const auto it = corpus_.pages.find(req.path);
    if (it == corpus_.pages.end()) {
      res.status = 404;
      res.set_content("not found", "text/plain");
      return;
    }
    const FixturePage& page = it->second;
    res.status = page.status;
    if (!page.location.empty()) res.set_header("Location", page.location);
    res.set_content(page.body, page.content_type);
  }

  FixtureCorpus corpus_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::vector<AccessEntry> log_;
};

// Smallest gap between consecutive logged requests; relies on the log's
// arrival order. Returns a huge value for fewer than two entries.
inline std::chrono::milliseconds min_access_gap(const std::vector<AccessEntry>& log) {
  std::chrono::milliseconds min_gap = std::chrono::milliseconds::max();
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto gap = std::chrono::duration_cast<std::chrono::milliseconds>(log[i].at -
                                                                           log[i - 1].at);
    min_gap = std::min(min_gap, gap);
  }
  return min_gap;
}

struct ProxyConnectEntry {
  std::string host;
  int port = 0;
  bool accepted = false;
  std::string note;  // refusal reason when not accepted
};

namespace testkitdetail {

inline bool send_all(int fd, const char* data, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

inline bool recv_exact(int fd, char* buf, std::size_t len, const std::atomic<bool>& running,
                       std::chrono::milliseconds total = std::chrono::milliseconds(10000)) {
  const auto deadline = std::chrono::steady_clock::now() + total;
  std::size_t off = 0;
  while (off < len) {
    if (!running || std::chrono::steady_clock::now() > deadline) return false;
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    if (rc == 0) continue;
    if (rc < 0) return false;
    const ssize_t n = ::recv(fd, buf + off, len - off, 0);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace testkitdetail

// RFC 1928 subset: no-auth greeting, CONNECT with domain-name addresses.
// Onion domains all tunnel to one upstream (the fixture server); any other
// domain is connected as requested. IPv4/IPv6 address types are refused,
// which is exactly what a socks5h-faithful client must never send.
class MockSocks5Proxy {
 public:
  MockSocks5Proxy(std::string upstream_host, int upstream_port)
      : upstream_host_(std::move(upstream_host)), upstream_port_(upstream_port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("mock proxy: socket failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listen_fd_, 32) != 0) {
      ::close(listen_fd_);
      throw std::runtime_error("mock proxy: bind/listen failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  MockSocks5Proxy(const MockSocks5Proxy&) = delete;
  MockSocks5Proxy& operator=(const MockSocks5Proxy&) = delete;
  ~MockSocks5Proxy() { stop(); }

  void stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> workers;
    {
      std::lock_guard<std::mutex> lock(mu_);
      workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
  }

  int port() const { return port_; }
  ProxyEndpoint endpoint() const { return ProxyEndpoint{"127.0.0.1", port_}; }

  std::vector<ProxyConnectEntry> connect_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return connects_;
  }

 private:
  void accept_loop() {
    while (running_) {
      pollfd pfd{listen_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, 100);
      if (rc <= 0) continue;
      const int client = ::accept(listen_fd_, nullptr, nullptr);
      if (client < 0) continue;
      std::lock_guard<std::mutex> lock(mu_);
      workers_.emplace_back([this, client] { handle_client(client); });
    }
  }

  void log_connect(ProxyConnectEntry entry) {
    std::lock_guard<std::mutex> lock(mu_);
    connects_.push_back(std::move(entry));
  }

  void handle_client(int client) {
    using testkitdetail::recv_exact;
    using testkitdetail::send_all;

    char head[2];
    if (!recv_exact(client, head, 2, running_)) {
      ::close(client);
      return;
    }
    const auto nmethods = static_cast<unsigned char>(head[1]);
    char methods[256];
    if (head[0] != 0x05 || nmethods == 0 ||
        !recv_exact(client, methods, nmethods, running_)) {
      log_connect({"", 0, false, "malformed greeting"});
      ::close(client);
      return;
    }
    bool no_auth = false;
    for (unsigned i = 0; i < nmethods; ++i) {
      if (methods[i] == 0x00) no_auth = true;
    }
    if (!no_auth) {
      send_all(client, "\x05\xFF", 2);
      log_connect({"", 0, false, "no acceptable auth method"});
      ::close(client);
      return;
    }
    if (!send_all(client, "\x05\x00", 2)) {
      ::close(client);
      return;
    }

    char req[4];
    if (!recv_exact(client, req, 4, running_)) {
      ::close(client);  // greeting-only probe: a clean close, not an error
      return;
    }
    if (req[0] != 0x05 || req[1] != 0x01) {
      send_all(client, "\x05\x07\x00\x01\x00\x00\x00\x00\x00\x00", 10);
      log_connect({"", 0, false, "unsupported command"});
      ::close(client);
      return;
    }
    if (req[3] != 0x03) {
      // The tool must always send ATYP 0x03 (domain name); anything else
      // means it resolved the name client-side and broke the socks5h contract.
      send_all(client, "\x05\x08\x00\x01\x00\x00\x00\x00\x00\x00", 10);
      log_connect({"", 0, false,
                   std::string("refused address type 0x0") + std::to_string(req[3])});
      ::close(client);
      return;
    }
    char len_byte;
    if (!recv_exact(client, &len_byte, 1, running_)) {
      ::close(client);
      return;
    }
    const auto host_len = static_cast<unsigned char>(len_byte);
    char host_buf[256];
    char port_buf[2];
    if (host_len == 0 || !recv_exact(client, host_buf, host_len, running_) ||
        !recv_exact(client, port_buf, 2, running_)) {
      log_connect({"", 0, false, "malformed connect request"});
      ::close(client);
      return;
    }
    const std::string host(host_buf, host_len);
    const int port = (static_cast<unsigned char>(port_buf[0]) << 8) |
                     static_cast<unsigned char>(port_buf[1]);

    const bool onion = is_onion_host(text::to_lower_ascii(host));
    int upstream = -1;
    try {
      upstream = onion ? net::connect_tcp(upstream_host_, upstream_port_,
                                          std::chrono::milliseconds(5000))
                       : net::connect_tcp(host, port, std::chrono::milliseconds(5000));
    } catch (const net::NetException&) {
      send_all(client, "\x05\x05\x00\x01\x00\x00\x00\x00\x00\x00", 10);
      log_connect({host, port, false, "upstream connect failed"});
      ::close(client);
      return;
    }
    if (!send_all(client, "\x05\x00\x00\x01\x00\x00\x00\x00\x00\x00", 10)) {
      ::close(client);
      ::close(upstream);
      return;
    }
    log_connect({host, port, true, ""});
    relay(client, upstream);
  }

  void relay(int a, int b) {
    while (running_) {
      pollfd fds[2] = {{a, POLLIN, 0}, {b, POLLIN, 0}};
      const int rc = ::poll(fds, 2, 100);
      if (rc < 0) break;
      if (rc == 0) continue;
      bool closed = false;
      for (int i = 0; i < 2; ++i) {
        if ((fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
        char buf[8192];
        const ssize_t n = ::recv(fds[i].fd, buf, sizeof(buf), 0);
        if (n <= 0) {
          closed = true;
          break;
        }
        if (!testkitdetail::send_all(i == 0 ? b : a, buf, static_cast<std::size_t>(n))) {
          closed = true;
          break;
        }
      }
      if (closed) break;
    }
    ::close(a);
    ::close(b);
  }

  std::string upstream_host_;
  int upstream_port_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  mutable std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<ProxyConnectEntry> connects_;
};

// Any 56 chars drawn from [a-z2-7] form a well-shaped v3 label.
inline std::string test_onion_host(char fill = 'a') {
  return std::string(56, fill) + ".onion";
}

inline constexpr const char* kScenario3Phrase =
    "Onion Links that share data leaks for FREE";
// Appears only in the 57 pages that carry real post content.
inline constexpr const char* kScenario3BodyTerm = "leaked database rows";
inline constexpr int kScenario3ThreadCount = 79;
inline constexpr int kScenario3ContentPages = 57;
inline constexpr int kScenario3FalsePositives = 22;

// A synthetic forum: one index linking 79 threads that all carry the
// scenario phrase. 57 threads have post bodies carrying the body term;
// 17 are title-only stubs and 5 are pagination duplicates of existing
// threads, neither of which has any post content.
inline FixtureCorpus build_scenario3_corpus() {
  FixtureCorpus corpus;
  std::vector<std::string> thread_paths;

  for (int i = 1; i <= kScenario3ContentPages; ++i) {
    const std::string path = "/thread/" + std::to_string(i);
    std::ostringstream body;
    body << "<html><head><title>Thread " << i << "</title></head><body>\n"
         << "<h1>" << kScenario3Phrase << "</h1>\n"
         << "<p>Post " << i << ": fresh " << kScenario3BodyTerm
         << " shared by member m" << i << ".</p>\n"
         << "<p>Mirror bundle " << i << " is still live.</p>\n"
         << "</body></html>\n";
    corpus.pages[path] = make_page(body.str());
    thread_paths.push_back(path);
  }
  for (int i = kScenario3ContentPages + 1; i <= 74; ++i) {
    const std::string path = "/thread/" + std::to_string(i);
    std::ostringstream body;
    body << "<html><head><title>Thread " << i << "</title></head><body>\n"
         << "<h1>" << kScenario3Phrase << "</h1>\n"
         << "<p>No posts yet.</p>\n"
         << "</body></html>\n";
    corpus.pages[path] = make_page(body.str());
    thread_paths.push_back(path);
  }
  for (int i = 1; i <= 5; ++i) {
    const std::string path = "/thread/" + std::to_string(i) + "/page/2";
    std::ostringstream body;
    body << "<html><head><title>Thread " << i << ", page 2</title></head><body>\n"
         << "<h1>" << kScenario3Phrase << "</h1>\n"
         << "<p>Page 2 of thread " << i << ". Nothing further was posted.</p>\n"
         << "</body></html>\n";
    corpus.pages[path] = make_page(body.str());
    thread_paths.push_back(path);
  }

  std::ostringstream index;
  index << "<html><head><title>Forum index</title></head><body>\n"
        << "<h1>Board index</h1>\n<ul>\n";
  for (std::size_t i = 0; i < thread_paths.size(); ++i) {
    index << "<li><a href=\"" << thread_paths[i] << "\">thread entry " << i + 1
          << "</a></li>\n";
  }
  index << "</ul>\n</body></html>\n";
  corpus.pages["/"] = make_page(index.str());
  return corpus;
}

// Ad-hoc corpora from a directory of files: each file is served under its
// relative path; robots.txt becomes the robots body; index.html doubles
// as the site root.
inline FixtureCorpus corpus_from_directory(const std::filesystem::path& dir) {
  FixtureCorpus corpus;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir).generic_string();
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    if (rel == "robots.txt") {
      corpus.robots = buf.str();
      continue;
    }
    const auto ext = entry.path().extension().string();
    std::string content_type = "application/octet-stream";
    if (ext == ".html" || ext == ".htm") content_type = "text/html";
    else if (ext == ".txt") content_type = "text/plain";
    corpus.pages["/" + rel] = make_page(buf.str(), content_type);
    if (rel == "index.html") corpus.pages["/"] = make_page(buf.str(), content_type);
  }
  return corpus;
}

}  // namespace reconwatch::testkit
