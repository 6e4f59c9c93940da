#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "reconwatch/common.hpp"
#include "reconwatch/gateway.hpp"
#include "reconwatch/html.hpp"
#include "reconwatch/http_client.hpp"
#include "reconwatch/rate_limit.hpp"
#include "reconwatch/robots.hpp"
#include "reconwatch/url.hpp"

namespace reconwatch {

enum class FetchErrorKind { timeout, transport, robots_denied, non_html, proxy };

inline const char* to_string(FetchErrorKind kind) {
  switch (kind) {
    case FetchErrorKind::timeout: return "timeout";
    case FetchErrorKind::transport: return "transport";
    case FetchErrorKind::robots_denied: return "robots_denied";
    case FetchErrorKind::non_html: return "non_html";
    default: return "proxy";
  }
}

struct PageError {
  FetchErrorKind kind = FetchErrorKind::transport;
  std::string detail;
};

struct PageDocument {
  std::string url;  // normalized
  std::optional<int> http_status;
  std::string extracted_text;
  std::vector<std::string> discovered_links;  // absolute, same host, normalized
  std::string fetched_at;
  std::optional<PageError> error;
  std::size_t bytes = 0;
  long elapsed_ms = 0;

  bool ok() const { return !error.has_value(); }
};

struct CrawlPlan {
  std::vector<std::string> seeds;
  int max_pages = 100;
  int max_depth = 2;
  std::chrono::milliseconds per_host_delay{1000};
  int pool_size = 8;
  std::chrono::milliseconds timeout{30000};
};

// Transport selection for the crawl: route lookup plus the fail-closed
// proxy state decided by the session probe.
class Gateway {
 public:
  explicit Gateway(ProxyEndpoint proxy = {}) : proxy_(std::move(proxy)) {}

  const ProxyEndpoint& proxy_endpoint() const { return proxy_; }
  TransportRoute route_for(const Url& url) const { return classify_target(url, proxy_); }

  ProbeResult probe(net::milliseconds timeout = net::milliseconds(5000)) {
    const ProbeResult result = probe_proxy(proxy_, timeout);
    proxy_available_ = result.status == ProbeStatus::reachable;
    return result;
  }

  void set_proxy_available(bool available) { proxy_available_ = available; }
  bool proxy_available() const { return proxy_available_; }

 private:
  ProxyEndpoint proxy_;
  bool proxy_available_ = false;
};

namespace fetchdetail {

// Cushion added onto per-host spacing so that loopback scheduling jitter
// can never compress observed gaps below the configured delay.
inline constexpr std::chrono::milliseconds kDelayMargin{3};

inline constexpr int kMaxRedirectHops = 5;

inline bool html_content_type(const std::string& content_type) {
  if (content_type.empty()) return true;  // assume HTML when unlabeled
  const std::string ct = text::to_lower_ascii(content_type);
  return ct.find("text/html") != std::string::npos ||
         ct.find("application/xhtml+xml") != std::string::npos;
}

class CrawlContext {
 public:
  CrawlContext(const CrawlPlan& plan, const Gateway& gateway)
      : plan_(plan), gateway_(gateway) {}

  PageDocument fetch_page(const Url& url) {
    const auto started = std::chrono::steady_clock::now();
    PageDocument doc = fetch_page_inner(url);
    doc.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    return doc;
  }

 private:
  PageDocument fetch_page_inner(const Url& url) {
    PageDocument doc;
    doc.url = normalize_url(url);
    doc.fetched_at = utc_now_string();

    TransportRoute route;
    try {
      route = gateway_.route_for(url);
    } catch (const InvalidOnionAddress& e) {
      doc.error = PageError{FetchErrorKind::transport, e.what()};
      return doc;
    }
    if (route.network == NetworkClass::dark && !gateway_.proxy_available()) {
      doc.error = PageError{FetchErrorKind::proxy,
                            "SOCKS5 proxy " + route.proxy->str() +
                                " unavailable; dark targets are never fetched directly"};
      return doc;
    }

    try {
      Url current = url;
      for (int hop = 0; hop <= kMaxRedirectHops; ++hop) {
        if (!robots_allows(current, route)) {
          doc.error = PageError{FetchErrorKind::robots_denied,
                                "robots.txt disallows " + current.target()};
          return doc;
        }
        pause_for_host(current.host);
        const HttpResponse resp = http_get(current, route, plan_.timeout);
        doc.http_status = resp.status;

        if (resp.status >= 300 && resp.status < 400) {
          const std::string location = resp.header("Location");
          if (location.empty()) {
            doc.error = PageError{FetchErrorKind::transport, "redirect without Location"};
            return doc;
          }
          const auto next = resolve_href(current, location);
          if (!next) {
            doc.error = PageError{FetchErrorKind::transport,
                                  "unresolvable redirect to " + location};
            return doc;
          }
          if (!next->same_host(url)) {
            doc.error = PageError{FetchErrorKind::transport,
                                  "cross-host redirect to " + next->str()};
            return doc;
          }
          current = *next;
          continue;
        }

        doc.bytes = resp.body.size();
        if (resp.status < 200 || resp.status >= 300) {
          doc.error = PageError{FetchErrorKind::transport,
                                "HTTP status " + std::to_string(resp.status)};
          return doc;
        }
        const std::string content_type = resp.header("Content-Type");
        if (!html_content_type(content_type)) {
          doc.error = PageError{FetchErrorKind::non_html,
                                "content-type " + content_type + " not parsed"};
          return doc;
        }

        const ExtractedHtml extracted = extract_text(resp.body);
        doc.extracted_text = extracted.text;
        std::set<std::string> seen;
        for (const auto& href : extracted.links) {
          const auto link = resolve_href(current, href);
          if (!link || !link->same_host(url)) continue;
          std::string normalized = normalize_url(*link);
          if (seen.insert(normalized).second) {
            doc.discovered_links.push_back(std::move(normalized));
          }
        }
        return doc;
      }
      doc.error = PageError{FetchErrorKind::transport, "too many redirects"};
    } catch (const net::NetException& e) {
      FetchErrorKind kind;
      switch (e.kind()) {
        case net::NetErrorKind::timeout: kind = FetchErrorKind::timeout; break;
        case net::NetErrorKind::proxy: kind = FetchErrorKind::proxy; break;
        default: kind = FetchErrorKind::transport; break;
      }
      doc.extracted_text.clear();
      doc.discovered_links.clear();
      doc.error = PageError{kind, e.what()};
    }
    return doc;
  }

  void pause_for_host(const std::string& host) {
    const auto wait = limiter_.rate_limit_wait(host, RateLimiter::Clock::now(),
                                               plan_.per_host_delay + kDelayMargin);
    if (wait.count() > 0) std::this_thread::sleep_for(wait);
  }

  struct HostEntry {
    std::mutex mu;
    std::optional<RobotsRules> robots;
  };

  // robots.txt is fetched at most once per origin per crawl, over the same
  // transport as the pages. Fetch failures fall back to allow-all.
  bool robots_allows(const Url& url, const TransportRoute& route) {
    std::shared_ptr<HostEntry> entry;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto& slot = hosts_[url.origin()];
      if (!slot) slot = std::make_shared<HostEntry>();
      entry = slot;
    }
    std::lock_guard<std::mutex> lock(entry->mu);
    if (!entry->robots) entry->robots = fetch_robots(url, route);
    return entry->robots->check(url.target()) == RobotsVerdict::allowed;
  }

  RobotsRules fetch_robots(const Url& url, const TransportRoute& route) {
    Url robots_url = url;
    robots_url.path = "/robots.txt";
    robots_url.query.clear();
    robots_url.fragment.clear();
    try {
      pause_for_host(robots_url.host);
      const HttpResponse resp = http_get(robots_url, route, plan_.timeout);
      if (resp.status == 200) return RobotsRules::parse(resp.body);
    } catch (const net::NetException&) {
      // Unreachable robots.txt: treated as absent.
    }
    return RobotsRules::parse("");
  }

  const CrawlPlan& plan_;
  const Gateway& gateway_;
  RateLimiter limiter_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<HostEntry>> hosts_;
};

}  // namespace fetchdetail

// Breadth-first crawl from the plan's seeds: same-host links only,
// deduplicated by normalized URL, bounded by max_pages and max_depth.
// Levels are fetched by a worker pool and the next level is admitted in
// sorted order, so the fetched set is identical for any pool size. The
// result list is sorted by normalized URL. Individual page failures are
// recorded in that page's error field and never abort the crawl.
inline std::vector<PageDocument> fetch_all(const CrawlPlan& plan, const Gateway& gateway) {
  fetchdetail::CrawlContext ctx(plan, gateway);

  struct Item {
    Url url;
    std::string normalized;
  };

  std::set<std::string> visited;
  std::vector<Item> level;
  std::vector<PageDocument> documents;
  const std::size_t budget =
      plan.max_pages < 0 ? 0 : static_cast<std::size_t>(plan.max_pages);

  for (const auto& seed : plan.seeds) {
    if (visited.size() >= budget) break;
    const auto url = Url::parse(seed);
    if (!url) {
      PageDocument doc;
      doc.url = seed;
      doc.fetched_at = utc_now_string();
      doc.error = PageError{FetchErrorKind::transport, "unparseable seed URL"};
      documents.push_back(std::move(doc));
      continue;
    }
    std::string normalized = normalize_url(*url);
    if (visited.insert(normalized).second) {
      level.push_back(Item{*url, std::move(normalized)});
    }
  }

  const int pool = std::max(1, plan.pool_size);
  for (int depth = 0; depth <= plan.max_depth && !level.empty(); ++depth) {
    std::vector<PageDocument> results(level.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= level.size()) return;
        results[i] = ctx.fetch_page(level[i].url);
      }
    };
    std::vector<std::thread> threads;
    const int spawn = static_cast<int>(std::min<std::size_t>(pool, level.size()));
    threads.reserve(spawn);
    for (int t = 0; t < spawn; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    // Admit the next level in sorted order so the crawl set is independent
    // of worker interleaving even when the page budget binds.
    std::set<std::string> candidates;
    for (auto& doc : results) {
      if (depth < plan.max_depth) {
        for (const auto& link : doc.discovered_links) {
          if (!visited.count(link)) candidates.insert(link);
        }
      }
      documents.push_back(std::move(doc));
    }
    level.clear();
    for (const auto& normalized : candidates) {
      if (visited.size() >= budget) break;
      const auto url = Url::parse(normalized);
      if (!url) continue;
      visited.insert(normalized);
      level.push_back(Item{*url, normalized});
    }
  }

  std::sort(documents.begin(), documents.end(),
            [](const PageDocument& a, const PageDocument& b) { return a.url < b.url; });
  return documents;
}

}  // namespace reconwatch
