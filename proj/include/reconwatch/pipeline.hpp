#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reconwatch/correlate.hpp"
#include "reconwatch/fetch.hpp"
#include "reconwatch/history.hpp"
#include "reconwatch/match.hpp"
#include "reconwatch/report.hpp"
#include "reconwatch/summary.hpp"
#include "reconwatch/threat_db.hpp"

namespace reconwatch {

// Everything run_session needs beyond the search spec itself.
struct RuntimeConfig {
  std::filesystem::path home = ".";       // holds history.json and sessions/
  std::filesystem::path dat_dir = "dat";  // mitre.json + cve.json
  ProxyEndpoint proxy{};
  std::chrono::milliseconds per_host_delay{1000};
  int pool_size = 8;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds probe_timeout{5000};
  std::optional<std::filesystem::path> report_out;  // -o override
};

struct SessionOutcome {
  AnalysisSummary summary;
  std::optional<std::filesystem::path> report_path;
  std::vector<std::string> warnings;
};

inline std::filesystem::path history_path(const RuntimeConfig& config) {
  return config.home / "history.json";
}

inline std::filesystem::path session_dir(const RuntimeConfig& config,
                                         const std::string& session_id) {
  return config.home / "sessions" / session_id;
}

namespace pipedetail {

// One line per fetched page: URL, status or error kind, bytes, duration.
inline void write_pages_log(const std::vector<PageDocument>& documents,
                            const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / "pages.log";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write page log " + path.string());
  for (const auto& doc : documents) {
    const std::string label = doc.error
                                  ? std::string(to_string(doc.error->kind))
                                  : (doc.http_status ? std::to_string(*doc.http_status) : "-");
    out << doc.url << " " << label << " bytes=" << doc.bytes << " ms=" << doc.elapsed_ms
        << "\n";
  }
  if (!out.good()) throw DataError("failed writing page log " + path.string());
}

// Records the failed run, then surfaces it as a session error (exit code 2).
[[noreturn]] inline void abort_errored(const SearchSpec& spec, const RuntimeConfig& config,
                                       const std::string& message, int pages_scanned = 0,
                                       int pages_matched = 0) {
  HistoryRecord rec;
  rec.spec = spec;
  rec.outcome = SessionOutcomeKind::errored;
  rec.pages_scanned = pages_scanned;
  rec.pages_matched = pages_matched;
  try {
    append_history(rec, history_path(config));
  } catch (const DataError&) {
    // The original failure is the one worth reporting.
  }
  throw SessionError(message);
}

}  // namespace pipedetail

// End-to-end session: classify -> probe (dark targets only) -> crawl ->
// match -> correlate -> summary -> report -> history. Network-layer
// failures degrade into warnings; database and storage failures abort the
// session, which is still recorded in history as errored.
inline SessionOutcome run_session(const SearchSpec& spec, const RuntimeConfig& config) {
  SessionOutcome outcome;

  ThreatDatabase db;
  try {
    db = load_databases(config.dat_dir);
  } catch (const DataError& e) {
    pipedetail::abort_errored(spec, config, e.what());
  }

  Gateway gateway(config.proxy);
  bool any_dark = false;
  for (const auto& target : spec.targets) {
    const auto url = Url::parse(target);
    if (!url) continue;
    try {
      if (gateway.route_for(*url).network == NetworkClass::dark) any_dark = true;
    } catch (const InvalidOnionAddress&) {
      // Surfaces as a per-page error during the crawl.
    }
  }
  if (any_dark) {
    const ProbeResult probe = gateway.probe(config.probe_timeout);
    if (probe.status != ProbeStatus::reachable) {
      outcome.warnings.push_back("SOCKS5 proxy " + config.proxy.str() + " unreachable (" +
                                 probe.detail + "); onion targets will not be fetched");
    }
  }

  CrawlPlan plan;
  plan.seeds = spec.targets;
  plan.max_pages = spec.max_pages;
  plan.max_depth = spec.max_depth;
  plan.per_host_delay = config.per_host_delay;
  plan.pool_size = config.pool_size;
  plan.timeout = config.timeout;
  const std::vector<PageDocument> documents = fetch_all(plan, gateway);

  for (const auto& doc : documents) {
    if (doc.error) {
      outcome.warnings.push_back(doc.url + ": " + to_string(doc.error->kind) + ": " +
                                 doc.error->detail);
    }
  }

  std::vector<MatchRecord> satisfied;
  for (const auto& doc : documents) {
    if (!doc.ok()) continue;
    MatchRecord rec = match_page(doc.extracted_text, spec.keywords, spec.combine, doc.url);
    if (rec.satisfied) satisfied.push_back(std::move(rec));
  }

  std::vector<ThreatFinding> findings = correlate(satisfied, spec, db);

  int scanned = 0;
  for (const auto& doc : documents) {
    if (doc.ok()) ++scanned;
  }

  const auto dir = session_dir(config, spec.session_id);
  try {
    outcome.summary = build_summary(spec, documents, satisfied, std::move(findings));
    pipedetail::write_pages_log(documents, dir);
    write_summary(outcome.summary, dir);
  } catch (const DataError& e) {
    pipedetail::abort_errored(spec, config, e.what(), scanned,
                              static_cast<int>(satisfied.size()));
  }

  const std::filesystem::path report_path =
      config.report_out ? *config.report_out : default_report_path(spec.session_id, dir);
  try {
    outcome.report_path = render_report(outcome.summary, report_path);
  } catch (const DataError& e) {
    outcome.warnings.push_back(std::string("report rendering failed: ") + e.what());
  }

  HistoryRecord rec;
  rec.spec = spec;
  rec.outcome = SessionOutcomeKind::completed;
  rec.pages_scanned = outcome.summary.stats.pages_scanned;
  rec.pages_matched = outcome.summary.stats.pages_matched;
  if (outcome.report_path) rec.report_path = outcome.report_path->string();
  append_history(rec, history_path(config));

  return outcome;
}

}  // namespace reconwatch
