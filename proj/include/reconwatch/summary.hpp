#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reconwatch/correlate.hpp"
#include "reconwatch/fetch.hpp"
#include "reconwatch/match.hpp"
#include "reconwatch/search_spec.hpp"

namespace reconwatch {

inline constexpr const char* kAnalysisFileName = "temp_analysis.json";

struct SessionStats {
  int pages_scanned = 0;
  int pages_matched = 0;
  int pages_errored = 0;

  bool operator==(const SessionStats&) const = default;
};

// Session-level roll-up serialized as temp_analysis.json and rendered to
// the PDF report. Holds satisfied matches only.
struct AnalysisSummary {
  SearchSpec spec;
  std::vector<MatchRecord> matches;
  std::vector<ThreatFinding> findings;
  SessionStats stats;
  std::string generated_at;

  bool operator==(const AnalysisSummary&) const = default;
};

// Assembles the summary and verifies internal consistency: every match URL
// must come from this session's documents, and stats are derived from the
// documents (scanned = fetched without error).
inline AnalysisSummary build_summary(const SearchSpec& spec,
                                     const std::vector<PageDocument>& documents,
                                     const std::vector<MatchRecord>& satisfied_matches,
                                     std::vector<ThreatFinding> findings,
                                     std::string generated_at = utc_now_string()) {
  std::set<std::string> urls;
  for (const auto& doc : documents) urls.insert(doc.url);
  for (const auto& match : satisfied_matches) {
    if (!match.satisfied) {
      throw DataError("summary accepts satisfied matches only (url " + match.url + ")");
    }
    if (!urls.count(match.url)) {
      throw DataError("inconsistent session inputs: match for " + match.url +
                      " has no fetched document");
    }
  }

  AnalysisSummary summary;
  summary.spec = spec;
  summary.matches = satisfied_matches;
  summary.findings = std::move(findings);
  for (const auto& doc : documents) {
    if (doc.ok()) {
      ++summary.stats.pages_scanned;
    } else {
      ++summary.stats.pages_errored;
    }
  }
  summary.stats.pages_matched = static_cast<int>(satisfied_matches.size());
  summary.generated_at = std::move(generated_at);
  return summary;
}

inline ordered_json to_json(const AnalysisSummary& s) {
  ordered_json matches = ordered_json::array();
  for (const auto& m : s.matches) matches.push_back(to_json(m));
  ordered_json findings = ordered_json::array();
  for (const auto& f : s.findings) findings.push_back(to_json(f));
  return ordered_json{
      {"spec", to_json(s.spec)},
      {"matches", matches},
      {"findings", findings},
      {"stats",
       ordered_json{{"pages_scanned", s.stats.pages_scanned},
                    {"pages_matched", s.stats.pages_matched},
                    {"pages_errored", s.stats.pages_errored}}},
      {"generated_at", s.generated_at},
  };
}

inline AnalysisSummary summary_from_json(const ordered_json& j) {
  AnalysisSummary s;
  s.spec = spec_from_json(j.at("spec"));
  for (const auto& m : j.at("matches")) s.matches.push_back(match_record_from_json(m));
  for (const auto& f : j.at("findings")) s.findings.push_back(finding_from_json(f));
  const auto& stats = j.at("stats");
  s.stats.pages_scanned = stats.at("pages_scanned").get<int>();
  s.stats.pages_matched = stats.at("pages_matched").get<int>();
  s.stats.pages_errored = stats.at("pages_errored").get<int>();
  s.generated_at = j.at("generated_at").get<std::string>();
  return s;
}

// Writes <session-dir>/temp_analysis.json with stable key order.
inline std::filesystem::path write_summary(const AnalysisSummary& summary,
                                           const std::filesystem::path& session_dir) {
  std::error_code ec;
  std::filesystem::create_directories(session_dir, ec);
  const auto path = session_dir / kAnalysisFileName;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write analysis summary to " + path.string());
  out << to_json(summary).dump(2) << "\n";
  if (!out.good()) throw DataError("failed writing analysis summary to " + path.string());
  return path;
}

inline AnalysisSummary read_summary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read analysis summary " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const ordered_json j = ordered_json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError("analysis summary " + path.string() + " is not valid JSON");
  return summary_from_json(j);
}

}  // namespace reconwatch
