#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reconwatch/search_spec.hpp"

namespace reconwatch {

enum class SessionOutcomeKind { completed, aborted, errored };

inline const char* to_string(SessionOutcomeKind o) {
  switch (o) {
    case SessionOutcomeKind::completed: return "completed";
    case SessionOutcomeKind::aborted: return "aborted";
    default: return "errored";
  }
}

inline std::optional<SessionOutcomeKind> outcome_from(std::string_view s) {
  if (s == "completed") return SessionOutcomeKind::completed;
  if (s == "aborted") return SessionOutcomeKind::aborted;
  if (s == "errored") return SessionOutcomeKind::errored;
  return std::nullopt;
}

// One history.json entry. Stores the search configuration plus outcome
// metadata only, never scraped page content.
struct HistoryRecord {
  SearchSpec spec;
  SessionOutcomeKind outcome = SessionOutcomeKind::completed;
  int pages_scanned = 0;
  int pages_matched = 0;
  std::optional<std::string> report_path;

  bool operator==(const HistoryRecord&) const = default;
};

// history.json stores spec fields inline at the top level of each record.
inline ordered_json to_json(const HistoryRecord& rec) {
  ordered_json j = to_json(rec.spec);
  j["outcome"] = to_string(rec.outcome);
  j["pages_scanned"] = rec.pages_scanned;
  j["pages_matched"] = rec.pages_matched;
  j["report_path"] = rec.report_path ? ordered_json(*rec.report_path) : ordered_json(nullptr);
  return j;
}

inline HistoryRecord history_record_from_json(const ordered_json& j) {
  HistoryRecord rec;
  rec.spec = spec_from_json(j);
  const auto outcome = outcome_from(j.at("outcome").get<std::string>());
  if (!outcome) throw DataError("unknown history outcome: " + j.at("outcome").dump());
  rec.outcome = *outcome;
  rec.pages_scanned = j.at("pages_scanned").get<int>();
  rec.pages_matched = j.at("pages_matched").get<int>();
  if (j.contains("report_path") && !j.at("report_path").is_null()) {
    rec.report_path = j.at("report_path").get<std::string>();
  }
  return rec;
}

namespace detail {

inline ordered_json read_history_array(const std::filesystem::path& store_path) {
  std::error_code ec;
  if (!std::filesystem::exists(store_path, ec)) return ordered_json::array();
  std::ifstream in(store_path, std::ios::binary);
  if (!in) throw DataError("cannot read history store " + store_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ordered_json j = ordered_json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) {
    throw DataError("history store " + store_path.string() +
                    " is corrupt: expected a JSON array");
  }
  return j;
}

}  // namespace detail

inline std::vector<HistoryRecord> load_history(const std::filesystem::path& store_path) {
  std::vector<HistoryRecord> out;
  for (const auto& item : detail::read_history_array(store_path)) {
    out.push_back(history_record_from_json(item));
  }
  return out;
}

// Appends one record. The store stays a single valid JSON array; the write
// goes through a temp file and rename so a failure never corrupts the
// original. A corrupt existing store raises and leaves the file untouched.
inline void append_history(const HistoryRecord& record,
                           const std::filesystem::path& store_path) {
  ordered_json arr = detail::read_history_array(store_path);
  arr.push_back(to_json(record));

  const auto dir = store_path.has_parent_path() ? store_path.parent_path()
                                                : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto tmp = store_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write history store " + store_path.string());
    out << arr.dump(2) << "\n";
    if (!out.good()) throw DataError("failed writing history store " + store_path.string());
  }
  std::filesystem::rename(tmp, store_path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw DataError("failed to replace history store " + store_path.string() +
                    ": " + ec.message());
  }
}

}  // namespace reconwatch
