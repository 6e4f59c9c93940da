#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reconwatch/common.hpp"
#include "reconwatch/search_spec.hpp"
#include "reconwatch/text.hpp"

namespace reconwatch {

// A rule attaching a database entry to scan results: fires on keyword kind
// or on a case-folded term, at least one of which must be set.
struct Trigger {
  std::optional<KeywordKind> kind;
  std::optional<std::string> term;

  bool operator==(const Trigger&) const = default;
};

struct MitreTechnique {
  std::string technique_id;  // T####  or T####.###
  std::string tactic_id;     // TA####
  std::string name;
  std::string description;
  std::vector<Trigger> triggers;
  std::vector<std::string> mitigations;
};

struct CveEntry {
  std::string cve_id;  // CVE-####-####+
  std::string description;
  double severity = 0.0;  // CVSS-style score in [0, 10]
  std::vector<Trigger> triggers;
};

struct ThreatDatabase {
  std::vector<MitreTechnique> techniques;
  std::vector<CveEntry> cves;
};

class MissingDatabase : public DataError {
 public:
  using DataError::DataError;
};

namespace threatdetail {

inline const std::regex& technique_id_pattern() {
  static const std::regex re(R"(T\d{4}(\.\d{3})?)");
  return re;
}

inline const std::regex& tactic_id_pattern() {
  static const std::regex re(R"(TA\d{4})");
  return re;
}

inline const std::regex& cve_id_pattern() {
  static const std::regex re(R"(CVE-\d{4}-\d{4,})");
  return re;
}

inline DataError schema_error(const std::string& file, std::size_t index,
                              const std::string& field, const std::string& why) {
  std::ostringstream msg;
  msg << file << ": entry " << index << ", field \"" << field << "\": " << why;
  return DataError(msg.str());
}

inline nlohmann::json load_json_array(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    throw MissingDatabase("missing database file " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read database file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) {
    throw DataError(path.string() + ": expected a JSON array of entries");
  }
  return j;
}

inline std::vector<Trigger> parse_triggers(const nlohmann::json& entry,
                                           const std::string& file, std::size_t index) {
  if (!entry.contains("triggers") || !entry["triggers"].is_array() ||
      entry["triggers"].empty()) {
    throw schema_error(file, index, "triggers", "must be a non-empty array");
  }
  std::vector<Trigger> out;
  for (const auto& t : entry["triggers"]) {
    Trigger trig;
    if (t.contains("kind") && !t["kind"].is_null()) {
      const auto kind = keyword_kind_from(t["kind"].get<std::string>());
      if (!kind) {
        throw schema_error(file, index, "triggers.kind",
                           "expected one of name/email/text, got " + t["kind"].dump());
      }
      trig.kind = *kind;
    }
    if (t.contains("term") && !t["term"].is_null()) {
      const std::string term = text::trim(t["term"].get<std::string>());
      if (term.empty()) throw schema_error(file, index, "triggers.term", "must be non-empty");
      trig.term = text::fold_utf8(term);
    }
    if (!trig.kind && !trig.term) {
      throw schema_error(file, index, "triggers", "each trigger needs a kind or a term");
    }
    out.push_back(std::move(trig));
  }
  return out;
}

inline std::string require_string(const nlohmann::json& entry, const char* field,
                                  const std::string& file, std::size_t index) {
  if (!entry.contains(field) || !entry[field].is_string()) {
    throw schema_error(file, index, field, "required string field");
  }
  return entry[field].get<std::string>();
}

}  // namespace threatdetail

// Loads and validates dat/mitre.json and dat/cve.json. Both files must
// exist, parse, and satisfy every schema invariant; duplicate ids are
// rejected. Trigger terms are stored case-folded.
inline ThreatDatabase load_databases(const std::filesystem::path& dir) {
  using namespace threatdetail;
  ThreatDatabase db;

  const auto mitre_path = dir / "mitre.json";
  const nlohmann::json mitre = load_json_array(mitre_path);
  std::set<std::string> seen_ids;
  const std::string mitre_file = mitre_path.string();
  for (std::size_t i = 0; i < mitre.size(); ++i) {
    const auto& entry = mitre[i];
    MitreTechnique tech;
    tech.technique_id = require_string(entry, "technique_id", mitre_file, i);
    if (!std::regex_match(tech.technique_id, technique_id_pattern())) {
      throw schema_error(mitre_file, i, "technique_id",
                         "\"" + tech.technique_id + R"(" does not match T\d{4}(\.\d{3})?)");
    }
    tech.tactic_id = require_string(entry, "tactic_id", mitre_file, i);
    if (!std::regex_match(tech.tactic_id, tactic_id_pattern())) {
      throw schema_error(mitre_file, i, "tactic_id",
                         "\"" + tech.tactic_id + R"(" does not match TA\d{4})");
    }
    tech.name = require_string(entry, "name", mitre_file, i);
    tech.description = require_string(entry, "description", mitre_file, i);
    tech.triggers = parse_triggers(entry, mitre_file, i);
    if (entry.contains("mitigations")) {
      if (!entry["mitigations"].is_array()) {
        throw schema_error(mitre_file, i, "mitigations", "must be an array of strings");
      }
      for (const auto& m : entry["mitigations"]) tech.mitigations.push_back(m.get<std::string>());
    }
    if (!seen_ids.insert(tech.technique_id).second) {
      throw schema_error(mitre_file, i, "technique_id",
                         "duplicate id " + tech.technique_id);
    }
    db.techniques.push_back(std::move(tech));
  }

  const auto cve_path = dir / "cve.json";
  const nlohmann::json cves = load_json_array(cve_path);
  std::set<std::string> seen_cves;
  const std::string cve_file = cve_path.string();
  for (std::size_t i = 0; i < cves.size(); ++i) {
    const auto& entry = cves[i];
    CveEntry cve;
    cve.cve_id = require_string(entry, "cve_id", cve_file, i);
    if (!std::regex_match(cve.cve_id, cve_id_pattern())) {
      throw schema_error(cve_file, i, "cve_id",
                         "\"" + cve.cve_id + R"(" does not match CVE-\d{4}-\d{4,})");
    }
    cve.description = require_string(entry, "description", cve_file, i);
    if (!entry.contains("severity") || !entry["severity"].is_number()) {
      throw schema_error(cve_file, i, "severity", "required number field");
    }
    cve.severity = entry["severity"].get<double>();
    if (cve.severity < 0.0 || cve.severity > 10.0) {
      throw schema_error(cve_file, i, "severity", "must be within [0.0, 10.0]");
    }
    cve.triggers = parse_triggers(entry, cve_file, i);
    if (!seen_cves.insert(cve.cve_id).second) {
      throw schema_error(cve_file, i, "cve_id", "duplicate id " + cve.cve_id);
    }
    db.cves.push_back(std::move(cve));
  }

  return db;
}

}  // namespace reconwatch
