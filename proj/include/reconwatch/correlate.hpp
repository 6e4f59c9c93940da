#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "reconwatch/match.hpp"
#include "reconwatch/search_spec.hpp"
#include "reconwatch/text.hpp"
#include "reconwatch/threat_db.hpp"

namespace reconwatch {

enum class FindingSource { mitre, cve };

inline const char* to_string(FindingSource s) {
  return s == FindingSource::mitre ? "mitre" : "cve";
}

struct EvidenceRef {
  std::string url;
  std::string value;

  bool operator==(const EvidenceRef&) const = default;
  bool operator<(const EvidenceRef& other) const {
    return url != other.url ? url < other.url : value < other.value;
  }
};

struct ThreatFinding {
  FindingSource source = FindingSource::mitre;
  std::string id;
  std::string name;
  Trigger matched_trigger;
  std::vector<EvidenceRef> evidence;
  std::vector<std::string> mitigations;

  bool operator==(const ThreatFinding&) const = default;
};

namespace correlatedetail {

// Evidence pairs a single trigger collects from one satisfied record.
// Kind rule: the trigger's kind equals the kind of a matched keyword.
// Term rule: the folded term occurs in a matched value or snippet context.
inline std::set<EvidenceRef> trigger_evidence(const Trigger& trigger,
                                              const MatchRecord& record,
                                              const std::vector<TypedKeyword>& keywords) {
  std::set<EvidenceRef> evidence;
  if (trigger.kind) {
    for (const auto& value : record.matched_values) {
      const bool kind_matches =
          std::any_of(keywords.begin(), keywords.end(), [&](const TypedKeyword& kw) {
            return kw.value == value && kw.kind == *trigger.kind;
          });
      if (kind_matches) evidence.insert(EvidenceRef{record.url, value});
    }
  }
  if (trigger.term) {
    for (const auto& value : record.matched_values) {
      if (text::fold_utf8(value).find(*trigger.term) != std::string::npos) {
        evidence.insert(EvidenceRef{record.url, value});
      }
    }
    for (const auto& snippet : record.snippets) {
      if (text::fold_utf8(snippet.context).find(*trigger.term) != std::string::npos) {
        evidence.insert(EvidenceRef{record.url, snippet.value});
      }
    }
  }
  return evidence;
}

}  // namespace correlatedetail

// Correlates satisfied matches against the loaded databases. Each database
// entry yields at most one finding: the first trigger (in entry order) that
// fires anywhere, with evidence aggregated across every satisfied record
// and deduplicated. Findings are sorted by source then id; output is
// stable under permutation of the input match list.
inline std::vector<ThreatFinding> correlate(const std::vector<MatchRecord>& matches,
                                            const SearchSpec& spec,
                                            const ThreatDatabase& db) {
  std::vector<ThreatFinding> findings;

  const auto evaluate = [&](const std::vector<Trigger>& triggers, FindingSource source,
                            const std::string& id, const std::string& name,
                            const std::vector<std::string>& mitigations) {
    for (const auto& trigger : triggers) {
      std::set<EvidenceRef> evidence;
      for (const auto& record : matches) {
        if (!record.satisfied) continue;
        const auto found = correlatedetail::trigger_evidence(trigger, record, spec.keywords);
        evidence.insert(found.begin(), found.end());
      }
      if (evidence.empty()) continue;
      ThreatFinding finding;
      finding.source = source;
      finding.id = id;
      finding.name = name;
      finding.matched_trigger = trigger;
      finding.evidence.assign(evidence.begin(), evidence.end());
      finding.mitigations = mitigations;
      findings.push_back(std::move(finding));
      return;  // one finding per database entry
    }
  };

  for (const auto& tech : db.techniques) {
    evaluate(tech.triggers, FindingSource::mitre, tech.technique_id, tech.name,
             tech.mitigations);
  }
  for (const auto& cve : db.cves) {
    evaluate(cve.triggers, FindingSource::cve, cve.cve_id, cve.cve_id, {});
  }

  std::sort(findings.begin(), findings.end(),
            [](const ThreatFinding& a, const ThreatFinding& b) {
              if (a.source != b.source) return a.source < b.source;
              return a.id < b.id;
            });
  return findings;
}

inline ordered_json to_json(const Trigger& t) {
  ordered_json j;
  j["kind"] = t.kind ? ordered_json(to_string(*t.kind)) : ordered_json(nullptr);
  j["term"] = t.term ? ordered_json(*t.term) : ordered_json(nullptr);
  return j;
}

inline Trigger trigger_from_json(const ordered_json& j) {
  Trigger t;
  if (j.contains("kind") && !j.at("kind").is_null()) {
    const auto kind = keyword_kind_from(j.at("kind").get<std::string>());
    if (!kind) throw DataError("unknown trigger kind: " + j.at("kind").dump());
    t.kind = *kind;
  }
  if (j.contains("term") && !j.at("term").is_null()) {
    t.term = j.at("term").get<std::string>();
  }
  return t;
}

inline ordered_json to_json(const ThreatFinding& f) {
  ordered_json evidence = ordered_json::array();
  for (const auto& e : f.evidence) {
    evidence.push_back(ordered_json{{"url", e.url}, {"value", e.value}});
  }
  return ordered_json{{"source", to_string(f.source)},
                      {"id", f.id},
                      {"name", f.name},
                      {"matched_trigger", to_json(f.matched_trigger)},
                      {"evidence", evidence},
                      {"mitigations", f.mitigations}};
}

inline ThreatFinding finding_from_json(const ordered_json& j) {
  ThreatFinding f;
  const std::string source = j.at("source").get<std::string>();
  if (source == "mitre") {
    f.source = FindingSource::mitre;
  } else if (source == "cve") {
    f.source = FindingSource::cve;
  } else {
    throw DataError("unknown finding source: " + source);
  }
  f.id = j.at("id").get<std::string>();
  f.name = j.at("name").get<std::string>();
  f.matched_trigger = trigger_from_json(j.at("matched_trigger"));
  for (const auto& e : j.at("evidence")) {
    f.evidence.push_back(
        EvidenceRef{e.at("url").get<std::string>(), e.at("value").get<std::string>()});
  }
  f.mitigations = j.at("mitigations").get<std::vector<std::string>>();
  return f;
}

}  // namespace reconwatch
