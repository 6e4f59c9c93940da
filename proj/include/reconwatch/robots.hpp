#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reconwatch/text.hpp"
#include "reconwatch/url.hpp"

namespace reconwatch {

enum class RobotsVerdict { allowed, denied };

// Agent token reconwatch announces and matches robots groups against.
inline constexpr const char* kRobotsAgentToken = "reconwatch";

// Parsed Robots Exclusion Protocol rules for one host. Supports
// User-agent groups, Allow/Disallow with * and $ patterns, and
// longest-pattern-match precedence (Allow wins length ties). Malformed
// lines are skipped; a missing or empty robots.txt allows everything.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view body,
                           std::string_view agent_token = kRobotsAgentToken) {
    RobotsRules rules;
    const std::string wanted = text::to_lower_ascii(agent_token);

    struct Group {
      std::vector<std::string> agents;
      std::vector<Rule> rules;
    };
    std::vector<Group> groups;
    bool in_agent_run = false;

    std::istringstream lines{std::string(body)};
    std::string line;
    while (std::getline(lines, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const std::size_t colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string field = text::to_lower_ascii(text::trim(line.substr(0, colon)));
      const std::string value = text::trim(line.substr(colon + 1));
      if (field == "user-agent") {
        if (!in_agent_run || groups.empty()) groups.emplace_back();
        groups.back().agents.push_back(text::to_lower_ascii(value));
        in_agent_run = true;
      } else if (field == "allow" || field == "disallow") {
        in_agent_run = false;
        if (groups.empty()) continue;  // rule before any user-agent line
        if (value.empty()) {
          if (field == "disallow") continue;  // "Disallow:" means allow all
        }
        groups.back().rules.push_back(Rule{value, field == "allow"});
      } else {
        // crawl-delay, sitemap, unknown fields: ignored
        in_agent_run = false;
      }
    }

    // Prefer the group naming our token; otherwise fall back to "*".
    const Group* chosen = nullptr;
    for (const auto& g : groups) {
      for (const auto& a : g.agents) {
        if (a == wanted) { chosen = &g; break; }
      }
      if (chosen) break;
    }
    if (!chosen) {
      for (const auto& g : groups) {
        if (std::find(g.agents.begin(), g.agents.end(), "*") != g.agents.end()) {
          chosen = &g;
          break;
        }
      }
    }
    if (chosen) rules.rules_ = chosen->rules;
    return rules;
  }

  RobotsVerdict check(std::string_view path_and_query) const {
    std::string target(path_and_query);
    if (target.empty() || target[0] != '/') target.insert(target.begin(), '/');
    std::size_t best_len = 0;
    bool best_allow = true;  // no rule matched -> allowed
    bool any = false;
    for (const auto& rule : rules_) {
      if (!pattern_matches(rule.pattern, target)) continue;
      if (!any || rule.pattern.size() > best_len ||
          (rule.pattern.size() == best_len && rule.allow && !best_allow)) {
        best_len = rule.pattern.size();
        best_allow = rule.allow;
        any = true;
      }
    }
    return best_allow ? RobotsVerdict::allowed : RobotsVerdict::denied;
  }

 private:
  struct Rule {
    std::string pattern;
    bool allow = false;
  };

  // Glob match anchored at the start: '*' spans any run, '$' anchors the end.
  static bool pattern_matches(std::string_view pattern, std::string_view target) {
    if (pattern.empty()) return true;
    bool anchored_end = false;
    if (pattern.back() == '$') {
      anchored_end = true;
      pattern.remove_suffix(1);
    }
    return match_from(pattern, target, anchored_end);
  }

  static bool match_from(std::string_view pat, std::string_view tgt, bool anchored) {
    std::size_t pi = 0, ti = 0;
    std::size_t star_pi = std::string_view::npos, star_ti = 0;
    while (ti < tgt.size()) {
      if (pi < pat.size() && (pat[pi] == tgt[ti])) {
        ++pi;
        ++ti;
      } else if (pi < pat.size() && pat[pi] == '*') {
        star_pi = pi++;
        star_ti = ti;
      } else if (star_pi != std::string_view::npos) {
        pi = star_pi + 1;
        ti = ++star_ti;
      } else {
        return false;
      }
      if (pi == pat.size() && !anchored) return true;  // prefix match
    }
    while (pi < pat.size() && pat[pi] == '*') ++pi;
    return pi == pat.size() && (!anchored || ti == tgt.size());
  }

  std::vector<Rule> rules_;
};

// One-shot check of a URL against the host's robots.txt body (empty string
// when the file was absent).
inline RobotsVerdict check_robots(const Url& url, std::string_view robots_body) {
  return RobotsRules::parse(robots_body).check(url.target());
}

}  // namespace reconwatch
