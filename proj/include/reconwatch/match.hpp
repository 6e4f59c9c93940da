#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "reconwatch/common.hpp"
#include "reconwatch/search_spec.hpp"
#include "reconwatch/text.hpp"

namespace reconwatch {

struct Snippet {
  std::string value;
  std::string context;

  bool operator==(const Snippet&) const = default;
};

struct MatchRecord {
  std::string url;
  bool satisfied = false;
  std::vector<std::string> matched_values;
  std::vector<Snippet> snippets;

  bool operator==(const MatchRecord&) const = default;
};

inline constexpr std::size_t kSnippetRadius = 80;

namespace detail {

// Returns the code point index of the first occurrence, or npos.
inline std::size_t find_folded(const std::u32string& haystack,
                               const std::u32string& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::u32string::npos;
  const auto it = std::search(haystack.begin(), haystack.end(),
                              needle.begin(), needle.end());
  return it == haystack.end() ? std::u32string::npos
                              : static_cast<std::size_t>(it - haystack.begin());
}

inline std::string snippet_around(const std::u32string& display, std::size_t begin,
                                  std::size_t len, std::size_t radius) {
  const std::size_t from = begin > radius ? begin - radius : 0;
  const std::size_t to = std::min(display.size(), begin + len + radius);
  std::string out;
  if (from > 0) text::append_utf8(out, U'…');
  out += text::encode_utf8(std::u32string_view(display).substr(from, to - from));
  if (to < display.size()) text::append_utf8(out, U'…');
  return out;
}

}  // namespace detail

// Exact-match boolean evaluation: a keyword matches when its value occurs
// as a case-folded substring of the case-folded page text, whitespace runs
// collapsed on both sides. Only the first occurrence per keyword yields a
// snippet. Deterministic; empty text is valid and never satisfies.
inline MatchRecord match_page(std::string_view page_text,
                              const std::vector<TypedKeyword>& keywords,
                              CombineMode combine, std::string url = "") {
  MatchRecord rec;
  rec.url = std::move(url);
  const text::NormalizedText norm = text::normalize_for_match(page_text);
  for (const auto& kw : keywords) {
    const text::NormalizedText kw_norm = text::normalize_for_match(kw.value);
    if (kw_norm.folded.empty()) continue;
    const std::size_t pos = detail::find_folded(norm.folded, kw_norm.folded);
    if (pos == std::u32string::npos) continue;
    rec.matched_values.push_back(kw.value);
    rec.snippets.push_back(Snippet{
        kw.value,
        detail::snippet_around(norm.display, pos, kw_norm.folded.size(), kSnippetRadius)});
  }
  if (keywords.empty()) {
    rec.satisfied = false;
  } else if (combine == CombineMode::AND) {
    rec.satisfied = rec.matched_values.size() == keywords.size();
  } else {
    rec.satisfied = !rec.matched_values.empty();
  }
  return rec;
}

// Context around the first case-folded occurrence of `value`, up to
// `radius` code points on each side, with ellipsis markers when truncated.
// Throws DataError when the value does not occur.
inline std::string extract_snippet(std::string_view page_text, std::string_view value,
                                   std::size_t radius = kSnippetRadius) {
  const text::NormalizedText norm = text::normalize_for_match(page_text);
  const text::NormalizedText needle = text::normalize_for_match(value);
  const std::size_t pos = detail::find_folded(norm.folded, needle.folded);
  if (needle.folded.empty() || pos == std::u32string::npos) {
    throw DataError("no occurrence of \"" + std::string(value) + "\" in text");
  }
  return detail::snippet_around(norm.display, pos, needle.folded.size(), radius);
}

inline ordered_json to_json(const Snippet& s) {
  return ordered_json{{"value", s.value}, {"context", s.context}};
}

inline ordered_json to_json(const MatchRecord& rec) {
  ordered_json snippets = ordered_json::array();
  for (const auto& s : rec.snippets) snippets.push_back(to_json(s));
  return ordered_json{{"url", rec.url},
                      {"satisfied", rec.satisfied},
                      {"matched_values", rec.matched_values},
                      {"snippets", snippets}};
}

inline MatchRecord match_record_from_json(const ordered_json& j) {
  MatchRecord rec;
  rec.url = j.at("url").get<std::string>();
  rec.satisfied = j.at("satisfied").get<bool>();
  rec.matched_values = j.at("matched_values").get<std::vector<std::string>>();
  for (const auto& s : j.at("snippets")) {
    rec.snippets.push_back(
        Snippet{s.at("value").get<std::string>(), s.at("context").get<std::string>()});
  }
  return rec;
}

}  // namespace reconwatch
