#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "reconwatch/text.hpp"

namespace reconwatch {

struct ExtractedHtml {
  std::string text;
  std::vector<std::string> links;
};

namespace htmldetail {

inline const std::unordered_set<std::string>& block_tags() {
  static const std::unordered_set<std::string> tags = {
      "address", "article", "aside",   "blockquote", "body",    "br",
      "caption", "dd",      "details", "div",        "dl",      "dt",
      "fieldset", "figcaption", "figure", "footer",  "form",    "h1",
      "h2",      "h3",      "h4",      "h5",         "h6",      "head",
      "header",  "hr",      "html",    "li",         "main",    "nav",
      "ol",      "option",  "p",       "pre",        "section", "select",
      "summary", "table",   "tbody",   "td",         "tfoot",   "th",
      "thead",   "title",   "tr",      "ul"};
  return tags;
}

// Content of these elements is never visible text.
inline bool is_raw_skip_tag(const std::string& tag) {
  return tag == "script" || tag == "style" || tag == "template" || tag == "noscript";
}

inline std::string decode_entities(std::string_view s) {
  static const std::unordered_map<std::string, const char*> named = {
      {"amp", "&"},  {"lt", "<"},    {"gt", ">"},   {"quot", "\""},
      {"apos", "'"}, {"nbsp", " "}, {"copy", "©"}, {"mdash", "—"},
      {"ndash", "–"}, {"hellip", "…"}, {"rsquo", "’"}, {"lsquo", "‘"}};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      char32_t cp = 0;
      bool ok = name.size() > 1;
      if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
        for (std::size_t k = 2; k < name.size() && ok; ++k) {
          const char c = name[k];
          int digit;
          if (c >= '0' && c <= '9') digit = c - '0';
          else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
          else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
          else { ok = false; break; }
          cp = cp * 16 + digit;
        }
      } else {
        for (std::size_t k = 1; k < name.size() && ok; ++k) {
          if (name[k] < '0' || name[k] > '9') { ok = false; break; }
          cp = cp * 10 + (name[k] - '0');
        }
      }
      if (ok && cp > 0 && cp <= 0x10FFFF) {
        text::append_utf8(out, cp);
        i = semi + 1;
        continue;
      }
    } else {
      const auto it = named.find(text::to_lower_ascii(name));
      if (it != named.end()) {
        out += it->second;
        i = semi + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

struct Attr {
  std::string name;
  std::string value;
};

inline std::vector<Attr> parse_attrs(std::string_view s) {
  std::vector<Attr> attrs;
  std::size_t i = 0;
  const auto skip_ws = [&] {
    while (i < s.size() && text::is_ascii_space(s[i])) ++i;
  };
  while (i < s.size()) {
    skip_ws();
    if (i >= s.size() || s[i] == '/') break;
    Attr attr;
    while (i < s.size() && !text::is_ascii_space(s[i]) && s[i] != '=' && s[i] != '/') {
      attr.name += static_cast<char>(
          s[i] >= 'A' && s[i] <= 'Z' ? s[i] + 0x20 : s[i]);
      ++i;
    }
    if (attr.name.empty()) { ++i; continue; }
    skip_ws();
    if (i < s.size() && s[i] == '=') {
      ++i;
      skip_ws();
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        const char quote = s[i++];
        const std::size_t end = s.find(quote, i);
        attr.value = std::string(s.substr(i, end == std::string_view::npos ? s.size() - i
                                                                           : end - i));
        i = end == std::string_view::npos ? s.size() : end + 1;
      } else {
        while (i < s.size() && !text::is_ascii_space(s[i]) && s[i] != '/') {
          attr.value += s[i++];
        }
      }
    }
    attrs.push_back(std::move(attr));
  }
  return attrs;
}

}  // namespace htmldetail

// Best-effort visible-text extraction over possibly malformed HTML.
// script/style/template/comment content is dropped, block elements become
// single newlines, whitespace runs collapse to one space. Anchor hrefs are
// collected verbatim in document order (first occurrence wins).
inline ExtractedHtml extract_text(std::string_view html) {
  ExtractedHtml out;
  std::string& textbuf = out.text;
  std::unordered_set<std::string> seen_links;

  bool pending_space = false;
  bool pending_newline = false;
  const auto emit_text = [&](std::string_view raw) {
    const std::string decoded = htmldetail::decode_entities(raw);
    for (char32_t cp : text::decode_utf8(decoded)) {
      if (text::is_space(cp)) {
        if (!textbuf.empty() && !pending_newline) pending_space = true;
        continue;
      }
      if (pending_newline) {
        textbuf += '\n';
        pending_newline = false;
        pending_space = false;
      } else if (pending_space) {
        textbuf += ' ';
        pending_space = false;
      }
      text::append_utf8(textbuf, cp);
    }
  };
  const auto block_break = [&] {
    if (!textbuf.empty()) pending_newline = true;
    pending_space = false;
  };

  std::size_t i = 0;
  const std::size_t n = html.size();
  while (i < n) {
    if (html[i] != '<') {
      const std::size_t next = html.find('<', i);
      emit_text(html.substr(i, next == std::string_view::npos ? n - i : next - i));
      i = next == std::string_view::npos ? n : next;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (i + 1 < n && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const std::size_t end = html.find('>', i);
      i = end == std::string_view::npos ? n : end + 1;
      continue;
    }
    const std::size_t end = html.find('>', i);
    if (end == std::string_view::npos) {
      emit_text(html.substr(i));
      break;
    }
    std::string_view tag_body = html.substr(i + 1, end - i - 1);
    bool closing = false;
    if (!tag_body.empty() && tag_body[0] == '/') {
      closing = true;
      tag_body = tag_body.substr(1);
    }
    std::string tag;
    std::size_t k = 0;
    while (k < tag_body.size() && !text::is_ascii_space(tag_body[k]) &&
           tag_body[k] != '/' && tag_body[k] != '>') {
      tag += static_cast<char>(tag_body[k] >= 'A' && tag_body[k] <= 'Z'
                                   ? tag_body[k] + 0x20
                                   : tag_body[k]);
      ++k;
    }
    i = end + 1;
    if (tag.empty()) continue;

    if (!closing && htmldetail::is_raw_skip_tag(tag)) {
      // Skip to the matching close tag, case-insensitive.
      const std::string close = "</" + tag;
      const std::string lowered = text::to_lower_ascii(html.substr(i));
      const std::size_t rel = lowered.find(close);
      if (rel == std::string::npos) break;
      const std::size_t close_end = html.find('>', i + rel);
      i = close_end == std::string_view::npos ? n : close_end + 1;
      block_break();
      continue;
    }
    if (!closing && tag == "a") {
      for (const auto& attr : htmldetail::parse_attrs(tag_body.substr(k))) {
        if (attr.name == "href" && !attr.value.empty()) {
          const std::string href = htmldetail::decode_entities(attr.value);
          if (seen_links.insert(href).second) out.links.push_back(href);
          break;
        }
      }
    }
    if (htmldetail::block_tags().count(tag)) block_break();
  }
  return out;
}

}  // namespace reconwatch
