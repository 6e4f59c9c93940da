#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "reconwatch/pdf.hpp"
#include "reconwatch/summary.hpp"

namespace reconwatch {

inline constexpr const char* kReportTitle = "reconwatch Threat Analysis Report";
inline constexpr const char* kHeadingConfig = "Search configuration summary";
inline constexpr const char* kHeadingKeywords = "Detected keywords";
inline constexpr const char* kHeadingThreats = "Associated CVEs and MITRE techniques";
inline constexpr const char* kHeadingMitigations = "Suggested mitigations";
inline constexpr const char* kEmptySectionText = "none found";

// Snippets are clipped to this many code points in the report body.
inline constexpr std::size_t kReportSnippetLimit = 200;

enum class BlockKind { paragraph, subhead, bullet, mono };

struct ReportBlock {
  BlockKind kind = BlockKind::paragraph;
  std::string text;
  int indent = 0;
};

struct ReportSection {
  std::string heading;
  std::vector<ReportBlock> blocks;
};

struct ReportLayout {
  std::string title;
  std::vector<ReportSection> sections;
  std::string footer;
};

namespace reportdetail {

inline std::string clip_snippet(const std::string& s,
                                std::size_t limit = kReportSnippetLimit) {
  const std::u32string cps = text::decode_utf8(s);
  if (cps.size() <= limit) return s;
  std::string out = text::encode_utf8(cps.substr(0, limit));
  text::append_utf8(out, U'…');
  return out;
}

// Word wrap on spaces; words longer than the budget are hard-broken so no
// input can force an overlong line.
inline std::vector<std::string> wrap_words(const std::string& utf8, std::size_t cols) {
  if (cols == 0) cols = 1;
  std::vector<std::string> lines;
  std::u32string current;
  std::u32string word;
  const auto flush_word = [&] {
    if (word.empty()) return;
    if (!current.empty() && current.size() + 1 + word.size() <= cols) {
      current += U' ';
      current += word;
      word.clear();
      return;
    }
    if (!current.empty()) {
      lines.push_back(text::encode_utf8(current));
      current.clear();
    }
    while (word.size() > cols) {
      lines.push_back(text::encode_utf8(word.substr(0, cols)));
      word.erase(0, cols);
    }
    current = word;
    word.clear();
  };
  for (char32_t c : text::decode_utf8(utf8)) {
    if (c == U' ' || c == U'\n' || c == U'\t' || c == U'\r') {
      flush_word();
    } else {
      word.push_back(c);
    }
  }
  flush_word();
  if (!current.empty()) lines.push_back(text::encode_utf8(current));
  if (lines.empty()) lines.emplace_back();
  return lines;
}

// Fixed-pitch wrap for URLs: continued lines end with a backslash marker so
// a text-extraction pass can stitch the original string back together.
// Never truncates.
inline std::vector<std::string> wrap_mono(const std::string& utf8, std::size_t cols) {
  if (cols < 2) cols = 2;
  std::vector<std::string> lines;
  const std::u32string cps = text::decode_utf8(utf8);
  std::size_t pos = 0;
  while (cps.size() - pos > cols) {
    std::u32string chunk = cps.substr(pos, cols - 1);
    chunk.push_back(U'\\');
    lines.push_back(text::encode_utf8(chunk));
    pos += cols - 1;
  }
  lines.push_back(text::encode_utf8(cps.substr(pos)));
  return lines;
}

inline std::string keyword_label(const SearchSpec& spec, const std::string& value) {
  for (const auto& kw : spec.keywords) {
    if (kw.value == value) return std::string(to_string(kw.kind)) + " = " + value;
  }
  return value;
}

inline std::string trigger_label(const Trigger& t) {
  std::string out = "Matched trigger:";
  if (t.kind) out += std::string(" kind = ") + to_string(*t.kind);
  if (t.kind && t.term) out += ",";
  if (t.term) out += " term = \"" + *t.term + "\"";
  return out;
}

}  // namespace reportdetail

// Arranges an AnalysisSummary into the fixed four-section report shape.
// Every section is always present; empty ones carry a "none found" body.
inline ReportLayout build_layout(const AnalysisSummary& s) {
  using reportdetail::clip_snippet;
  using reportdetail::keyword_label;
  ReportLayout layout;
  layout.title = kReportTitle;
  layout.footer = "session " + s.spec.session_id + "  |  generated " + s.generated_at;

  ReportSection config{kHeadingConfig, {}};
  config.blocks.push_back(
      {BlockKind::paragraph,
       "Session " + s.spec.session_id + ", created " + s.spec.created_at + ".", 0});
  config.blocks.push_back(
      {BlockKind::paragraph,
       std::string("Keywords (combine mode: ") + to_string(s.spec.combine) + "):", 0});
  for (const auto& kw : s.spec.keywords) {
    config.blocks.push_back(
        {BlockKind::bullet, std::string(to_string(kw.kind)) + " = " + kw.value, 1});
  }
  config.blocks.push_back({BlockKind::paragraph, "Targets:", 0});
  for (const auto& target : s.spec.targets) {
    config.blocks.push_back({BlockKind::mono, target, 1});
  }
  config.blocks.push_back({BlockKind::paragraph,
                           "Limits: up to " + std::to_string(s.spec.max_pages) +
                               " pages, link depth " + std::to_string(s.spec.max_depth) + ".",
                           0});
  layout.sections.push_back(std::move(config));

  ReportSection detected{kHeadingKeywords, {}};
  detected.blocks.push_back({BlockKind::paragraph,
                             "Pages scanned: " + std::to_string(s.stats.pages_scanned) +
                                 "; pages matched: " + std::to_string(s.stats.pages_matched) +
                                 "; fetch errors: " + std::to_string(s.stats.pages_errored) + ".",
                             0});
  if (s.matches.empty()) {
    detected.blocks.push_back({BlockKind::paragraph, kEmptySectionText, 0});
  } else {
    for (const auto& match : s.matches) {
      detected.blocks.push_back({BlockKind::mono, match.url, 0});
      for (const auto& snippet : match.snippets) {
        detected.blocks.push_back({BlockKind::bullet, keyword_label(s.spec, snippet.value), 1});
        detected.blocks.push_back({BlockKind::paragraph, clip_snippet(snippet.context), 2});
      }
    }
  }
  layout.sections.push_back(std::move(detected));

  ReportSection threats{kHeadingThreats, {}};
  if (s.findings.empty()) {
    threats.blocks.push_back({BlockKind::paragraph, kEmptySectionText, 0});
  } else {
    for (const auto& finding : s.findings) {
      std::string head =
          finding.source == FindingSource::mitre ? "MITRE technique " + finding.id : finding.id;
      if (finding.name != finding.id) head += ": " + finding.name;
      threats.blocks.push_back({BlockKind::subhead, head, 0});
      threats.blocks.push_back(
          {BlockKind::paragraph, reportdetail::trigger_label(finding.matched_trigger), 1});
      threats.blocks.push_back({BlockKind::paragraph, "Evidence:", 1});
      for (const auto& e : finding.evidence) {
        threats.blocks.push_back({BlockKind::mono, e.url + "  (" + e.value + ")", 2});
      }
    }
  }
  layout.sections.push_back(std::move(threats));

  ReportSection mitigations{kHeadingMitigations, {}};
  std::set<std::string> seen;
  for (const auto& finding : s.findings) {
    for (const auto& m : finding.mitigations) {
      if (seen.insert(m).second) mitigations.blocks.push_back({BlockKind::bullet, m, 0});
    }
  }
  if (mitigations.blocks.empty()) {
    mitigations.blocks.push_back({BlockKind::paragraph, kEmptySectionText, 0});
  }
  layout.sections.push_back(std::move(mitigations));

  return layout;
}

// Single-column renderer over PdfBuilder: wraps, indents, breaks pages, and
// stamps the footer on every page.
class ReportRenderer {
 public:
  explicit ReportRenderer(ReportLayout layout) : layout_(std::move(layout)) {}

  std::string render() {
    start_page();
    for (const std::string& line :
         reportdetail::wrap_words(layout_.title, columns(18.0, 0.0, false))) {
      emit_line(line, PdfFont::helvetica_bold, 18.0, 24.0, 0.0);
    }
    y_ -= 10.0;
    for (const auto& section : layout_.sections) emit_section(section);
    return pdf_.finish();
  }

 private:
  static constexpr double kMargin = 72.0;
  static constexpr double kBottomLimit = 96.0;  // keeps body clear of the footer
  static constexpr double kUsableWidth = PdfBuilder::kPageWidth - 2 * kMargin;
  static constexpr double kIndentStep = 16.0;

  void start_page() {
    pdf_.begin_page();
    ++page_no_;
    pdf_.text(kMargin, 48.0, PdfFont::helvetica, 8.0,
              layout_.footer + "  |  page " + std::to_string(page_no_));
    y_ = PdfBuilder::kPageHeight - kMargin;
  }

  void need(double height) {
    if (y_ - height < kBottomLimit) start_page();
  }

  void emit_line(const std::string& line, PdfFont font, double size, double leading,
                 double indent_pt) {
    need(leading);
    pdf_.text(kMargin + indent_pt, y_ - size, font, size, line);
    y_ -= leading;
  }

  // Conservative column budget: Courier advances are exact (0.6 em); the
  // proportional faces use an average estimate, which only affects looks.
  std::size_t columns(double size, double indent_pt, bool mono) const {
    const double char_width = (mono ? 0.6 : 0.55) * size;
    const double avail = kUsableWidth - indent_pt;
    if (avail <= char_width) return 1;
    return static_cast<std::size_t>(avail / char_width);
  }

  void emit_block(const ReportBlock& block) {
    const double indent_pt = kIndentStep * block.indent;
    switch (block.kind) {
      case BlockKind::subhead: {
        y_ -= 4.0;
        for (const auto& line :
             reportdetail::wrap_words(block.text, columns(10.5, indent_pt, false))) {
          emit_line(line, PdfFont::helvetica_bold, 10.5, 14.0, indent_pt);
        }
        break;
      }
      case BlockKind::bullet: {
        const std::size_t cols = columns(10.0, indent_pt, false);
        const auto lines =
            reportdetail::wrap_words(block.text, cols > 2 ? cols - 2 : 1);
        for (std::size_t i = 0; i < lines.size(); ++i) {
          emit_line((i == 0 ? "- " : "  ") + lines[i], PdfFont::helvetica, 10.0, 14.0,
                    indent_pt);
        }
        break;
      }
      case BlockKind::mono: {
        for (const auto& line :
             reportdetail::wrap_mono(block.text, columns(9.0, indent_pt, true))) {
          emit_line(line, PdfFont::courier, 9.0, 12.0, indent_pt);
        }
        break;
      }
      case BlockKind::paragraph: {
        for (const auto& line :
             reportdetail::wrap_words(block.text, columns(10.0, indent_pt, false))) {
          emit_line(line, PdfFont::helvetica, 10.0, 14.0, indent_pt);
        }
        break;
      }
    }
  }

  void emit_section(const ReportSection& section) {
    y_ -= 10.0;
    need(18.0 + 14.0);  // keep the heading attached to its first line
    emit_line(section.heading, PdfFont::helvetica_bold, 13.0, 18.0, 0.0);
    y_ -= 2.0;
    for (const auto& block : section.blocks) emit_block(block);
  }

  ReportLayout layout_;
  PdfBuilder pdf_;
  double y_ = 0.0;
  int page_no_ = 0;
};

// Renders the summary and writes the PDF, creating parent directories.
inline std::filesystem::path render_report(const AnalysisSummary& summary,
                                           const std::filesystem::path& out_path) {
  ReportRenderer renderer(build_layout(summary));
  const std::string bytes = renderer.render();
  if (out_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(out_path.parent_path(), ec);
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write report to " + out_path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) throw DataError("failed writing report to " + out_path.string());
  return out_path;
}

// base_dir/report_<session_id>.pdf, switching to a numbered variant rather
// than ever overwriting an existing file.
inline std::filesystem::path default_report_path(const std::string& session_id,
                                                 const std::filesystem::path& base_dir) {
  std::error_code ec;
  auto candidate = base_dir / ("report_" + session_id + ".pdf");
  for (int suffix = 1; std::filesystem::exists(candidate, ec); ++suffix) {
    candidate = base_dir / ("report_" + session_id + "-" + std::to_string(suffix) + ".pdf");
  }
  return candidate;
}

}  // namespace reconwatch
