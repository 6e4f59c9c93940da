#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "reconwatch/common.hpp"
#include "reconwatch/text.hpp"

namespace reconwatch {

// Font ids usable in PdfBuilder::text. Mapped to the PDF base-14 fonts, so no
// font program is embedded and output stays small and deterministic.
enum class PdfFont { helvetica = 1, helvetica_bold = 2, courier = 3 };

namespace pdfdetail {

inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// UTF-8 in, WinAnsi-compatible bytes out. Latin-1 codepoints pass through
// (they coincide with WinAnsi above 0x9F); common typographic punctuation is
// downgraded to ASCII; anything else becomes '?'.
inline std::string to_winansi(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (const char32_t cp : text::decode_utf8(utf8)) {
    if (cp == U'…') {
      out += "...";
    } else if (cp == U'–' || cp == U'—') {
      out += '-';
    } else if (cp == U'‘' || cp == U'’') {
      out += '\'';
    } else if (cp == U'“' || cp == U'”') {
      out += '"';
    } else if (cp == U'\t') {
      out += ' ';
    } else if (cp >= 0x20 && cp <= 0x7E) {
      out += static_cast<char>(cp);
    } else if (cp >= 0xA0 && cp <= 0xFF) {
      out += static_cast<char>(cp);
    } else {
      out += '?';
    }
  }
  return out;
}

inline std::string escape_pdf_string(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size() + 8);
  for (unsigned char c : bytes) {
    switch (c) {
      case '(':
      case ')':
      case '\\':
        out += '\\';
        out += static_cast<char>(c);
        break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\%03o", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

}  // namespace pdfdetail

// Builds an uncompressed single-column PDF 1.4 file from absolute-positioned
// text runs. Letter-sized pages, media box origin bottom-left.
class PdfBuilder {
 public:
  static constexpr double kPageWidth = 612.0;
  static constexpr double kPageHeight = 792.0;

  void begin_page() { pages_.emplace_back(); }

  // Places one run of text with its baseline at (x, y) in PDF points.
  void text(double x, double y, PdfFont font, double size, std::string_view utf8) {
    if (pages_.empty()) begin_page();
    const std::string payload = pdfdetail::to_winansi(utf8);
    std::string& stream = pages_.back();
    stream += "BT\n/F" + std::to_string(static_cast<int>(font)) + " " +
              pdfdetail::format_coord(size) + " Tf\n1 0 0 1 " +
              pdfdetail::format_coord(x) + " " + pdfdetail::format_coord(y) +
              " Tm\n(" + pdfdetail::escape_pdf_string(payload) + ") Tj\nET\n";
  }

  std::size_t page_count() const { return pages_.size(); }

  // Serializes the whole document. Object order: catalog, page tree, the
  // three fonts, then content stream + page object pairs.
  std::string finish() const {
    std::vector<std::string> pages = pages_;
    if (pages.empty()) pages.emplace_back();

    const int first_page_obj = 6;  // objects 1..5 are fixed
    const int num_objects = 5 + 2 * static_cast<int>(pages.size());

    std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
    std::vector<std::size_t> offsets(static_cast<std::size_t>(num_objects) + 1, 0);

    auto emit = [&](int id, const std::string& body) {
      offsets[static_cast<std::size_t>(id)] = out.size();
      out += std::to_string(id) + " 0 obj\n" + body + "\nendobj\n";
    };

    std::string kids;
    for (std::size_t i = 0; i < pages.size(); ++i) {
      if (!kids.empty()) kids += ' ';
      kids += std::to_string(first_page_obj + 2 * static_cast<int>(i) + 1) + " 0 R";
    }

    emit(1, "<< /Type /Catalog /Pages 2 0 R >>");
    emit(2, "<< /Type /Pages /Kids [" + kids + "] /Count " +
               std::to_string(pages.size()) + " >>");
    emit(3,
         "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica "
         "/Encoding /WinAnsiEncoding >>");
    emit(4,
         "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica-Bold "
         "/Encoding /WinAnsiEncoding >>");
    emit(5,
         "<< /Type /Font /Subtype /Type1 /BaseFont /Courier "
         "/Encoding /WinAnsiEncoding >>");

    for (std::size_t i = 0; i < pages.size(); ++i) {
      const int content_id = first_page_obj + 2 * static_cast<int>(i);
      const int page_id = content_id + 1;
      emit(content_id, "<< /Length " + std::to_string(pages[i].size()) +
                           " >>\nstream\n" + pages[i] + "endstream");
      emit(page_id,
           "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 " +
               pdfdetail::format_coord(kPageWidth) + " " +
               pdfdetail::format_coord(kPageHeight) +
               "] /Resources << /Font << /F1 3 0 R /F2 4 0 R /F3 5 0 R >> >> "
               "/Contents " +
               std::to_string(content_id) + " 0 R >>");
    }

    const std::size_t xref_offset = out.size();
    out += "xref\n0 " + std::to_string(num_objects + 1) + "\n";
    out += "0000000000 65535 f \n";
    for (int id = 1; id <= num_objects; ++id) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n",
                    offsets[static_cast<std::size_t>(id)]);
      out += buf;
    }
    out += "trailer\n<< /Size " + std::to_string(num_objects + 1) +
           " /Root 1 0 R >>\nstartxref\n" + std::to_string(xref_offset) +
           "\n%%EOF";
    return out;
  }

 private:
  std::vector<std::string> pages_;  // one raw content stream per page
};

}  // namespace reconwatch
