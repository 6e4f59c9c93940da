#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reconwatch/common.hpp"
#include "reconwatch/search_spec.hpp"

namespace reconwatch {

// Raw flag storage for the scan grammar; conversion and validation happen
// in build_scan_request so the CLI wiring stays dumb.
struct ScanFlagValues {
  std::vector<std::string> keywords;
  std::string mode;
  std::vector<std::string> urls;
  int max_pages = 100;
  int max_depth = 2;
  std::string out_path;
};

struct ScanRequest {
  SpecDraft draft;
  std::optional<std::string> out_path;
};

inline void register_scan_flags(CLI::App& app, ScanFlagValues& vals) {
  app.add_option("-k,--keyword", vals.keywords,
                 "keyword as kind=value; kind is name, email, or text (repeatable)");
  app.add_option("-m,--mode", vals.mode, "combine mode: and | or (default: or)");
  app.add_option("-u,--url", vals.urls, "target URL, absolute http/https (repeatable)");
  app.add_option("--max-pages", vals.max_pages, "crawl page budget (default: 100)");
  app.add_option("--max-depth", vals.max_depth, "link-following depth (default: 2)");
  app.add_option("-o,--out", vals.out_path, "report output path");
}

inline TypedKeyword parse_keyword_flag(const std::string& raw) {
  const std::size_t eq = raw.find('=');
  if (eq == std::string::npos) {
    throw UsageError("invalid keyword \"" + raw +
                     "\": expected kind=value with kind one of name/email/text");
  }
  const auto kind = keyword_kind_from(raw.substr(0, eq));
  if (!kind) {
    throw UsageError("unknown keyword kind \"" + raw.substr(0, eq) +
                     "\": expected name, email, or text");
  }
  return make_keyword(*kind, raw.substr(eq + 1));
}

// Converts raw flags into a validated draft, reusing the same validation
// the guided mode applies so the two input modes cannot drift apart.
inline ScanRequest build_scan_request(const ScanFlagValues& vals) {
  ScanRequest req;
  for (const auto& raw : vals.keywords) {
    req.draft.keywords.push_back(parse_keyword_flag(raw));
  }
  if (!vals.mode.empty()) {
    const auto mode = combine_mode_from(vals.mode);
    if (!mode) throw UsageError("invalid mode \"" + vals.mode + "\": expected and or or");
    req.draft.combine = *mode;
  }
  if (req.draft.keywords.empty()) throw UsageError("at least one keyword required");
  for (const auto& raw : vals.urls) {
    req.draft.targets.push_back(validate_target(raw));
  }
  req.draft.max_pages = vals.max_pages;
  req.draft.max_depth = vals.max_depth;
  validate_draft(req.draft);
  if (!vals.out_path.empty()) req.out_path = vals.out_path;
  return req;
}

// One-shot parser over scan-subcommand arguments (flags only, in command
// order). Flag errors and domain errors both surface as UsageError.
inline ScanRequest parse_scan_args(std::vector<std::string> args) {
  CLI::App app{"scan"};
  ScanFlagValues vals;
  register_scan_flags(app, vals);
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  return build_scan_request(vals);
}

}  // namespace reconwatch
