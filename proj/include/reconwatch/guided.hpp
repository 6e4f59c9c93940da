#pragma once

#include <iostream>
#include <optional>
#include <string>

#include "reconwatch/common.hpp"
#include "reconwatch/search_spec.hpp"

namespace reconwatch {

inline constexpr const char* kBanner =
    R"( ____  _____ ____ ___  _   _ __      __ _  _____ ____ _   _
|  _ \| ____/ ___/ _ \| \ | |\ \    / // \|_   _/ ___| | | |
| |_) |  _|| |  | | | |  \| | \ \/\/ // _ \ | || |   | |_| |
|  _ <| |__| |__| |_| | |\  |  \ /\ // ___ \| || |___|  _  |
|_| \_\_____\____\___/|_| \_|   \/\//_/   \_\_|\____|_| |_|
)";

inline constexpr const char* kBannerTagline =
    "reconwatch :: proactive threat intelligence scanner";

struct GuidedOutcome {
  // Set once every prompt was answered; absent when the user left early.
  std::optional<SpecDraft> draft;
  // True only when the final confirmation was answered yes.
  bool confirmed = false;
};

namespace guideddetail {

inline std::optional<std::string> read_line(std::istream& in, std::ostream& out,
                                            const std::string& prompt) {
  out << prompt << std::flush;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  return text::trim(line);
}

}  // namespace guideddetail

// Step-by-step spec construction: keyword kinds and values, combine mode,
// targets, limits, then a confirmation. Invalid answers re-prompt with the
// validation message; end-of-input aborts. Streams are injected so the
// whole dialogue is testable.
inline GuidedOutcome run_guided(std::istream& in, std::ostream& out) {
  using guideddetail::read_line;
  GuidedOutcome result;
  SpecDraft draft;

  out << kBanner << kBannerTagline << "\n\n";
  out << "Answer the prompts to configure a scan. Press Ctrl-D to abort.\n\n";

  while (true) {
    const char* prompt = draft.keywords.empty()
                             ? "Keyword kind [name/email/text]: "
                             : "Keyword kind [name/email/text] (blank to continue): ";
    const auto kind_line = read_line(in, out, prompt);
    if (!kind_line) return result;
    if (kind_line->empty()) {
      if (!draft.keywords.empty()) break;
      out << "at least one keyword required\n";
      continue;
    }
    const auto kind = keyword_kind_from(*kind_line);
    if (!kind) {
      out << "unknown kind \"" << *kind_line << "\"; expected name, email, or text\n";
      continue;
    }
    while (true) {
      const auto value = read_line(in, out, std::string("Value for ") + to_string(*kind) + ": ");
      if (!value) return result;
      try {
        draft.keywords.push_back(make_keyword(*kind, *value));
        break;
      } catch (const UsageError& e) {
        out << e.what() << "\n";
      }
    }
  }

  if (draft.keywords.size() > 1) {
    while (true) {
      const auto mode = read_line(in, out, "Combine mode [and/or] (default or): ");
      if (!mode) return result;
      if (mode->empty()) {
        draft.combine = CombineMode::OR;
        break;
      }
      const auto parsed = combine_mode_from(*mode);
      if (parsed) {
        draft.combine = *parsed;
        break;
      }
      out << "expected \"and\" or \"or\"\n";
    }
  }

  while (true) {
    const char* prompt = draft.targets.empty() ? "Target URL: "
                                               : "Target URL (blank to continue): ";
    const auto target = read_line(in, out, prompt);
    if (!target) return result;
    if (target->empty()) {
      if (!draft.targets.empty()) break;
      out << "at least one target URL required\n";
      continue;
    }
    try {
      draft.targets.push_back(validate_target(*target));
    } catch (const UsageError& e) {
      out << e.what() << "\n";
    }
  }

  while (true) {
    const auto pages = read_line(in, out, "Max pages (default 100): ");
    if (!pages) return result;
    if (pages->empty()) break;
    try {
      const int value = std::stoi(*pages);
      if (value < 1) throw std::invalid_argument("");
      draft.max_pages = value;
      break;
    } catch (const std::exception&) {
      out << "expected a positive integer\n";
    }
  }

  while (true) {
    const auto depth = read_line(in, out, "Max depth (default 2): ");
    if (!depth) return result;
    if (depth->empty()) break;
    try {
      const int value = std::stoi(*depth);
      if (value < 0) throw std::invalid_argument("");
      draft.max_depth = value;
      break;
    } catch (const std::exception&) {
      out << "expected a non-negative integer\n";
    }
  }

  out << "\nConfigured scan:\n";
  for (const auto& kw : draft.keywords) {
    out << "  keyword " << to_string(kw.kind) << " = " << kw.value << "\n";
  }
  out << "  combine: " << to_string(draft.combine) << "\n";
  for (const auto& target : draft.targets) out << "  target:  " << target << "\n";
  out << "  limits:  " << draft.max_pages << " pages, depth " << draft.max_depth << "\n\n";

  result.draft = draft;
  while (true) {
    const auto answer = read_line(in, out, "Start scan? [Y/n]: ");
    if (!answer) return result;  // draft kept, unconfirmed
    const std::string a = text::to_lower_ascii(*answer);
    if (a.empty() || a == "y" || a == "yes") {
      result.confirmed = true;
      return result;
    }
    if (a == "n" || a == "no") return result;
    out << "expected y or n\n";
  }
}

}  // namespace reconwatch
