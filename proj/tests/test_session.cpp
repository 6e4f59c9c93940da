#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reconwatch/commando.hpp"
#include "reconwatch/common.hpp"
#include "reconwatch/guided.hpp"
#include "reconwatch/history.hpp"
#include "support/temp_dir.hpp"

using namespace reconwatch;
using testsupport::TempDir;

namespace {

GuidedOutcome run_script(const std::string& script, std::string* transcript = nullptr) {
  std::istringstream in(script);
  std::ostringstream out;
  const GuidedOutcome outcome = run_guided(in, out);
  if (transcript) *transcript = out.str();
  return outcome;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("guided dialogue builds and confirms a two-keyword scan") {
  std::string transcript;
  const GuidedOutcome outcome = run_script(
      "name\n"
      "Sheila Santiesteban\n"
      "email\n"
      "sheila.emili@yahoo.com\n"
      "\n"
      "and\n"
      "https://forum.example/\n"
      "\n"
      "50\n"
      "1\n"
      "y\n",
      &transcript);

  REQUIRE(outcome.draft);
  CHECK(outcome.confirmed);
  const SpecDraft& draft = *outcome.draft;
  REQUIRE(draft.keywords.size() == 2);
  CHECK(draft.keywords[0] == TypedKeyword{KeywordKind::name, "Sheila Santiesteban"});
  CHECK(draft.keywords[1] == TypedKeyword{KeywordKind::email, "sheila.emili@yahoo.com"});
  CHECK(draft.combine == CombineMode::AND);
  CHECK(draft.targets == std::vector<std::string>{"https://forum.example/"});
  CHECK(draft.max_pages == 50);
  CHECK(draft.max_depth == 1);

  CHECK(transcript.find(kBannerTagline) != std::string::npos);
  CHECK(transcript.find("Configured scan:") != std::string::npos);
  CHECK(transcript.find("  keyword name = Sheila Santiesteban") != std::string::npos);
  CHECK(transcript.find("  combine: and") != std::string::npos);
  CHECK(transcript.find("  limits:  50 pages, depth 1") != std::string::npos);
  CHECK(transcript.find("Start scan? [Y/n]: ") != std::string::npos);
}

TEST_CASE("guided dialogue re-prompts on invalid answers") {
  std::string transcript;
  const GuidedOutcome outcome = run_script(
      "phone\n"
      "email\n"
      "broken\n"
      "ok@example.org\n"
      "\n"
      "not-a-url\n"
      "http://h.example/\n"
      "\n"
      "zero\n"
      "25\n"
      "-1\n"
      "0\n"
      "maybe\n"
      "y\n",
      &transcript);

  REQUIRE(outcome.draft);
  CHECK(outcome.confirmed);
  CHECK(outcome.draft->keywords.size() == 1);
  CHECK(outcome.draft->max_pages == 25);
  CHECK(outcome.draft->max_depth == 0);

  CHECK(transcript.find("unknown kind \"phone\"; expected name, email, or text") !=
        std::string::npos);
  CHECK(transcript.find("invalid email keyword \"broken\"") != std::string::npos);
  CHECK(transcript.find("invalid target URL \"not-a-url\"") != std::string::npos);
  CHECK(transcript.find("expected a positive integer") != std::string::npos);
  CHECK(transcript.find("expected a non-negative integer") != std::string::npos);
  CHECK(transcript.find("expected y or n") != std::string::npos);
}

TEST_CASE("guided dialogue insists on at least one keyword and target") {
  std::string transcript;
  const GuidedOutcome outcome = run_script(
      "\n"
      "text\n"
      "leak\n"
      "\n"
      "\n"
      "http://h.example/\n"
      "\n"
      "\n"
      "\n"
      "\n",
      &transcript);

  REQUIRE(outcome.draft);
  CHECK(outcome.confirmed);  // blank confirmation defaults to yes
  CHECK(outcome.draft->max_pages == 100);
  CHECK(outcome.draft->max_depth == 2);
  CHECK(transcript.find("at least one keyword required") != std::string::npos);
  CHECK(transcript.find("at least one target URL required") != std::string::npos);
  // One keyword means no combine question.
  CHECK(transcript.find("Combine mode") == std::string::npos);
}

TEST_CASE("guided dialogue aborts cleanly on end of input") {
  const GuidedOutcome at_start = run_script("");
  CHECK_FALSE(at_start.draft);
  CHECK_FALSE(at_start.confirmed);

  const GuidedOutcome mid_way = run_script("text\nleak\n\nhttp://h.example/\n");
  CHECK_FALSE(mid_way.draft);
  CHECK_FALSE(mid_way.confirmed);
}

TEST_CASE("guided dialogue keeps the draft when the user declines") {
  const GuidedOutcome declined =
      run_script("text\nleak\n\nhttp://h.example/\n\n\n\nn\n");
  REQUIRE(declined.draft);
  CHECK_FALSE(declined.confirmed);

  // End of input at the confirmation also keeps the finished draft.
  const GuidedOutcome eof_confirm =
      run_script("text\nleak\n\nhttp://h.example/\n\n\n\n");
  REQUIRE(eof_confirm.draft);
  CHECK_FALSE(eof_confirm.confirmed);
}

TEST_CASE("scan flags parse into a validated draft") {
  const ScanRequest req = parse_scan_args(
      {"-k", "email=arthurwelk83@whalebank.org", "-m", "or", "-u", "https://gist.github.com/"});
  REQUIRE(req.draft.keywords.size() == 1);
  CHECK(req.draft.keywords[0] ==
        TypedKeyword{KeywordKind::email, "arthurwelk83@whalebank.org"});
  CHECK(req.draft.combine == CombineMode::OR);
  CHECK(req.draft.targets == std::vector<std::string>{"https://gist.github.com/"});
  CHECK(req.draft.max_pages == 100);
  CHECK(req.draft.max_depth == 2);
  CHECK_FALSE(req.out_path);
}

TEST_CASE("scan flags support repeats, limits, and output path") {
  const ScanRequest req = parse_scan_args({"--keyword", "name=Ada Lovelace",
                                           "--keyword", "text=combo=list",
                                           "--mode", "and",
                                           "--url", "http://a.example/",
                                           "--url", "http://b.example/x",
                                           "--max-pages", "12",
                                           "--max-depth", "0",
                                           "-o", "out/report.pdf"});
  REQUIRE(req.draft.keywords.size() == 2);
  CHECK(req.draft.keywords[1].value == "combo=list");  // split at the first =
  CHECK(req.draft.combine == CombineMode::AND);
  CHECK(req.draft.targets.size() == 2);
  CHECK(req.draft.max_pages == 12);
  CHECK(req.draft.max_depth == 0);
  REQUIRE(req.out_path);
  CHECK(*req.out_path == "out/report.pdf");
}

TEST_CASE("scan flag errors surface as usage errors") {
  CHECK_THROWS_MATCHES(parse_scan_args({"-u", "http://h.example/"}), UsageError,
                       Catch::Matchers::Message("at least one keyword required"));
  CHECK_THROWS_MATCHES(
      parse_scan_args({"-k", "raw", "-u", "http://h.example/"}), UsageError,
      Catch::Matchers::Message(
          "invalid keyword \"raw\": expected kind=value with kind one of name/email/text"));
  CHECK_THROWS_MATCHES(
      parse_scan_args({"-k", "phone=5551212", "-u", "http://h.example/"}), UsageError,
      Catch::Matchers::Message("unknown keyword kind \"phone\": expected name, email, or text"));
  CHECK_THROWS_MATCHES(
      parse_scan_args({"-k", "text=leak", "-m", "xor", "-u", "http://h.example/"}), UsageError,
      Catch::Matchers::Message("invalid mode \"xor\": expected and or or"));
  CHECK_THROWS_AS(parse_scan_args({"-k", "text=leak", "-u", "http://h.example/", "--bogus"}),
                  UsageError);
  CHECK_THROWS_AS(
      parse_scan_args({"-k", "text=leak", "-u", "http://h.example/", "--max-pages", "0"}),
      UsageError);
  CHECK_THROWS_AS(parse_scan_args({"-k", "text=leak"}), UsageError);
}

TEST_CASE("guided and flag input produce byte-identical specs") {
  std::mt19937 rng(4242);
  const std::vector<TypedKeyword> pool = {
      {KeywordKind::name, "Ada Lovelace"},
      {KeywordKind::email, "bob@example.org"},
      {KeywordKind::text, "combo list"},
      {KeywordKind::text, "leak"},
  };
  const std::vector<std::string> target_pool = {
      "http://a.example/", "https://b.example/start", "http://c.example:8080/x"};

  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t kw_count = 1 + rng() % 3;
    std::vector<TypedKeyword> kws;
    for (std::size_t i = 0; i < kw_count; ++i) kws.push_back(pool[rng() % pool.size()]);
    const bool use_and = rng() % 2 == 0;
    const std::size_t target_count = 1 + rng() % 2;
    std::vector<std::string> targets;
    for (std::size_t i = 0; i < target_count; ++i) {
      targets.push_back(target_pool[rng() % target_pool.size()]);
    }
    const int pages = 1 + static_cast<int>(rng() % 200);
    const int depth = static_cast<int>(rng() % 4);

    std::ostringstream script;
    for (const auto& kw : kws) script << to_string(kw.kind) << "\n" << kw.value << "\n";
    script << "\n";
    if (kws.size() > 1) script << (use_and ? "and" : "or") << "\n";
    for (const auto& t : targets) script << t << "\n";
    script << "\n" << pages << "\n" << depth << "\ny\n";

    std::vector<std::string> args;
    for (const auto& kw : kws) {
      args.push_back("-k");
      args.push_back(std::string(to_string(kw.kind)) + "=" + kw.value);
    }
    if (kws.size() > 1) {
      args.push_back("-m");
      args.push_back(use_and ? "and" : "or");
    }
    for (const auto& t : targets) {
      args.push_back("-u");
      args.push_back(t);
    }
    args.push_back("--max-pages");
    args.push_back(std::to_string(pages));
    args.push_back("--max-depth");
    args.push_back(std::to_string(depth));

    const GuidedOutcome guided = run_script(script.str());
    REQUIRE(guided.draft);
    REQUIRE(guided.confirmed);
    const ScanRequest flags = parse_scan_args(args);

    INFO("iteration " << iter);
    CHECK(guided.draft.value() == flags.draft);
    CHECK(serialize_spec(finalize_spec(*guided.draft, "S", "T")) ==
          serialize_spec(finalize_spec(flags.draft, "S", "T")));
  }
}

TEST_CASE("session ids are sortable timestamps with a random suffix") {
  const auto tp = std::chrono::system_clock::from_time_t(0);
  const std::string id = make_session_id(tp);
  REQUIRE(id.size() == 23);
  CHECK(id.substr(0, 17) == "19700101T000000Z-");
  for (std::size_t i = 17; i < id.size(); ++i) {
    const char c = id[i];
    CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
  }
  CHECK(format_utc(tp) == "1970-01-01T00:00:00Z");
  CHECK(make_session_id() != make_session_id());
}

namespace {

HistoryRecord sample_record(const std::string& id) {
  SpecDraft draft;
  draft.keywords = {make_keyword(KeywordKind::text, "leak")};
  draft.targets = {"http://h.example/"};
  HistoryRecord rec;
  rec.spec = finalize_spec(draft, id, "2026-01-02T03:04:05Z");
  rec.outcome = SessionOutcomeKind::completed;
  rec.pages_scanned = 3;
  rec.pages_matched = 1;
  rec.report_path = "sessions/" + id + "/report.pdf";
  return rec;
}

}  // namespace

TEST_CASE("history records round trip through json") {
  HistoryRecord rec = sample_record("S1");
  CHECK(history_record_from_json(to_json(rec)) == rec);

  rec.report_path.reset();
  rec.outcome = SessionOutcomeKind::aborted;
  const ordered_json j = to_json(rec);
  CHECK(j.at("report_path").is_null());
  CHECK(j.at("outcome") == "aborted");
  CHECK(history_record_from_json(j) == rec);
}

TEST_CASE("history record json flattens spec fields in order") {
  const std::string js = to_json(sample_record("S1")).dump();
  const auto pos = [&](const char* key) { return js.find(std::string("\"") + key + "\":"); };
  const char* order[] = {"session_id", "created_at", "keywords",      "combine",
                         "targets",    "max_pages",  "max_depth",     "outcome",
                         "pages_scanned", "pages_matched", "report_path"};
  for (std::size_t i = 0; i + 1 < std::size(order); ++i) {
    INFO(order[i] << " before " << order[i + 1]);
    CHECK(pos(order[i]) != std::string::npos);
    CHECK(pos(order[i]) < pos(order[i + 1]));
  }
}

TEST_CASE("history store appends records in order") {
  TempDir dir;
  const auto store = dir / "history.json";
  CHECK(load_history(store).empty());

  const HistoryRecord first = sample_record("S1");
  HistoryRecord second = sample_record("S2");
  second.outcome = SessionOutcomeKind::errored;
  second.report_path.reset();

  append_history(first, store);
  append_history(second, store);

  const auto loaded = load_history(store);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0] == first);
  CHECK(loaded[1] == second);

  // The store is one pretty-printed JSON array.
  const std::string bytes = read_file(store);
  CHECK(bytes.rfind("[", 0) == 0);
  CHECK(bytes.find("\"session_id\": \"S1\"") != std::string::npos);
}

TEST_CASE("corrupt history store fails closed and keeps its bytes") {
  TempDir dir;
  const auto store = dir / "history.json";
  {
    std::ofstream out(store, std::ios::binary);
    out << "{\"not\": \"an array\"}";
  }
  const std::string before = read_file(store);

  CHECK_THROWS_MATCHES(load_history(store), DataError,
                       Catch::Matchers::Message("history store " + store.string() +
                                                " is corrupt: expected a JSON array"));
  CHECK_THROWS_AS(append_history(sample_record("S9"), store), DataError);
  CHECK(read_file(store) == before);

  {
    std::ofstream out(store, std::ios::binary | std::ios::trunc);
    out << "droppings";
  }
  CHECK_THROWS_AS(load_history(store), DataError);
}
