// Acceptance suite: one pass/fail line per criterion, exit code is the
// number of failures. Runs fully offline against the fixture testkit.
#include <chrono>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "reconwatch/correlate.hpp"
#include "reconwatch/fetch.hpp"
#include "reconwatch/history.hpp"
#include "reconwatch/match.hpp"
#include "reconwatch/report.hpp"
#include "reconwatch/summary.hpp"
#include "reconwatch/testkit.hpp"
#include "reconwatch/threat_db.hpp"
#include "support/correlate_oracle.hpp"
#include "support/match_oracle.hpp"
#include "support/pdf_extract.hpp"
#include "support/temp_dir.hpp"

using namespace reconwatch;
using namespace std::chrono_literals;
using testsupport::TempDir;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool expect(bool cond, const std::string& what, std::string& why) {
  if (!cond && why.empty()) why = what;
  return cond;
}

CrawlPlan fast_plan(std::vector<std::string> seeds, int max_pages, int max_depth,
                    std::chrono::milliseconds delay = 5ms, int pool = 8) {
  CrawlPlan plan;
  plan.seeds = std::move(seeds);
  plan.max_pages = max_pages;
  plan.max_depth = max_depth;
  plan.per_host_delay = delay;
  plan.pool_size = pool;
  plan.timeout = 3000ms;
  return plan;
}

SearchSpec spec_for(std::vector<TypedKeyword> keywords, CombineMode combine) {
  SearchSpec spec;
  spec.session_id = "20260101T000000Z-acc001";
  spec.created_at = "2026-01-01T00:00:00Z";
  spec.keywords = std::move(keywords);
  spec.combine = combine;
  spec.targets = {"http://fixture.invalid/"};
  return spec;
}

std::vector<MatchRecord> satisfied_matches(const std::vector<PageDocument>& docs,
                                           const std::vector<TypedKeyword>& keywords,
                                           CombineMode combine) {
  std::vector<MatchRecord> out;
  for (const auto& doc : docs) {
    if (!doc.ok()) continue;
    MatchRecord rec = match_page(doc.extracted_text, keywords, combine, doc.url);
    if (rec.satisfied) out.push_back(std::move(rec));
  }
  return out;
}

// 1. Forum corpus replay: phrase alone matches all 79 linked threads, the
// phrase plus the body-only term narrows to the 57 real content pages, and
// the 22 title-only pages stay under a 30% share.
bool forum_replay_counts(std::string& why) {
  testkit::FixtureServer server(testkit::build_scenario3_corpus());
  Gateway gateway;
  const auto docs = fetch_all(fast_plan({server.base_url() + "/"}, 120, 1), gateway);
  if (!expect(static_cast<int>(docs.size()) == testkit::kScenario3ThreadCount + 1,
              "expected 80 fetched pages, got " + std::to_string(docs.size()), why))
    return false;
  for (const auto& doc : docs) {
    if (!expect(doc.ok(), doc.url + " errored", why)) return false;
  }

  const TypedKeyword phrase{KeywordKind::text, testkit::kScenario3Phrase};
  const TypedKeyword body{KeywordKind::text, testkit::kScenario3BodyTerm};
  const auto broad = satisfied_matches(docs, {phrase}, CombineMode::OR);
  const auto narrow = satisfied_matches(docs, {phrase, body}, CombineMode::AND);

  const int fp = static_cast<int>(broad.size() - narrow.size());
  bool ok = expect(static_cast<int>(broad.size()) == testkit::kScenario3ThreadCount,
                   "OR matched " + std::to_string(broad.size()) + ", expected 79", why);
  ok = ok && expect(static_cast<int>(narrow.size()) == testkit::kScenario3ContentPages,
                    "AND matched " + std::to_string(narrow.size()) + ", expected 57", why);
  ok = ok && expect(fp == testkit::kScenario3FalsePositives,
                    "false positives " + std::to_string(fp) + ", expected 22", why);
  ok = ok && expect(static_cast<double>(fp) / static_cast<double>(broad.size()) < 0.30,
                    "false-positive rate not below 0.30", why);
  return ok;
}

// 2. Dark-target routing: a name + email AND match on a mock onion host
// travels through the SOCKS5 proxy only, and with the proxy gone the same
// fetch fails without a single direct connection.
bool onion_routing(std::string& why) {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page(
      "<html><body><p>Sheila Santiesteban posted sheila.emili@yahoo.com "
      "in a combo list.</p></body></html>");
  testkit::FixtureServer upstream(corpus);
  testkit::MockSocks5Proxy proxy(upstream.host(), upstream.port());

  Gateway gateway(proxy.endpoint());
  const ProbeResult probe = gateway.probe(2000ms);
  if (!expect(probe.status == ProbeStatus::reachable, "mock proxy probe failed", why))
    return false;

  const std::string seed = "http://" + testkit::test_onion_host() + "/";
  const std::vector<TypedKeyword> keywords = {
      {KeywordKind::name, "Sheila Santiesteban"},
      {KeywordKind::email, "sheila.emili@yahoo.com"}};

  const auto docs = fetch_all(fast_plan({seed}, 10, 0), gateway);
  if (!expect(docs.size() == 1 && docs[0].ok(), "onion fetch failed", why)) return false;
  const auto matched = satisfied_matches(docs, keywords, CombineMode::AND);
  bool ok = expect(matched.size() == 1, "expected exactly 1 satisfied match", why);
  ok = ok && expect(!proxy.connect_log().empty(), "proxy CONNECT log is empty", why);
  for (const auto& entry : proxy.connect_log()) {
    ok = ok && expect(entry.accepted, "proxy refused a CONNECT", why);
  }

  // Fail closed: no proxy means no traffic at all toward the onion host.
  const std::size_t tunnels = proxy.connect_log().size();
  const std::size_t wire = upstream.request_count();
  gateway.set_proxy_available(false);
  const auto refused = fetch_all(fast_plan({seed}, 10, 0), gateway);
  ok = ok && expect(refused.size() == 1 && !refused[0].ok(), "fetch did not fail closed", why);
  ok = ok && expect(refused[0].error->kind == FetchErrorKind::proxy,
                    "expected a proxy error", why);
  ok = ok && expect(proxy.connect_log().size() == tunnels, "proxy saw new CONNECTs", why);
  ok = ok && expect(upstream.request_count() == wire, "onion host saw direct traffic", why);
  return ok;
}

// 3. Surface scan to report: the rendered PDF names both the email and the
// page where it was found.
bool surface_report(std::string& why) {
  testkit::FixtureCorpus corpus;
  corpus.pages["/dump"] = testkit::make_page(
      "<html><body><p>Fresh combo list mentions arthurwelk83@whalebank.org "
      "again.</p></body></html>");
  corpus.pages["/"] = testkit::make_page(
      "<html><body><a href=\"/dump\">latest dump</a></body></html>");
  testkit::FixtureServer server(corpus);

  Gateway gateway;
  const auto docs = fetch_all(fast_plan({server.base_url() + "/"}, 10, 1), gateway);
  const std::vector<TypedKeyword> keywords = {
      {KeywordKind::email, "arthurwelk83@whalebank.org"}};
  const auto matched = satisfied_matches(docs, keywords, CombineMode::OR);
  if (!expect(matched.size() == 1, "expected 1 satisfied match", why)) return false;
  const std::string matched_url = matched[0].url;

  SearchSpec spec = spec_for(keywords, CombineMode::OR);
  spec.targets = {server.base_url() + "/"};
  const ThreatDatabase db = load_databases(RECONWATCH_DAT_DIR);
  AnalysisSummary summary = build_summary(spec, docs, matched, correlate(matched, spec, db));

  TempDir dir;
  const std::string pdf = read_file(render_report(summary, dir / "report.pdf"));
  const std::string extracted = testsupport::pdftext::extract_text(pdf);
  bool ok = expect(extracted.find("arthurwelk83@whalebank.org") != std::string::npos,
                   "email missing from extracted report text", why);
  ok = ok && expect(extracted.find(matched_url) != std::string::npos,
                    "matched URL missing from extracted report text", why);
  return ok;
}

// 4. Matching agrees with the naive case-folded substring oracle on 1,000
// randomized cases, and an AND verdict always implies the OR verdict.
bool matching_oracle(std::string& why) {
  namespace oracle = testsupport::oracle;
  oracle::CaseGenerator gen(20260814);
  for (int i = 0; i < 1000; ++i) {
    const oracle::OracleCase c = gen.next();
    const oracle::OracleVerdict verdict = oracle::evaluate(c);

    const std::string text = oracle::encode(c.text);
    std::vector<TypedKeyword> keywords;
    for (const auto& value : c.keyword_values) {
      keywords.push_back({KeywordKind::text, oracle::encode(value)});
    }
    const CombineMode mode = c.combine_and ? CombineMode::AND : CombineMode::OR;
    const MatchRecord rec = match_page(text, keywords, mode);

    std::vector<std::string> expected_values;
    for (const std::size_t idx : verdict.matched) {
      expected_values.push_back(keywords[idx].value);
    }
    if (!expect(rec.satisfied == verdict.satisfied,
                "case " + std::to_string(i) + ": verdict mismatch", why))
      return false;
    if (!expect(rec.matched_values == expected_values,
                "case " + std::to_string(i) + ": matched values mismatch", why))
      return false;

    const MatchRecord and_rec = match_page(text, keywords, CombineMode::AND);
    const MatchRecord or_rec = match_page(text, keywords, CombineMode::OR);
    if (!expect(!and_rec.satisfied || or_rec.satisfied,
                "case " + std::to_string(i) + ": AND satisfied but OR is not", why))
      return false;
  }
  return true;
}

// 5. Politeness: observed same-host request gaps respect the configured
// delay and robots-denied paths never reach the wire.
bool politeness(std::string& why) {
  testkit::FixtureCorpus corpus;
  corpus.robots = "User-agent: *\nDisallow: /private/\n";
  corpus.pages["/"] = testkit::make_page(
      "<html><body><a href=\"/a\">a</a><a href=\"/b\">b</a><a href=\"/c\">c</a>"
      "<a href=\"/private/secret\">s</a></body></html>");
  corpus.pages["/a"] = testkit::make_page("<html><body>alpha</body></html>");
  corpus.pages["/b"] = testkit::make_page("<html><body>beta</body></html>");
  corpus.pages["/c"] = testkit::make_page("<html><body>gamma</body></html>");
  corpus.pages["/private/secret"] = testkit::make_page("<html><body>no</body></html>");
  testkit::FixtureServer server(corpus);

  const auto delay = 120ms;
  Gateway gateway;
  const auto docs = fetch_all(fast_plan({server.base_url() + "/"}, 20, 1, delay, 4), gateway);

  bool ok = expect(docs.size() == 5, "expected 5 crawl results", why);
  const auto log = server.access_log();
  ok = ok && expect(log.size() >= 5, "access log suspiciously short", why);
  ok = ok && expect(testkit::min_access_gap(log) >= delay,
                    "same-host requests closer than the configured delay", why);
  for (const auto& entry : log) {
    ok = ok && expect(entry.path != "/private/secret", "robots-denied path was fetched", why);
    ok = ok && expect(entry.user_agent == kUserAgent, "unexpected User-Agent", why);
  }
  for (const auto& doc : docs) {
    if (doc.url.find("/private/secret") == std::string::npos) continue;
    ok = ok && expect(!doc.ok() && doc.error->kind == FetchErrorKind::robots_denied,
                      "denied page not reported as robots_denied", why);
  }
  return ok;
}

// 6. Concurrency determinism: pool sizes 1, 2, and 8 produce the same URL
// set and the same analysis, timestamps aside.
bool pool_determinism(std::string& why) {
  testkit::FixtureServer server(testkit::build_scenario3_corpus());
  const SearchSpec spec =
      spec_for({{KeywordKind::text, testkit::kScenario3Phrase},
                {KeywordKind::text, testkit::kScenario3BodyTerm}},
               CombineMode::AND);
  const ThreatDatabase db = load_databases(RECONWATCH_DAT_DIR);

  std::vector<std::vector<std::string>> url_sets;
  std::vector<AnalysisSummary> summaries;
  for (const int pool : {1, 2, 8}) {
    Gateway gateway;
    const auto docs =
        fetch_all(fast_plan({server.base_url() + "/"}, 120, 1, 5ms, pool), gateway);
    std::vector<std::string> urls;
    for (const auto& doc : docs) urls.push_back(doc.url);
    url_sets.push_back(std::move(urls));

    const auto matched = satisfied_matches(docs, spec.keywords, spec.combine);
    AnalysisSummary summary =
        build_summary(spec, docs, matched, correlate(matched, spec, db));
    summary.generated_at.clear();
    summaries.push_back(std::move(summary));
  }

  bool ok = expect(url_sets[0] == url_sets[1] && url_sets[1] == url_sets[2],
                   "URL sets differ across pool sizes", why);
  ok = ok && expect(summaries[0] == summaries[1] && summaries[1] == summaries[2],
                    "analysis summaries differ across pool sizes", why);
  return ok;
}

// 7. Correlation agrees with a brute-force double loop over entries and
// triggers, and every finding's evidence traces back to a satisfied match.
bool correlation_oracle(std::string& why) {
  namespace corr = testsupport::corr;
  corr::CorrelationGenerator gen(97);
  for (int i = 0; i < 300; ++i) {
    const corr::CorrelationCase c = gen.next();
    const SearchSpec spec = spec_for(c.keywords, CombineMode::OR);
    const auto got = correlate(c.matches, spec, c.db);
    const auto expected = corr::brute_correlate(c.matches, c.keywords, c.db);
    if (!expect(corr::findings_match(got, expected),
                "case " + std::to_string(i) + ": findings disagree with oracle", why))
      return false;
    if (!expect(corr::evidence_sound(got, c.matches),
                "case " + std::to_string(i) + ": unsound evidence", why))
      return false;
  }
  return true;
}

// 8. Report structure: header, trailer, and all four section headings
// survive text extraction, including for an empty session.
bool report_structure(std::string& why) {
  TempDir dir;

  AnalysisSummary populated;
  populated.spec = spec_for({{KeywordKind::email, "arthurwelk83@whalebank.org"}},
                            CombineMode::OR);
  MatchRecord rec;
  rec.url = "http://fixture.invalid/dump";
  rec.satisfied = true;
  rec.matched_values = {"arthurwelk83@whalebank.org"};
  rec.snippets = {{"arthurwelk83@whalebank.org", "seen arthurwelk83@whalebank.org here"}};
  populated.matches = {rec};
  populated.stats = SessionStats{1, 1, 0};
  populated.generated_at = "2026-01-01T00:00:00Z";

  AnalysisSummary empty;
  empty.spec = spec_for({{KeywordKind::text, "quiet"}}, CombineMode::OR);
  empty.generated_at = "2026-01-01T00:00:00Z";

  bool ok = true;
  int which = 0;
  for (const auto* summary : {&populated, &empty}) {
    const auto path = dir / ("r" + std::to_string(which++) + ".pdf");
    const std::string bytes = read_file(render_report(*summary, path));
    ok = ok && expect(bytes.rfind("%PDF-", 0) == 0, "missing %PDF- header", why);
    ok = ok && expect(bytes.size() >= 5 && bytes.substr(bytes.size() - 5) == "%%EOF",
                      "missing %%EOF trailer", why);
    const std::string extracted = testsupport::pdftext::extract_text(bytes);
    for (const char* heading : {kHeadingConfig, kHeadingKeywords, kHeadingThreats,
                                kHeadingMitigations}) {
      ok = ok && expect(extracted.find(heading) != std::string::npos,
                        std::string("heading missing: ") + heading, why);
    }
  }
  return ok;
}

// 9. Persistence: history and analysis round-trip to equal values, and a
// corrupt history store is left byte-identical by a failed append.
bool persistence_round_trips(std::string& why) {
  TempDir dir;
  const auto store = dir / "history.json";

  HistoryRecord completed;
  completed.spec = spec_for({{KeywordKind::name, "Ada Lovelace"}}, CombineMode::OR);
  completed.outcome = SessionOutcomeKind::completed;
  completed.pages_scanned = 4;
  completed.pages_matched = 2;
  completed.report_path = "sessions/x/report_x.pdf";

  HistoryRecord aborted;
  aborted.spec = spec_for({{KeywordKind::text, "combo"}}, CombineMode::AND);
  aborted.outcome = SessionOutcomeKind::aborted;

  append_history(completed, store);
  append_history(aborted, store);
  const auto loaded = load_history(store);
  bool ok = expect(loaded.size() == 2 && loaded[0] == completed && loaded[1] == aborted,
                   "history round trip mismatch", why);

  AnalysisSummary summary;
  summary.spec = completed.spec;
  MatchRecord rec;
  rec.url = "http://fixture.invalid/";
  rec.satisfied = true;
  rec.matched_values = {"Ada Lovelace"};
  rec.snippets = {{"Ada Lovelace", "by Ada Lovelace today"}};
  summary.matches = {rec};
  summary.stats = SessionStats{4, 2, 0};
  summary.generated_at = "2026-01-01T00:00:00Z";
  write_summary(summary, dir.path());
  ok = ok && expect(read_summary(dir / kAnalysisFileName) == summary,
                    "analysis round trip mismatch", why);

  const auto corrupt = dir / "corrupt.json";
  std::ofstream(corrupt, std::ios::binary) << "droppings";
  bool threw = false;
  try {
    append_history(completed, corrupt);
  } catch (const DataError&) {
    threw = true;
  }
  ok = ok && expect(threw, "corrupt store append did not throw", why);
  ok = ok && expect(read_file(corrupt) == "droppings", "corrupt store was modified", why);
  return ok;
}

int run(const std::string& label, const std::function<bool(std::string&)>& fn) {
  std::string why;
  bool ok = false;
  try {
    ok = fn(why);
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  if (ok) {
    std::cout << "PASS: " << label << "\n";
    return 0;
  }
  std::cout << "FAIL: " << label << (why.empty() ? "" : " (" + why + ")") << "\n";
  return 1;
}

}  // namespace

int main() {
  int failures = 0;
  failures += run("1 forum replay: 79 OR matches, 57 AND matches, FP rate below 30%",
                  forum_replay_counts);
  failures += run("2 onion match routed through SOCKS5 only, fail-closed without proxy",
                  onion_routing);
  failures += run("3 surface email scan report names the email and the URL",
                  surface_report);
  failures += run("4 boolean matching agrees with the substring oracle on 1000 cases",
                  matching_oracle);
  failures += run("5 per-host delay respected and robots-denied paths never fetched",
                  politeness);
  failures += run("6 pool sizes 1/2/8 give identical results and analysis",
                  pool_determinism);
  failures += run("7 correlation agrees with the brute-force oracle on 300 cases",
                  correlation_oracle);
  failures += run("8 reports are well-formed PDFs with all four sections extractable",
                  report_structure);
  failures += run("9 history and analysis round-trip; corrupt stores stay untouched",
                  persistence_round_trips);
  if (failures == 0) {
    std::cout << "all 9 criteria passed\n";
  } else {
    std::cout << failures << " criteria failed\n";
  }
  return failures;
}
