#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "reconwatch/pipeline.hpp"
#include "reconwatch/testkit.hpp"
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

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (const char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

SearchSpec make_spec(std::vector<TypedKeyword> keywords, std::vector<std::string> targets,
                     CombineMode combine = CombineMode::OR, int max_depth = 1) {
  SpecDraft draft;
  draft.keywords = std::move(keywords);
  draft.combine = combine;
  draft.targets = std::move(targets);
  draft.max_depth = max_depth;
  return finalize_spec(draft, make_session_id(), utc_now_string());
}

RuntimeConfig fast_config(const TempDir& home) {
  RuntimeConfig config;
  config.home = home.path();
  config.dat_dir = RECONWATCH_DAT_DIR;
  config.per_host_delay = 10ms;
  config.pool_size = 2;
  config.timeout = 5000ms;
  config.probe_timeout = 2000ms;
  return config;
}

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const TempDir& scratch) {
  static int counter = 0;
  const auto capture = scratch / ("cli_out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(RECONWATCH_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  CliResult result;
  result.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  result.output = read_file(capture);
  return result;
}

}  // namespace

TEST_CASE("a dark-target session runs end to end through the proxy") {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page(
      "<html><body><p>Analyst roster board</p><a href=\"/leak\">latest</a></body></html>");
  corpus.pages["/leak"] = testkit::make_page(
      "<html><body><p>Sheila Santiesteban leaked sheila.emili@yahoo.com "
      "credentials today.</p></body></html>");
  testkit::FixtureServer upstream(corpus);
  testkit::MockSocks5Proxy proxy(upstream.host(), upstream.port());

  TempDir home;
  RuntimeConfig config = fast_config(home);
  config.proxy = proxy.endpoint();

  const std::string onion_target = "http://" + testkit::test_onion_host() + "/";
  const SearchSpec spec = make_spec({make_keyword(KeywordKind::name, "Sheila Santiesteban"),
                                     make_keyword(KeywordKind::email, "sheila.emili@yahoo.com")},
                                    {onion_target}, CombineMode::AND);

  const SessionOutcome outcome = run_session(spec, config);

  CHECK(outcome.warnings.empty());
  CHECK(outcome.summary.spec == spec);
  CHECK(outcome.summary.stats.pages_scanned == 2);
  CHECK(outcome.summary.stats.pages_matched == 1);
  CHECK(outcome.summary.stats.pages_errored == 0);
  REQUIRE(outcome.summary.matches.size() == 1);
  CHECK(outcome.summary.matches[0].matched_values.size() == 2);
  CHECK_FALSE(outcome.summary.findings.empty());
  CHECK(outcome.summary.stats.pages_matched <= outcome.summary.stats.pages_scanned);

  // Everything went through the tunnel.
  CHECK_FALSE(proxy.connect_log().empty());
  for (const auto& entry : proxy.connect_log()) CHECK(entry.accepted);

  // Report written under the session directory.
  REQUIRE(outcome.report_path);
  CHECK(std::filesystem::exists(*outcome.report_path));
  const std::string pdf = read_file(*outcome.report_path);
  CHECK(pdf.rfind("%PDF-", 0) == 0);

  // Analysis artifact round trips to the in-memory summary.
  const auto dir = session_dir(config, spec.session_id);
  CHECK(read_summary(dir / kAnalysisFileName) == outcome.summary);

  // One log line per fetched document.
  const std::string pages_log = read_file(dir / "pages.log");
  CHECK(line_count(pages_log) == 2);
  CHECK(pages_log.find(" 200 bytes=") != std::string::npos);

  // Exactly one completed history record.
  const auto records = load_history(history_path(config));
  REQUIRE(records.size() == 1);
  CHECK(records[0].spec == spec);
  CHECK(records[0].outcome == SessionOutcomeKind::completed);
  CHECK(records[0].pages_scanned == 2);
  CHECK(records[0].pages_matched == 1);
  REQUIRE(records[0].report_path);
  CHECK(*records[0].report_path == outcome.report_path->string());
}

TEST_CASE("an unreachable proxy degrades the session instead of failing it") {
  TempDir home;
  RuntimeConfig config = fast_config(home);
  // Nothing listens here; bind-then-close would race, port 1 is enough.
  config.proxy = ProxyEndpoint{"127.0.0.1", 1};
  config.probe_timeout = 500ms;

  const std::string onion_target = "http://" + testkit::test_onion_host('b') + "/";
  const SearchSpec spec =
      make_spec({make_keyword(KeywordKind::text, "leak")}, {onion_target});

  const SessionOutcome outcome = run_session(spec, config);

  REQUIRE(outcome.warnings.size() == 2);
  CHECK(outcome.warnings[0].find("SOCKS5 proxy 127.0.0.1:1 unreachable (") !=
        std::string::npos);
  CHECK(outcome.warnings[0].find("); onion targets will not be fetched") !=
        std::string::npos);
  CHECK(outcome.warnings[1].find("proxy: SOCKS5 proxy 127.0.0.1:1 unavailable; dark "
                                 "targets are never fetched directly") != std::string::npos);

  CHECK(outcome.summary.stats == SessionStats{0, 0, 1});
  CHECK(outcome.summary.matches.empty());
  CHECK(outcome.summary.findings.empty());

  // The session still completes: report, analysis, and history all exist.
  REQUIRE(outcome.report_path);
  CHECK(std::filesystem::exists(*outcome.report_path));
  const auto records = load_history(history_path(config));
  REQUIRE(records.size() == 1);
  CHECK(records[0].outcome == SessionOutcomeKind::completed);
  CHECK(records[0].pages_scanned == 0);
}

TEST_CASE("database failures abort the session and are recorded") {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page("<html><body>x</body></html>");
  testkit::FixtureServer server(corpus);

  TempDir home;
  TempDir empty_dat;
  RuntimeConfig config = fast_config(home);
  config.dat_dir = empty_dat.path();

  const SearchSpec spec =
      make_spec({make_keyword(KeywordKind::text, "x")}, {server.base_url() + "/"});

  CHECK_THROWS_AS(run_session(spec, config), SessionError);

  const auto records = load_history(history_path(config));
  REQUIRE(records.size() == 1);
  CHECK(records[0].spec == spec);
  CHECK(records[0].outcome == SessionOutcomeKind::errored);
  CHECK(records[0].pages_scanned == 0);
  CHECK_FALSE(records[0].report_path);

  // Nothing was fetched before the abort.
  CHECK(server.request_count() == 0);
}

TEST_CASE("storage failures abort after the crawl with counts preserved") {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page("<html><body>beacon text here</body></html>");
  testkit::FixtureServer server(corpus);

  TempDir home;
  // A regular file where the sessions tree must go blocks the page log.
  std::ofstream(home / "sessions", std::ios::binary) << "in the way";

  RuntimeConfig config = fast_config(home);
  const SearchSpec spec =
      make_spec({make_keyword(KeywordKind::text, "beacon")}, {server.base_url() + "/"});

  try {
    run_session(spec, config);
    FAIL("expected SessionError");
  } catch (const SessionError& e) {
    CHECK(std::string(e.what()).find("cannot write page log") != std::string::npos);
  }

  const auto records = load_history(history_path(config));
  REQUIRE(records.size() == 1);
  CHECK(records[0].outcome == SessionOutcomeKind::errored);
  CHECK(records[0].pages_scanned == 1);
  CHECK(records[0].pages_matched == 1);
}

TEST_CASE("report failures degrade to a warning on a completed session") {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page("<html><body>beacon text here</body></html>");
  testkit::FixtureServer server(corpus);

  TempDir home;
  std::ofstream(home / "blocker", std::ios::binary) << "file";

  RuntimeConfig config = fast_config(home);
  config.report_out = home / "blocker" / "report.pdf";

  const SearchSpec spec =
      make_spec({make_keyword(KeywordKind::text, "beacon")}, {server.base_url() + "/"});

  const SessionOutcome outcome = run_session(spec, config);

  CHECK_FALSE(outcome.report_path);
  REQUIRE(outcome.warnings.size() == 1);
  CHECK(outcome.warnings[0].find("report rendering failed: ") == 0);
  CHECK(outcome.warnings[0].find("cannot write report to") != std::string::npos);

  // Summary and page log were still written.
  const auto dir = session_dir(config, spec.session_id);
  CHECK(std::filesystem::exists(dir / kAnalysisFileName));
  CHECK(std::filesystem::exists(dir / "pages.log"));

  const auto records = load_history(history_path(config));
  REQUIRE(records.size() == 1);
  CHECK(records[0].outcome == SessionOutcomeKind::completed);
  CHECK_FALSE(records[0].report_path);
}

TEST_CASE("re-running a session never overwrites its report") {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page("<html><body>stable beacon</body></html>");
  testkit::FixtureServer server(corpus);

  TempDir home;
  const RuntimeConfig config = fast_config(home);
  const SearchSpec spec =
      make_spec({make_keyword(KeywordKind::text, "beacon")}, {server.base_url() + "/"});

  const SessionOutcome first = run_session(spec, config);
  const SessionOutcome second = run_session(spec, config);

  REQUIRE(first.report_path);
  REQUIRE(second.report_path);
  CHECK(first.report_path->filename() == "report_" + spec.session_id + ".pdf");
  CHECK(second.report_path->filename() == "report_" + spec.session_id + "-1.pdf");
  CHECK(std::filesystem::exists(*first.report_path));
  CHECK(std::filesystem::exists(*second.report_path));

  // Same inputs, same analysis, modulo the generation timestamp.
  AnalysisSummary a = first.summary;
  AnalysisSummary b = second.summary;
  a.generated_at.clear();
  b.generated_at.clear();
  CHECK(a == b);

  CHECK(load_history(history_path(config)).size() == 2);
}

TEST_CASE("the cli binary wires the whole pipeline together") {
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page(
      "<html><body>the beacon phrase lives here</body></html>");
  testkit::FixtureServer server(corpus);

  TempDir home;
  TempDir scratch;
  const std::string base = " --home " + home.path().string() + " --dat " +
                           std::string(RECONWATCH_DAT_DIR) + " --delay-ms 10";

  SECTION("scan succeeds and records history") {
    const CliResult scan = run_cli(
        "scan" + base + " -k text=beacon -u " + server.base_url() + "/ --max-depth 0",
        scratch);
    INFO(scan.output);
    REQUIRE(scan.code == 0);
    CHECK(scan.output.find("session ") != std::string::npos);
    CHECK(scan.output.find("pages scanned: 1 (matched 1, errors 0)") != std::string::npos);
    CHECK(scan.output.find("analysis: ") != std::string::npos);
    CHECK(scan.output.find("report: ") != std::string::npos);
    CHECK(scan.output.find("report: not written") == std::string::npos);

    const auto records = load_history(home / "history.json");
    REQUIRE(records.size() == 1);
    CHECK(records[0].outcome == SessionOutcomeKind::completed);

    const CliResult list = run_cli("history list --home " + home.path().string(), scratch);
    REQUIRE(list.code == 0);
    CHECK(list.output.find(records[0].spec.session_id) != std::string::npos);
    CHECK(list.output.find("completed") != std::string::npos);
    CHECK(list.output.find("text=beacon") != std::string::npos);
  }

  SECTION("usage errors exit 1") {
    const CliResult no_keyword =
        run_cli("scan" + base + " -u " + server.base_url() + "/", scratch);
    CHECK(no_keyword.code == 1);
    CHECK(no_keyword.output.find("error: at least one keyword required") !=
          std::string::npos);

    const CliResult bad_flag = run_cli("scan" + base + " --nonsense", scratch);
    CHECK(bad_flag.code == 1);

    const CliResult no_subcommand = run_cli("", scratch);
    CHECK(no_subcommand.code == 1);
  }

  SECTION("runtime failures exit 2") {
    TempDir empty_dat;
    const CliResult broken = run_cli("scan --home " + home.path().string() + " --dat " +
                                         empty_dat.path().string() + " --delay-ms 10" +
                                         " -k text=x -u " + server.base_url() + "/",
                                     scratch);
    CHECK(broken.code == 2);
    CHECK(broken.output.find("error: missing database file") != std::string::npos);
  }

  SECTION("help exits 0") {
    const CliResult help = run_cli("--help", scratch);
    CHECK(help.code == 0);
    CHECK(help.output.find("scan") != std::string::npos);
    CHECK(help.output.find("guided") != std::string::npos);
    CHECK(help.output.find("history") != std::string::npos);
  }

  SECTION("empty history prints a friendly line") {
    TempDir fresh;
    const CliResult list = run_cli("history list --home " + fresh.path().string(), scratch);
    REQUIRE(list.code == 0);
    CHECK(list.output.find("history is empty") != std::string::npos);
  }

  SECTION("guided abort on eof leaves no state") {
    const CliResult aborted = run_cli("guided" + base + " < /dev/null", scratch);
    REQUIRE(aborted.code == 0);
    CHECK(aborted.output.find("aborted") != std::string::npos);
    CHECK(load_history(home / "history.json").empty());
  }
}

TEST_CASE("a declined guided dialogue is recorded as aborted") {
  TempDir home;
  TempDir scratch;
  testkit::FixtureCorpus corpus;
  corpus.pages["/"] = testkit::make_page("<html><body>x</body></html>");
  testkit::FixtureServer server(corpus);

  const std::string script = "text\\nbeacon\\n\\n" + server.base_url() + "/\\n\\n\\n\\nn\\n";
  const std::string cmd = "printf '" + script + "' | " + std::string(RECONWATCH_CLI_PATH) +
                          " guided --home " + home.path().string() + " --dat " +
                          std::string(RECONWATCH_DAT_DIR);
  const auto capture = scratch / "guided_out.txt";
  const int rc = std::system((cmd + " > " + capture.string() + " 2>&1").c_str());
  REQUIRE(WIFEXITED(rc));
  CHECK(WEXITSTATUS(rc) == 0);

  const std::string output = read_file(capture);
  CHECK(output.find("aborted; configuration recorded in history") != std::string::npos);

  const auto records = load_history(home / "history.json");
  REQUIRE(records.size() == 1);
  CHECK(records[0].outcome == SessionOutcomeKind::aborted);
  CHECK(records[0].pages_scanned == 0);
  CHECK_FALSE(records[0].report_path);
  REQUIRE(records[0].spec.keywords.size() == 1);
  CHECK(records[0].spec.keywords[0].value == "beacon");

  // Declining really did stop the crawl.
  CHECK(server.request_count() == 0);
}
