#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reconwatch/commando.hpp"
#include "reconwatch/guided.hpp"
#include "reconwatch/pipeline.hpp"

namespace rw = reconwatch;

namespace {

struct RuntimeFlags {
  std::string home;
  std::string dat_dir = "dat";
  std::string proxy;
  int pool_size = 8;
  long delay_ms = 1000;
  long timeout_ms = 30000;
};

void register_runtime_flags(CLI::App& app, RuntimeFlags& rt) {
  app.add_option("--home", rt.home,
                 "state directory holding history.json and sessions/ "
                 "(default: $RECONWATCH_HOME or the working directory)");
  app.add_option("--dat", rt.dat_dir,
                 "directory containing mitre.json and cve.json (default: dat)");
  app.add_option("--proxy", rt.proxy,
                 "SOCKS5 host:port for .onion targets "
                 "(default: $RECONWATCH_PROXY or 127.0.0.1:9050)");
  app.add_option("--pool-size", rt.pool_size, "concurrent fetch workers (default: 8)");
  app.add_option("--delay-ms", rt.delay_ms,
                 "per-host politeness delay in milliseconds (default: 1000)");
  app.add_option("--timeout-ms", rt.timeout_ms,
                 "per-request timeout in milliseconds (default: 30000)");
}

std::filesystem::path resolve_home(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(rw::kHomeEnvVar); env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

rw::RuntimeConfig make_config(const RuntimeFlags& rt,
                              const std::optional<std::string>& out_path) {
  if (rt.pool_size < 1) throw rw::UsageError("--pool-size must be at least 1");
  if (rt.delay_ms < 0) throw rw::UsageError("--delay-ms must be non-negative");
  if (rt.timeout_ms < 1) throw rw::UsageError("--timeout-ms must be positive");
  rw::RuntimeConfig config;
  config.home = resolve_home(rt.home);
  config.dat_dir = rt.dat_dir;
  config.proxy = rt.proxy.empty() ? rw::proxy_from_env() : rw::ProxyEndpoint::parse(rt.proxy);
  config.pool_size = rt.pool_size;
  config.per_host_delay = std::chrono::milliseconds(rt.delay_ms);
  config.timeout = std::chrono::milliseconds(rt.timeout_ms);
  if (out_path) config.report_out = *out_path;
  return config;
}

int execute_session(const rw::SearchSpec& spec, const rw::RuntimeConfig& config) {
  std::cout << "session " << spec.session_id << "\n";
  const rw::SessionOutcome outcome = rw::run_session(spec, config);
  for (const auto& warning : outcome.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  const auto& stats = outcome.summary.stats;
  std::cout << "pages scanned: " << stats.pages_scanned << " (matched "
            << stats.pages_matched << ", errors " << stats.pages_errored << ")\n"
            << "findings: " << outcome.summary.findings.size() << "\n"
            << "analysis: "
            << (rw::session_dir(config, spec.session_id) / rw::kAnalysisFileName).string()
            << "\n";
  if (outcome.report_path) {
    std::cout << "report: " << outcome.report_path->string() << "\n";
  } else {
    std::cout << "report: not written\n";
  }
  return rw::kExitOk;
}

int cmd_scan(const rw::ScanFlagValues& vals, const RuntimeFlags& rt) {
  const rw::ScanRequest req = rw::build_scan_request(vals);
  const rw::RuntimeConfig config = make_config(rt, req.out_path);
  const rw::SearchSpec spec =
      rw::finalize_spec(req.draft, rw::make_session_id(), rw::utc_now_string());
  return execute_session(spec, config);
}

int cmd_guided(const RuntimeFlags& rt, const std::string& out_flag) {
  const rw::RuntimeConfig config = make_config(
      rt, out_flag.empty() ? std::nullopt : std::optional<std::string>(out_flag));
  const rw::GuidedOutcome guided = rw::run_guided(std::cin, std::cout);
  if (!guided.draft) {
    std::cout << "\naborted\n";
    return rw::kExitOk;
  }
  const rw::SearchSpec spec =
      rw::finalize_spec(*guided.draft, rw::make_session_id(), rw::utc_now_string());
  if (!guided.confirmed) {
    rw::HistoryRecord rec;
    rec.spec = spec;
    rec.outcome = rw::SessionOutcomeKind::aborted;
    rw::append_history(rec, rw::history_path(config));
    std::cout << "aborted; configuration recorded in history\n";
    return rw::kExitOk;
  }
  return execute_session(spec, config);
}

int cmd_history_list(const std::string& home_flag) {
  const auto store = resolve_home(home_flag) / std::filesystem::path("history.json");
  const auto records = rw::load_history(store);
  if (records.empty()) {
    std::cout << "history is empty\n";
    return rw::kExitOk;
  }
  for (const auto& rec : records) {
    std::cout << rec.spec.session_id << "  " << rec.spec.created_at << "  "
              << rw::to_string(rec.outcome) << "  scanned=" << rec.pages_scanned
              << " matched=" << rec.pages_matched << "  keywords=";
    for (std::size_t i = 0; i < rec.spec.keywords.size(); ++i) {
      if (i > 0) std::cout << ",";
      std::cout << rw::to_string(rec.spec.keywords[i].kind) << "="
                << rec.spec.keywords[i].value;
    }
    if (rec.report_path) std::cout << "  report=" << *rec.report_path;
    std::cout << "\n";
  }
  return rw::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keyword reconnaissance across surface and onion targets, "
               "correlated against local MITRE ATT&CK and CVE data"};
  app.require_subcommand(1);

  auto* scan = app.add_subcommand("scan", "run a scan configured entirely from flags");
  rw::ScanFlagValues scan_vals;
  RuntimeFlags scan_rt;
  rw::register_scan_flags(*scan, scan_vals);
  register_runtime_flags(*scan, scan_rt);

  auto* guided = app.add_subcommand("guided", "configure a scan through prompts");
  RuntimeFlags guided_rt;
  std::string guided_out;
  register_runtime_flags(*guided, guided_rt);
  guided->add_option("-o,--out", guided_out, "report output path");

  auto* history = app.add_subcommand("history", "inspect recorded sessions");
  history->require_subcommand(1);
  auto* history_list = history->add_subcommand("list", "print every recorded session");
  std::string history_home;
  history_list->add_option("--home", history_home,
                           "state directory (default: $RECONWATCH_HOME or the "
                           "working directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? rw::kExitOk : rw::kExitUsage;
  }

  try {
    if (scan->parsed()) return cmd_scan(scan_vals, scan_rt);
    if (guided->parsed()) return cmd_guided(guided_rt, guided_out);
    if (history_list->parsed()) return cmd_history_list(history_home);
  } catch (const rw::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rw::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rw::kExitRuntime;
  }
  return rw::kExitOk;
}
