#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace reconwatch {

inline constexpr const char* kToolName = "reconwatch";
inline constexpr const char* kToolVersion = "1.0.0";

// Sent on every outbound request; identifies the crawler and a contact point.
inline constexpr const char* kUserAgent =
    "reconwatch/1.0 (+https://reconwatch.example/about)";

inline constexpr const char* kHomeEnvVar = "RECONWATCH_HOME";
inline constexpr const char* kProxyEnvVar = "RECONWATCH_PROXY";

// Exit codes for the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Bad flags, malformed keywords, missing required input. Maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/invalid data files, storage failures. Maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-recoverable session failure after fail-soft handling. Maps to exit code 2.
class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string utc_now_string() {
  return format_utc(std::chrono::system_clock::now());
}

// Compact timestamp used in session ids: 20250101T000000Z.
inline std::string format_utc_compact(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[24];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// UTC timestamp plus six random hex chars: sortable and collision-safe
// for a single operator.
inline std::string make_session_id(
    std::chrono::system_clock::time_point now = std::chrono::system_clock::now()) {
  static constexpr char hex[] = "0123456789abcdef";
  std::random_device rd;
  std::string suffix;
  for (int i = 0; i < 6; ++i) suffix += hex[rd() % 16];
  return format_utc_compact(now) + "-" + suffix;
}

}  // namespace reconwatch
