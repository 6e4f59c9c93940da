#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <unordered_map>

namespace reconwatch {

// Per-host request spacing shared by all fetch workers. Each reservation
// returns how long the caller must wait so that consecutive requests to
// the same host stay at least per_host_delay apart. Distinct hosts never
// delay each other.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  std::chrono::milliseconds rate_limit_wait(const std::string& host,
                                            Clock::time_point now,
                                            std::chrono::milliseconds per_host_delay) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = next_slot_.try_emplace(host, now);
    const Clock::time_point slot = inserted ? now : std::max(now, it->second);
    it->second = slot + per_host_delay;
    return std::chrono::duration_cast<std::chrono::milliseconds>(slot - now);
  }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, Clock::time_point> next_slot_;
};

}  // namespace reconwatch
