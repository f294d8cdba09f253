#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace biaskit {

using Sleeper = std::function<void(std::chrono::milliseconds)>;

Sleeper real_sleeper();

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30000};
  std::chrono::milliseconds timeout{30000};
};

// base_delay * 2^attempt, capped at max_delay. attempt counts from 0.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt);

// Spaces requests to the same host at least 1/per_second apart.
// per_second <= 0 disables limiting. Thread-safe.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second, Sleeper sleeper = real_sleeper());

  void acquire(std::string_view host);

 private:
  using Clock = std::chrono::steady_clock;

  Clock::duration interval_{};
  bool enabled_ = false;
  Sleeper sleeper_;
  std::mutex mu_;
  std::map<std::string, Clock::time_point, std::less<>> next_slot_;
};

}  // namespace biaskit
