#include "biaskit/core/retry.hpp"

#include <algorithm>
#include <thread>

namespace biaskit {

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
  auto delay = policy.base_delay;
  for (int i = 0; i < attempt && delay < policy.max_delay; ++i) delay *= 2;
  return std::min(delay, policy.max_delay);
}

RateLimiter::RateLimiter(double per_second, Sleeper sleeper) : sleeper_(std::move(sleeper)) {
  if (per_second > 0) {
    enabled_ = true;
    interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / per_second));
  }
}

void RateLimiter::acquire(std::string_view host) {
  if (!enabled_) return;
  Clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = Clock::now();
    auto it = next_slot_.find(host);
    if (it == next_slot_.end()) it = next_slot_.emplace(std::string(host), now).first;
    slot = std::max(it->second, now);
    it->second = slot + interval_;
  }
  const auto wait = slot - Clock::now();
  if (wait > Clock::duration::zero())
    sleeper_(std::chrono::ceil<std::chrono::milliseconds>(wait));
}

}  // namespace biaskit
