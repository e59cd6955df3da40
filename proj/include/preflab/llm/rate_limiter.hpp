#pragma once

#include <chrono>
#include <mutex>

namespace preflab::llm {

/// Token bucket gating request admission. Callers block in acquire() until
/// a token is available; execution afterwards is not serialized.
class RateLimiter {
public:
  using Clock = std::chrono::steady_clock;

  /// requests_per_minute <= 0 disables limiting.
  explicit RateLimiter(double requests_per_minute, double burst = 1.0);

  void acquire();
  /// Non-blocking variant; true when a token was taken.
  bool try_acquire();

  double requests_per_minute() const { return rate_per_sec_ * 60.0; }

private:
  void refill(Clock::time_point now);

  double rate_per_sec_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mutex_;
};

}  // namespace preflab::llm
