#include "preflab/llm/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace preflab::llm {

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_sec_(std::max(0.0, requests_per_minute) / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(capacity_),
      last_(Clock::now()) {}

void RateLimiter::refill(Clock::time_point now) {
  const double dt = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(capacity_, tokens_ + dt * rate_per_sec_);
  last_ = now;
}

bool RateLimiter::try_acquire() {
  if (rate_per_sec_ <= 0.0) return true;
  std::lock_guard lock(mutex_);
  refill(Clock::now());
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void RateLimiter::acquire() {
  if (rate_per_sec_ <= 0.0) return;
  for (;;) {
    double wait_s;
    {
      std::lock_guard lock(mutex_);
      refill(Clock::now());
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait_s = (1.0 - tokens_) / rate_per_sec_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
  }
}

}  // namespace preflab::llm
