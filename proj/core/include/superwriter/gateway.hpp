#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "superwriter/backend.hpp"
#include "superwriter/cache.hpp"

namespace superwriter {

struct gateway_options {
    int retry_limit = 3;  // total attempts per request
    int backoff_ms  = 250; // base for exponential backoff; 0 disables sleeping
    // 0 = unlimited. Budgets count backend work only; cache hits are free.
    std::int64_t max_calls  = 0;
    std::int64_t max_tokens = 0;
};

// Front door for all model traffic: consult the cache, otherwise call the
// backend with retry/backoff, then persist the response. Thread-safe.
class gateway {
  public:
    gateway(std::shared_ptr<chat_backend> backend, response_cache cache = {},
            gateway_options options = {});

    // Cache hit returns the stored response without touching the backend.
    chat_response complete(const chat_request & request);

    // Completes a batch with at most max_in_flight requests outstanding;
    // the result vector is index-aligned with the input. If any request
    // ultimately fails, the failure with the lowest index is rethrown
    // (message prefixed with "request <i>") after the rest settle.
    std::vector<chat_response> complete_many(const std::vector<chat_request> & requests,
                                             int max_in_flight);

    std::int64_t backend_calls() const { return backend_calls_.load(); }
    std::int64_t cache_hits() const { return cache_hits_.load(); }
    std::int64_t token_total() const { return tokens_.load(); }

    const response_cache & cache() const { return cache_; }

  private:
    void charge_call();

    std::shared_ptr<chat_backend> backend_;
    response_cache                cache_;
    gateway_options               options_;
    std::atomic<std::int64_t>     backend_calls_{ 0 };
    std::atomic<std::int64_t>     cache_hits_{ 0 };
    std::atomic<std::int64_t>     tokens_{ 0 };
};

} // namespace superwriter
