#include "superwriter/gateway.hpp"

#include <chrono>
#include <exception>
#include <thread>

#include "superwriter/errors.hpp"

namespace superwriter {

gateway::gateway(std::shared_ptr<chat_backend> backend, response_cache cache,
                 gateway_options options)
    : backend_(std::move(backend)), cache_(std::move(cache)), options_(options) {}

void gateway::charge_call() {
    if (options_.max_calls > 0 && backend_calls_.load() >= options_.max_calls) {
        throw_error(errc::budget_exceeded,
                    "call budget of " + std::to_string(options_.max_calls) + " exhausted");
    }
    if (options_.max_tokens > 0 && tokens_.load() >= options_.max_tokens) {
        throw_error(errc::budget_exceeded,
                    "token budget of " + std::to_string(options_.max_tokens) + " exhausted");
    }
}

chat_response gateway::complete(const chat_request & request) {
    const std::string key = request_digest(request);
    if (auto hit = cache_.get(key)) {
        cache_hits_.fetch_add(1);
        return *hit;
    }

    const int          attempts = options_.retry_limit > 0 ? options_.retry_limit : 1;
    std::exception_ptr last;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        charge_call();
        backend_calls_.fetch_add(1);
        try {
            chat_response resp = backend_->complete(request);
            tokens_.fetch_add(resp.usage.prompt_tokens + resp.usage.completion_tokens);
            cache_.put(key, resp);
            return resp;
        } catch (const error & e) {
            if (e.code() == errc::budget_exceeded) {
                throw;
            }
            last = std::current_exception();
        }
        if (options_.backoff_ms > 0 && attempt + 1 < attempts) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(options_.backoff_ms << attempt));
        }
    }
    std::rethrow_exception(last);
}

std::vector<chat_response> gateway::complete_many(const std::vector<chat_request> & requests,
                                                  int max_in_flight) {
    const size_t n = requests.size();
    std::vector<chat_response> results(n);
    if (n == 0) {
        return results;
    }
    if (max_in_flight < 1) {
        max_in_flight = 1;
    }

    std::atomic<size_t>             next{ 0 };
    std::atomic<std::int64_t>       first_failed{ static_cast<std::int64_t>(n) };
    std::vector<std::exception_ptr> failures(n);

    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                results[i] = complete(requests[i]);
            } catch (...) {
                failures[i] = std::current_exception();
                std::int64_t expect = first_failed.load();
                while (static_cast<std::int64_t>(i) < expect &&
                       !first_failed.compare_exchange_weak(expect, static_cast<std::int64_t>(i))) {
                }
            }
        }
    };

    const size_t             workers = std::min(static_cast<size_t>(max_in_flight), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (auto & t : pool) {
        t.join();
    }

    const auto failed = first_failed.load();
    if (failed < static_cast<std::int64_t>(n)) {
        try {
            std::rethrow_exception(failures[static_cast<size_t>(failed)]);
        } catch (const error & e) {
            throw error(e.code(), "request " + std::to_string(failed) + ": " + e.what());
        }
    }
    return results;
}

} // namespace superwriter
