#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "superwriter/backend.hpp"

namespace superwriter {

// One scripted reply rule. Rules are matched in order against either the
// prompt digest or the concatenated message text; the first match wins.
struct mock_rule {
    // Matchers (set exactly one): digest of the message list, literal
    // substring, or ECMAScript regex over the concatenated contents.
    std::string digest;
    std::string contains;
    std::string regex;

    // Literal reply; "{attempt}" and "{digest8}" are substituted with the
    // request's attempt tag and the first 8 hex chars of its prompt digest.
    std::string reply;

    // "literal" (default) or "score_json": emit a fenced JSON object with
    // one {Analysis, Score} entry per name in `criteria`, scores derived
    // deterministically from the prompt digest and attempt tag.
    std::string              mode = "literal";
    std::vector<std::string> criteria;

    finish_reason finish = finish_reason::stop;

    // First `fail_times` requests hitting this rule throw a transient
    // endpoint error (for retry tests).
    int fail_times = 0;
};

struct mock_script {
    std::vector<mock_rule> rules;
    std::string            default_reply;

    static mock_script from_json(const nlohmann::json & j);
    static mock_script load(const std::filesystem::path & file);
};

// Deterministic scripted backend: identical (messages, attempt_tag) pairs
// always produce identical replies. Instrumented with an invocation counter
// and a request history so tests can assert call counts and inspect the
// rendered prompts that reached the backend.
class mock_backend : public chat_backend {
  public:
    explicit mock_backend(mock_script script);

    chat_response complete(const chat_request & request) override;

    std::int64_t invocation_count() const { return invocations_.load(); }
    std::vector<chat_request> history() const;

    // Optional per-request delay in milliseconds (deterministic function of
    // the request); used to exercise concurrent completion ordering.
    void set_latency_fn(std::function<int(const chat_request &)> fn);

  private:
    mock_script                              script_;
    std::atomic<std::int64_t>                invocations_{ 0 };
    mutable std::mutex                       mu_;
    std::vector<chat_request>                history_;
    std::vector<std::atomic<int>>            failures_left_;
    std::function<int(const chat_request &)> latency_;
};

// Scores in [0, 10] with two decimals, derived from (digest, attempt, name).
double mock_score_value(const std::string & digest, int attempt, const std::string & name);

} // namespace superwriter
