#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace superwriter {

struct chat_message {
    std::string role;
    std::string content;

    bool operator==(const chat_message &) const = default;
};

struct token_usage {
    std::int64_t prompt_tokens     = 0;
    std::int64_t completion_tokens = 0;
};

enum class finish_reason { stop, length, unknown };

struct chat_request {
    std::string               model;
    std::vector<chat_message> messages;
    double                    temperature = 0.6;
    double                    top_p       = 0.95;
    int                       max_tokens  = 8192;
    // Distinguishes repeated samples of an identical prompt; part of the
    // cache identity but never sent over the wire.
    int attempt_tag = 0;
};

struct chat_response {
    std::string   content;
    finish_reason finish = finish_reason::unknown;
    token_usage   usage;
};

std::string sha256_hex(std::string_view data);

// Identity of the message list alone (used by mock scripts to address a
// specific prompt regardless of decoding parameters).
std::string prompt_digest(const std::vector<chat_message> & messages);

// Full cache identity: model, messages, decoding parameters, attempt tag.
std::string request_digest(const chat_request & request);

void to_json(nlohmann::json & j, const chat_message & m);
void from_json(const nlohmann::json & j, chat_message & m);
void to_json(nlohmann::json & j, const chat_response & r);
void from_json(const nlohmann::json & j, chat_response & r);

std::string_view finish_reason_name(finish_reason f);

} // namespace superwriter
