#include "superwriter/chat_types.hpp"

#include <openssl/evp.h>

#include "superwriter/errors.hpp"

namespace superwriter {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int  len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);

    static const char hex[] = "0123456789abcdef";
    std::string       out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string prompt_digest(const std::vector<chat_message> & messages) {
    std::string buf;
    for (const auto & m : messages) {
        buf += m.role;
        buf += '\x1f';
        buf += m.content;
        buf += '\x1e';
    }
    return sha256_hex(buf);
}

std::string request_digest(const chat_request & request) {
    nlohmann::json j;
    j["model"] = request.model;
    auto & msgs = j["messages"] = nlohmann::json::array();
    for (const auto & m : request.messages) {
        msgs.push_back({ { "role", m.role }, { "content", m.content } });
    }
    j["temperature"] = request.temperature;
    j["top_p"]       = request.top_p;
    j["max_tokens"]  = request.max_tokens;
    j["attempt_tag"] = request.attempt_tag;
    return sha256_hex(j.dump());
}

void to_json(nlohmann::json & j, const chat_message & m) {
    j = nlohmann::json{ { "role", m.role }, { "content", m.content } };
}

void from_json(const nlohmann::json & j, chat_message & m) {
    j.at("role").get_to(m.role);
    j.at("content").get_to(m.content);
}

void to_json(nlohmann::json & j, const chat_response & r) {
    j = nlohmann::json{
        { "content", r.content },
        { "finish_reason", std::string(finish_reason_name(r.finish)) },
        { "usage",
          { { "prompt_tokens", r.usage.prompt_tokens },
            { "completion_tokens", r.usage.completion_tokens } } },
    };
}

void from_json(const nlohmann::json & j, chat_response & r) {
    j.at("content").get_to(r.content);
    const std::string f = j.value("finish_reason", "unknown");
    if (f == "stop") {
        r.finish = finish_reason::stop;
    } else if (f == "length") {
        r.finish = finish_reason::length;
    } else {
        r.finish = finish_reason::unknown;
    }
    if (j.contains("usage")) {
        r.usage.prompt_tokens     = j["usage"].value("prompt_tokens", std::int64_t{ 0 });
        r.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{ 0 });
    }
}

std::string_view finish_reason_name(finish_reason f) {
    switch (f) {
        case finish_reason::stop:   return "stop";
        case finish_reason::length: return "length";
        case finish_reason::unknown: break;
    }
    return "unknown";
}

} // namespace superwriter
