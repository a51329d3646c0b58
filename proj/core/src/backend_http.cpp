#include "superwriter/http_backend.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "superwriter/errors.hpp"

namespace superwriter {

struct http_backend::impl {
    http_backend_options             options;
    std::unique_ptr<httplib::Client> client;
};

http_backend::http_backend(http_backend_options options) : impl_(std::make_unique<impl>()) {
    impl_->options = std::move(options);
    impl_->client  = std::make_unique<httplib::Client>(impl_->options.base_url);
    impl_->client->set_connection_timeout(impl_->options.connect_timeout_s, 0);
    impl_->client->set_read_timeout(impl_->options.read_timeout_s, 0);
    if (!impl_->options.api_key.empty()) {
        impl_->client->set_default_headers(
            { { "Authorization", "Bearer " + impl_->options.api_key } });
    }
}

http_backend::~http_backend() = default;

chat_response http_backend::complete(const chat_request & request) {
    nlohmann::json body;
    body["model"] = request.model;
    auto & msgs = body["messages"] = nlohmann::json::array();
    for (const auto & m : request.messages) {
        msgs.push_back({ { "role", m.role }, { "content", m.content } });
    }
    body["temperature"] = request.temperature;
    body["top_p"]       = request.top_p;
    body["max_tokens"]  = request.max_tokens;

    auto res = impl_->client->Post(impl_->options.path, body.dump(), "application/json");
    if (!res) {
        throw_error(errc::endpoint_unreachable,
                    impl_->options.base_url + ": " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw_error(errc::endpoint_unreachable,
                    impl_->options.base_url + ": HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        // Auth and request errors will not improve on retry.
        throw_error(errc::malformed_response,
                    "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 256));
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error & e) {
        throw_error(errc::malformed_response, std::string("reply is not JSON: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw_error(errc::malformed_response, "reply has no choices");
    }
    const auto & choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) {
        throw_error(errc::malformed_response, "reply has no message content");
    }

    chat_response resp;
    resp.content = choice["message"]["content"].get<std::string>();
    const std::string fin = choice.value("finish_reason", "stop");
    resp.finish = fin == "length" ? finish_reason::length
                : fin == "stop"   ? finish_reason::stop
                                  : finish_reason::unknown;
    if (doc.contains("usage")) {
        resp.usage.prompt_tokens     = doc["usage"].value("prompt_tokens", std::int64_t{ 0 });
        resp.usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{ 0 });
    }
    return resp;
}

} // namespace superwriter
