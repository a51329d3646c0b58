#pragma once

#include <memory>
#include <string>

#include "superwriter/backend.hpp"

namespace superwriter {

struct http_backend_options {
    std::string base_url;              // e.g. "https://api.example.com" or "http://127.0.0.1:8089"
    std::string path = "/v1/chat/completions";
    std::string api_key;               // sent as "Authorization: Bearer ..." when non-empty
    int         connect_timeout_s = 10;
    int         read_timeout_s    = 300;
};

// Chat-completions client: posts {model, messages, temperature, top_p,
// max_tokens} and reads choices[0].message.content. Transport failures and
// 429/5xx statuses throw errc::endpoint_unreachable (retryable); an
// unparseable body throws errc::malformed_response.
class http_backend : public chat_backend {
  public:
    explicit http_backend(http_backend_options options);
    ~http_backend() override;

    chat_response complete(const chat_request & request) override;

  private:
    struct impl;
    std::unique_ptr<impl> impl_;
};

} // namespace superwriter
