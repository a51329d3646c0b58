#pragma once

#include "superwriter/chat_types.hpp"

namespace superwriter {

class chat_backend {
  public:
    virtual ~chat_backend() = default;

    // Completes one request or throws (errc::endpoint_unreachable /
    // errc::malformed_response). Transient failures are retried by the
    // gateway, not here.
    virtual chat_response complete(const chat_request & request) = 0;
};

} // namespace superwriter
