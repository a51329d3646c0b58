#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace superwriter {

enum class errc {
    // gateway
    endpoint_unreachable,
    malformed_response,
    budget_exceeded,
    cache_corrupt,
    // prompt library
    unknown_template,
    missing_binding,
    // extraction
    delimiter_missing,
    empty_payload,
    no_json_found,
    json_malformed,
    marker_missing,
    // writing agent
    outline_unparseable,
    constraint_violated,
    stage_incomplete,
    // judge
    rubric_unparseable,
    rubric_shape_invalid,
    score_unparseable,
    score_out_of_range,
    // preference forest
    size_mismatch,
    incomplete_tree,
    unscored_leaf,
    degenerate_level,
    non_finite_input,
    // win-rate evaluation
    empty_input,
    mismatched_ids,
    // dataset
    category_unrecognized,
    token_budget_exceeded,
    incomplete_trace,
    // cli / run management
    usage_error,
    config_invalid,
    manifest_conflict,
    io_failure,
};

std::string_view errc_name(errc code);

// Single exception type for the whole library; `code` carries the machine-
// readable identity, the message the human-readable specifics.
class error : public std::runtime_error {
  public:
    error(errc code, const std::string & message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void throw_error(errc code, const std::string & message) {
    throw error(code, message);
}

} // namespace superwriter
