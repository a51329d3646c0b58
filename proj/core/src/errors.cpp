#include "superwriter/errors.hpp"

namespace superwriter {

std::string_view errc_name(errc code) {
    switch (code) {
        case errc::endpoint_unreachable:  return "EndpointUnreachable";
        case errc::malformed_response:    return "MalformedResponse";
        case errc::budget_exceeded:       return "BudgetExceeded";
        case errc::cache_corrupt:         return "CacheCorrupt";
        case errc::unknown_template:      return "UnknownTemplate";
        case errc::missing_binding:       return "MissingBinding";
        case errc::delimiter_missing:     return "DelimiterMissing";
        case errc::empty_payload:         return "EmptyPayload";
        case errc::no_json_found:         return "NoJsonFound";
        case errc::json_malformed:        return "JsonMalformed";
        case errc::marker_missing:        return "MarkerMissing";
        case errc::outline_unparseable:   return "OutlineUnparseable";
        case errc::constraint_violated:   return "ConstraintViolated";
        case errc::stage_incomplete:      return "StageIncomplete";
        case errc::rubric_unparseable:    return "RubricUnparseable";
        case errc::rubric_shape_invalid:  return "RubricShapeInvalid";
        case errc::score_unparseable:     return "ScoreUnparseable";
        case errc::score_out_of_range:    return "ScoreOutOfRange";
        case errc::size_mismatch:         return "SizeMismatch";
        case errc::incomplete_tree:       return "IncompleteTree";
        case errc::unscored_leaf:         return "UnscoredLeaf";
        case errc::degenerate_level:      return "DegenerateLevel";
        case errc::non_finite_input:      return "NonFiniteInput";
        case errc::empty_input:           return "EmptyInput";
        case errc::mismatched_ids:        return "MismatchedIds";
        case errc::category_unrecognized: return "CategoryUnrecognized";
        case errc::token_budget_exceeded: return "TokenBudgetExceeded";
        case errc::incomplete_trace:      return "IncompleteTrace";
        case errc::usage_error:           return "UsageError";
        case errc::config_invalid:        return "ConfigInvalid";
        case errc::manifest_conflict:     return "ManifestConflict";
        case errc::io_failure:            return "IoFailure";
    }
    return "UnknownError";
}

} // namespace superwriter
