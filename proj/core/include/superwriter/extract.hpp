#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace superwriter {

// Word-count bucket for a writing query.
enum class length_category { lt2000, w2000, w4000, w8000, w16000 };

// Pairwise comparison verdict, from the judge's point of view (A vs B).
enum class pair_verdict { a_much_better, a_better, tie, b_better, b_much_better };

std::string_view length_category_name(length_category c);
length_category length_category_from_name(std::string_view name); // throws category_unrecognized
std::string_view pair_verdict_marker(pair_verdict v);

struct delimited_extraction {
    std::string payload;      // trimmed text between the first $$ pair
    size_t      begin = 0;    // [begin, end) of the trimmed payload in the source
    size_t      end   = 0;
    std::vector<std::string> diagnostics;
};

// First-pair rule over the $$ delimiter: the payload is whatever sits
// between the first two delimiters; later pairs are reported, not used.
// Total on arbitrary input: returns a payload or throws a typed error
// (errc::delimiter_missing, errc::empty_payload).
delimited_extraction extract_delimited(std::string_view text);

struct json_extraction {
    nlohmann::json doc;
    size_t         begin = 0; // [begin, end) of the parsed span in the source
    size_t         end   = 0;
    std::vector<std::string> diagnostics;
};

// Parses the first fenced ```json block; when no fenced block parses, falls
// back to the largest brace-balanced span that does. Throws
// errc::no_json_found / errc::json_malformed.
json_extraction extract_json_block(std::string_view text);

enum class marker_kind { yes_no, category, verdict };

using marker_value = std::variant<bool, length_category, pair_verdict>;

// Last-occurrence rule: the marker closest to the end of the reply wins, so
// prompts echoed back or markers quoted mid-reply do not confuse parsing.
// yes_no:   "#*# Yes" / "#*# No"            -> bool
// category: "### Category: <name>"          -> length_category
// verdict:  "[[A>>B]]" .. "[[B>>A]]"        -> pair_verdict
marker_value parse_marker(std::string_view reply, marker_kind kind);

bool parse_yes_no(std::string_view reply);
length_category parse_category(std::string_view reply);
pair_verdict parse_verdict(std::string_view reply);

} // namespace superwriter
