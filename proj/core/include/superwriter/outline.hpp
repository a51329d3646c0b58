#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace superwriter {

struct paragraph_spec {
    int         index = 0; // 1-based, contiguous
    std::string description;
    int         word_count = 0;

    bool operator==(const paragraph_spec &) const = default;
};

struct outline_doc {
    std::string                 title;
    std::vector<paragraph_spec> paragraphs;
};

struct outline_limits {
    int max_paragraphs = 20;
    int max_total_words = 16000;
};

// Accepts numbered or bulleted paragraph lists with a parenthesized or
// trailing word count; entries are renumbered by position so indices come
// out contiguous from 1. Throws errc::outline_unparseable when no entry or
// an entry without a word count is found.
outline_doc parse_outline(std::string_view text);

// Violation message ("25 paragraphs exceed the limit of 20", ...) or empty
// when the outline fits the caps.
std::string outline_violation(const outline_doc & outline, const outline_limits & limits = {});

// Canonical rendering used for prompt bindings and dataset artifacts:
// "Title: ...", then "N. description (W words)" per paragraph.
std::string format_outline(const outline_doc & outline);

int total_word_target(const outline_doc & outline);

void to_json(nlohmann::json & j, const paragraph_spec & p);
void from_json(const nlohmann::json & j, paragraph_spec & p);
void to_json(nlohmann::json & j, const outline_doc & o);
void from_json(const nlohmann::json & j, outline_doc & o);

} // namespace superwriter
