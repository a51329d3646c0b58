#include "superwriter/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include "superwriter/errors.hpp"

namespace superwriter {

namespace {

constexpr std::string_view k_delim = "$$";

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

} // namespace

std::string_view length_category_name(length_category c) {
    switch (c) {
        case length_category::lt2000: return "Less than 2000 words";
        case length_category::w2000:  return "2000 words";
        case length_category::w4000:  return "4000 words";
        case length_category::w8000:  return "8000 words";
        case length_category::w16000: return "16000 words";
    }
    return "";
}

length_category length_category_from_name(std::string_view name) {
    static const std::array<length_category, 5> all = {
        length_category::lt2000, length_category::w2000, length_category::w4000,
        length_category::w8000, length_category::w16000
    };
    for (auto c : all) {
        if (iequals(name, length_category_name(c))) {
            return c;
        }
    }
    // Accept the enum-style short names used in config files.
    if (iequals(name, "LT2000")) return length_category::lt2000;
    if (iequals(name, "W2000"))  return length_category::w2000;
    if (iequals(name, "W4000"))  return length_category::w4000;
    if (iequals(name, "W8000"))  return length_category::w8000;
    if (iequals(name, "W16000")) return length_category::w16000;
    throw_error(errc::category_unrecognized, "'" + std::string(name) + "'");
}

std::string_view pair_verdict_marker(pair_verdict v) {
    switch (v) {
        case pair_verdict::a_much_better: return "[[A>>B]]";
        case pair_verdict::a_better:      return "[[A>B]]";
        case pair_verdict::tie:           return "[[A=B]]";
        case pair_verdict::b_better:      return "[[B>A]]";
        case pair_verdict::b_much_better: return "[[B>>A]]";
    }
    return "";
}

delimited_extraction extract_delimited(std::string_view text) {
    const size_t first = text.find(k_delim);
    if (first == std::string_view::npos) {
        throw_error(errc::delimiter_missing, "no $$ delimiter in reply");
    }
    const size_t open  = first + k_delim.size();
    const size_t close = text.find(k_delim, open);
    if (close == std::string_view::npos) {
        throw_error(errc::delimiter_missing, "unterminated $$ delimiter in reply");
    }

    delimited_extraction result;

    // Count any additional delimiter pairs after the first for diagnostics.
    size_t pairs = 1;
    size_t pos   = close + k_delim.size();
    while (true) {
        const size_t a = text.find(k_delim, pos);
        if (a == std::string_view::npos) {
            break;
        }
        const size_t b = text.find(k_delim, a + k_delim.size());
        if (b == std::string_view::npos) {
            result.diagnostics.push_back("unpaired trailing delimiter at offset " +
                                         std::to_string(a));
            break;
        }
        ++pairs;
        pos = b + k_delim.size();
    }
    if (pairs > 1) {
        result.diagnostics.push_back(std::to_string(pairs) + " delimited spans found");
    }

    std::string_view inner = text.substr(open, close - open);
    std::string_view kept  = trim(inner);
    if (kept.empty()) {
        throw_error(errc::empty_payload, "delimited span is empty");
    }
    result.begin   = open + (kept.data() - inner.data());
    result.end     = result.begin + kept.size();
    result.payload = std::string(kept);
    return result;
}

namespace {

// Candidate [begin, end) spans of fenced code blocks, in order.
std::vector<std::pair<size_t, size_t>> fenced_spans(std::string_view text) {
    std::vector<std::pair<size_t, size_t>> spans;
    size_t pos = 0;
    while (true) {
        const size_t open = text.find("```", pos);
        if (open == std::string_view::npos) {
            break;
        }
        size_t body = open + 3;
        // Skip an info string such as "json" up to end of line.
        const size_t eol = text.find('\n', body);
        if (eol == std::string_view::npos) {
            break;
        }
        body = eol + 1;
        const size_t close = text.find("```", body);
        if (close == std::string_view::npos) {
            break;
        }
        spans.emplace_back(body, close);
        pos = close + 3;
    }
    return spans;
}

// Brace-balanced candidate spans, largest first. Tracks JSON string
// context so braces inside quoted text do not end a span.
std::vector<std::pair<size_t, size_t>> balanced_spans(std::string_view text) {
    std::vector<std::pair<size_t, size_t>> spans;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') {
            continue;
        }
        int  depth     = 0;
        bool in_string = false;
        bool escaped   = false;
        for (size_t j = i; j < text.size(); ++j) {
            const char c = text[j];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    spans.emplace_back(i, j + 1);
                    break;
                }
            }
        }
    }
    std::stable_sort(spans.begin(), spans.end(), [](const auto & a, const auto & b) {
        return (a.second - a.first) > (b.second - b.first);
    });
    return spans;
}

} // namespace

json_extraction extract_json_block(std::string_view text) {
    std::string first_parse_error;

    auto try_span = [&](size_t begin, size_t end) -> std::optional<json_extraction> {
        const std::string_view span = text.substr(begin, end - begin);
        try {
            json_extraction result;
            result.doc   = nlohmann::json::parse(span);
            result.begin = begin;
            result.end   = end;
            return result;
        } catch (const nlohmann::json::parse_error & e) {
            if (first_parse_error.empty()) {
                first_parse_error = e.what();
            }
            return std::nullopt;
        }
    };

    const auto fences = fenced_spans(text);
    for (const auto & [begin, end] : fences) {
        if (auto r = try_span(begin, end)) {
            return *r;
        }
    }
    for (const auto & [begin, end] : balanced_spans(text)) {
        if (auto r = try_span(begin, end)) {
            if (!fences.empty()) {
                r->diagnostics.push_back("fenced block unparseable; used balanced span");
            }
            return *r;
        }
    }

    if (!first_parse_error.empty()) {
        throw_error(errc::json_malformed, first_parse_error);
    }
    throw_error(errc::no_json_found, "reply contains no JSON block");
}

bool parse_yes_no(std::string_view reply) {
    // Case-insensitive search for the sigil plus Yes/No word; last wins.
    size_t best_pos = std::string_view::npos;
    bool   best_val = false;
    size_t pos      = 0;
    while (true) {
        const size_t at = reply.find("#*#", pos);
        if (at == std::string_view::npos) {
            break;
        }
        size_t cursor = at + 3;
        while (cursor < reply.size() && (reply[cursor] == ' ' || reply[cursor] == '\t')) {
            ++cursor;
        }
        if (cursor + 3 <= reply.size() && iequals(reply.substr(cursor, 3), "Yes")) {
            best_pos = at;
            best_val = true;
        } else if (cursor + 2 <= reply.size() && iequals(reply.substr(cursor, 2), "No")) {
            best_pos = at;
            best_val = false;
        }
        pos = at + 3;
    }
    if (best_pos == std::string_view::npos) {
        throw_error(errc::marker_missing, "no #*# Yes / #*# No marker in reply");
    }
    return best_val;
}

length_category parse_category(std::string_view reply) {
    constexpr std::string_view tag  = "### Category:";
    const size_t               last = reply.rfind(tag);
    if (last == std::string_view::npos) {
        throw_error(errc::marker_missing, "no ### Category: marker in reply");
    }
    std::string_view rest = reply.substr(last + tag.size());
    const size_t     eol  = rest.find('\n');
    if (eol != std::string_view::npos) {
        rest = rest.substr(0, eol);
    }
    std::string_view value = trim(rest);
    // Strip surrounding quotes/parentheses and a trailing period.
    while (!value.empty() && (value.front() == '"' || value.front() == '(' ||
                              value.front() == '\'' )) {
        value.remove_prefix(1);
    }
    while (!value.empty() && (value.back() == '"' || value.back() == ')' ||
                              value.back() == '\'' || value.back() == '.')) {
        value.remove_suffix(1);
    }
    value = trim(value);
    return length_category_from_name(value);
}

pair_verdict parse_verdict(std::string_view reply) {
    static const std::array<pair_verdict, 5> all = {
        pair_verdict::a_much_better, pair_verdict::a_better, pair_verdict::tie,
        pair_verdict::b_better, pair_verdict::b_much_better
    };
    size_t       best_pos = std::string_view::npos;
    pair_verdict best     = pair_verdict::tie;
    for (auto v : all) {
        const size_t at = reply.rfind(pair_verdict_marker(v));
        if (at != std::string_view::npos &&
            (best_pos == std::string_view::npos || at > best_pos)) {
            best_pos = at;
            best     = v;
        }
    }
    if (best_pos == std::string_view::npos) {
        throw_error(errc::marker_missing, "no [[..]] verdict marker in reply");
    }
    return best;
}

marker_value parse_marker(std::string_view reply, marker_kind kind) {
    switch (kind) {
        case marker_kind::yes_no:   return parse_yes_no(reply);
        case marker_kind::category: return parse_category(reply);
        case marker_kind::verdict:  return parse_verdict(reply);
    }
    throw_error(errc::marker_missing, "unknown marker kind");
}

} // namespace superwriter
