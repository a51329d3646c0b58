#include "superwriter/outline.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "superwriter/errors.hpp"

namespace superwriter {

namespace {

std::string trim_copy(const std::string & s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Last "(~300 words)" / "300 words" / "300字" style annotation on the line.
const std::regex k_count_re(
    R"((\(?\s*(?:about|approx\.?|approximately|roughly|around|~)?\s*([0-9][0-9,]*)\s*(?:words|word|字)\s*\)?))",
    std::regex::icase);

// Leading list markers: "1.", "2)", "Paragraph 3:", "-", "*".
const std::regex k_entry_re(
    R"(^\s*(?:[-*•]\s*)?(?:Paragraph\s+)?([0-9]{1,3})?\s*[.):：]?\s*(.*)$)",
    std::regex::icase);

const std::regex k_title_re(R"(^\s*(?:#+\s*)?(?:Article\s+)?Title\s*[:：]\s*(.+?)\s*$)",
                            std::regex::icase);

} // namespace

outline_doc parse_outline(std::string_view text) {
    outline_doc        doc;
    std::istringstream in{ std::string(text) };
    std::string        line;
    bool               saw_line = false;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim_copy(line).empty()) {
            continue;
        }
        saw_line = true;

        std::smatch title_match;
        if (doc.title.empty() && doc.paragraphs.empty() &&
            std::regex_match(line, title_match, k_title_re)) {
            doc.title = title_match[1].str();
            continue;
        }
        if (doc.paragraphs.empty() && !line.empty() && line[0] == '#') {
            // Markdown heading before the first entry doubles as a title.
            doc.title = trim_copy(line.substr(line.find_first_not_of('#')));
            continue;
        }

        // A paragraph entry must carry a word-count annotation; take the
        // last one on the line so numbers in the description survive.
        std::string           body = line;
        std::sregex_iterator  it(body.begin(), body.end(), k_count_re), end;
        std::sregex_iterator  last = end;
        for (; it != end; ++it) {
            last = it;
        }
        if (last == end) {
            continue;
        }

        paragraph_spec spec;
        const std::string digits = [&] {
            std::string d = (*last)[2].str();
            d.erase(std::remove(d.begin(), d.end(), ','), d.end());
            return d;
        }();
        spec.word_count = std::stoi(digits);

        std::string remainder = body.substr(0, last->position(0)) +
                                body.substr(last->position(0) + last->length(0));
        std::smatch entry;
        if (std::regex_match(remainder, entry, k_entry_re)) {
            remainder = entry[2].str();
        }
        remainder = trim_copy(remainder);
        while (!remainder.empty() && (remainder.back() == '-' || remainder.back() == ':' ||
                                      remainder.back() == ',' || remainder.back() == ';')) {
            remainder.pop_back();
            remainder = trim_copy(remainder);
        }
        spec.description = remainder;
        spec.index       = static_cast<int>(doc.paragraphs.size()) + 1;
        doc.paragraphs.push_back(std::move(spec));
    }

    if (doc.paragraphs.empty()) {
        throw_error(errc::outline_unparseable,
                    saw_line ? "no paragraph entries with word counts found"
                             : "outline text is empty");
    }
    for (const auto & p : doc.paragraphs) {
        if (p.word_count < 1) {
            throw_error(errc::outline_unparseable,
                        "paragraph " + std::to_string(p.index) + " has word count 0");
        }
        if (p.description.empty()) {
            throw_error(errc::outline_unparseable,
                        "paragraph " + std::to_string(p.index) + " has no description");
        }
    }
    return doc;
}

int total_word_target(const outline_doc & outline) {
    int total = 0;
    for (const auto & p : outline.paragraphs) {
        total += p.word_count;
    }
    return total;
}

std::string outline_violation(const outline_doc & outline, const outline_limits & limits) {
    const int n = static_cast<int>(outline.paragraphs.size());
    if (n > limits.max_paragraphs) {
        return std::to_string(n) + " paragraphs exceed the limit of " +
               std::to_string(limits.max_paragraphs);
    }
    const int words = total_word_target(outline);
    if (words > limits.max_total_words) {
        return "total word target " + std::to_string(words) + " exceeds the limit of " +
               std::to_string(limits.max_total_words);
    }
    return "";
}

std::string format_outline(const outline_doc & outline) {
    std::string out = "Title: " + outline.title + "\n";
    for (const auto & p : outline.paragraphs) {
        out += std::to_string(p.index) + ". " + p.description + " (" +
               std::to_string(p.word_count) + " words)\n";
    }
    return out;
}

void to_json(nlohmann::json & j, const paragraph_spec & p) {
    j = nlohmann::json{ { "index", p.index },
                        { "description", p.description },
                        { "word_count", p.word_count } };
}

void from_json(const nlohmann::json & j, paragraph_spec & p) {
    j.at("index").get_to(p.index);
    j.at("description").get_to(p.description);
    j.at("word_count").get_to(p.word_count);
}

void to_json(nlohmann::json & j, const outline_doc & o) {
    j = nlohmann::json{ { "title", o.title }, { "paragraphs", o.paragraphs } };
}

void from_json(const nlohmann::json & j, outline_doc & o) {
    j.at("title").get_to(o.title);
    j.at("paragraphs").get_to(o.paragraphs);
}

} // namespace superwriter
