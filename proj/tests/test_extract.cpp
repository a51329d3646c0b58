#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "superwriter/errors.hpp"
#include "superwriter/extract.hpp"

using namespace superwriter;

#define CHECK_ERRC(expr, code_)                                                                    \
    do {                                                                                           \
        try {                                                                                      \
            (void)(expr);                                                                          \
            FAIL("expected a typed error");                                                        \
        } catch (const error & e) {                                                                \
            CHECK(e.code() == (code_));                                                            \
        }                                                                                          \
    } while (0)

TEST_CASE("delimited payload comes from the first $$ pair") {
    CHECK(extract_delimited("$$payload$$").payload == "payload");
    CHECK(extract_delimited("prefix $$ inner text $$ suffix").payload == "inner text");
    CHECK(extract_delimited("a\n$$line one\nline two$$\nb").payload == "line one\nline two");

    auto multi = extract_delimited("$$first$$ and $$second$$");
    CHECK(multi.payload == "first");
    CHECK(!multi.diagnostics.empty());
}

TEST_CASE("delimited extraction failures are typed") {
    CHECK_ERRC(extract_delimited("no markers at all"), errc::delimiter_missing);
    CHECK_ERRC(extract_delimited("$$unclosed"), errc::delimiter_missing);
    CHECK_ERRC(extract_delimited("$$$$"), errc::empty_payload);
    CHECK_ERRC(extract_delimited("$$   \n $$"), errc::empty_payload);
}

TEST_CASE("fenced json is preferred, balanced spans are the fallback") {
    auto fenced = extract_json_block("noise\n```json\n{\"a\": 1}\n```\nmore");
    CHECK(fenced.doc["a"] == 1);

    auto bare = extract_json_block("reply: {\"b\": [1, 2, {\"c\": 3}]} trailing");
    CHECK(bare.doc["b"][2]["c"] == 3);

    auto broken_fence = extract_json_block("```json\n{not json\n```\nbut {\"d\": 4} later");
    CHECK(broken_fence.doc["d"] == 4);

    auto braces_in_strings = extract_json_block(R"({"s": "curly } inside", "t": 1})");
    CHECK(braces_in_strings.doc["t"] == 1);
}

TEST_CASE("json extraction failures are typed") {
    CHECK_ERRC(extract_json_block("plain prose, nothing structured"), errc::no_json_found);
    CHECK_ERRC(extract_json_block("{\"a\": }"), errc::json_malformed);
}

TEST_CASE("yes/no marker: last occurrence wins, case-insensitive") {
    CHECK(parse_yes_no("Reasoning... #*# Yes") == true);
    CHECK(parse_yes_no("Reasoning... #*# No") == false);
    CHECK(parse_yes_no("#*# yes") == true);
    CHECK(parse_yes_no("#*# Yes early, revised: #*# No") == false);
    CHECK(parse_yes_no("#*# No at first\nthinking more\n#*# Yes") == true);
    CHECK_ERRC(parse_yes_no("never commits to an answer"), errc::marker_missing);
    CHECK_ERRC(parse_yes_no("#*# Maybe"), errc::marker_missing);
}

TEST_CASE("category marker strips quotes and maps published names") {
    CHECK(parse_category("### Category: 4000 words") == length_category::w4000);
    CHECK(parse_category("### Category: \"2000 words\"") == length_category::w2000);
    CHECK(parse_category("### Category: 'Less than 2000 words'") == length_category::lt2000);
    CHECK(parse_category("### Category: (16000 words).") == length_category::w16000);
    CHECK(parse_category("### Category: 8000 words\ntrailing prose") == length_category::w8000);
    CHECK(parse_category("### Category: 2000 words\n### Category: 8000 words") ==
          length_category::w8000);

    CHECK_ERRC(parse_category("no marker here"), errc::marker_missing);
    CHECK_ERRC(parse_category("### Category: 3000 words"), errc::category_unrecognized);
}

TEST_CASE("category names round-trip, including config-style short names") {
    for (auto c : {length_category::lt2000, length_category::w2000, length_category::w4000,
                   length_category::w8000, length_category::w16000}) {
        CHECK(length_category_from_name(length_category_name(c)) == c);
    }
    CHECK(length_category_from_name("W4000") == length_category::w4000);
    CHECK(length_category_from_name("lt2000") == length_category::lt2000);
    CHECK_ERRC(length_category_from_name("w3000"), errc::category_unrecognized);
}

TEST_CASE("verdict marker: all five forms, last occurrence wins") {
    CHECK(parse_verdict("... [[A>>B]]") == pair_verdict::a_much_better);
    CHECK(parse_verdict("... [[A>B]]") == pair_verdict::a_better);
    CHECK(parse_verdict("... [[A=B]]") == pair_verdict::tie);
    CHECK(parse_verdict("... [[B>A]]") == pair_verdict::b_better);
    CHECK(parse_verdict("... [[B>>A]]") == pair_verdict::b_much_better);

    CHECK(parse_verdict("first [[A>B]] then reconsidering [[B>A]]") == pair_verdict::b_better);
    CHECK(parse_verdict("verdict format is [[A>B]] etc. Final: [[A=B]]") == pair_verdict::tie);
    CHECK_ERRC(parse_verdict("no verdict anywhere"), errc::marker_missing);

    for (auto v : {pair_verdict::a_much_better, pair_verdict::a_better, pair_verdict::tie,
                   pair_verdict::b_better, pair_verdict::b_much_better}) {
        CHECK(parse_verdict(std::string("Final: ") + std::string(pair_verdict_marker(v))) == v);
    }
}

TEST_CASE("marker corpora parse with full success") {
    const std::vector<std::pair<std::string, bool>> yesno = {
        {"Short factual lookup. #*# No", false},
        {"Multi-part survey with sections. #*# Yes", true},
        {"Leaning no... actually the scope is wide. #*# Yes", true},
        {"#*#\tNo", false},
    };
    for (const auto & [text, want] : yesno)
        CHECK(parse_yes_no(text) == want);

    const std::vector<std::pair<std::string, length_category>> cats = {
        {"Answer: brief. ### Category: Less than 2000 words", length_category::lt2000},
        {"Answer: moderate. ### Category: 2000 words", length_category::w2000},
        {"Answer: deep dive. ### Category: \"8000 words\"", length_category::w8000},
        {"Answer: book-scale. ### Category: 16000 words", length_category::w16000},
    };
    for (const auto & [text, want] : cats)
        CHECK(parse_category(text) == want);

    const std::vector<std::pair<std::string, pair_verdict>> verdicts = {
        {"A is thorough, B thin.\n\nMy final verdict is: [[A>>B]]", pair_verdict::a_much_better},
        {"Close call, A edges it. [[A>B]]", pair_verdict::a_better},
        {"Equally strong. My final verdict is tie: [[A=B]]", pair_verdict::tie},
        {"B lands the brief better. [[B>A]]", pair_verdict::b_better},
        {"B is far stronger on every axis. [[B>>A]]", pair_verdict::b_much_better},
    };
    for (const auto & [text, want] : verdicts)
        CHECK(parse_verdict(text) == want);
}
