#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "superwriter/errors.hpp"
#include "superwriter/prompt_library.hpp"

using namespace superwriter;

#ifndef SW_PROMPT_SOURCE_DIR
#error "SW_PROMPT_SOURCE_DIR must point at the fixture directory"
#endif

namespace {

std::string slurp(const std::filesystem::path & p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("identity bindings reproduce every template byte for byte") {
    const auto & lib = prompt_library::builtin();
    for (const auto & id : prompt_library::template_ids()) {
        const prompt_template & tpl = lib.get(id);
        std::map<std::string, std::string> bindings;
        for (const auto & slot : tpl.placeholders)
            bindings[slot] = "{" + slot + "}";
        CHECK_MESSAGE(lib.render(id, bindings) == lib.fixture(id), "template: ", id);
    }
}

TEST_CASE("builtin fixtures equal the on-disk fixture files") {
    const auto & lib = prompt_library::builtin();
    for (const auto & entry : std::filesystem::directory_iterator(SW_PROMPT_SOURCE_DIR)) {
        if (entry.path().extension() != ".txt")
            continue;
        const std::string name = entry.path().stem().string();
        CHECK_MESSAGE(lib.fixture(name) == slurp(entry.path()), "fixture: ", name);
    }
}

TEST_CASE("a directory of overrides loads with identical behavior") {
    prompt_library dir_lib = prompt_library::from_dir(SW_PROMPT_SOURCE_DIR);
    const auto &   builtin = prompt_library::builtin();
    for (const auto & id : prompt_library::template_ids()) {
        CHECK(dir_lib.fixture(id) == builtin.fixture(id));
        std::map<std::string, std::string> bindings;
        for (const auto & slot : builtin.get(id).placeholders)
            bindings[slot] = "<" + slot + ">";
        CHECK(dir_lib.render(id, bindings) == builtin.render(id, bindings));
    }
}

TEST_CASE("substitution happens only at registered slots") {
    const auto & lib = prompt_library::builtin();

    std::string rendered = lib.render(
        "brainstorm", {{"topic", "write about tides"}, {"think_template", "THINK-SHAPE"}});
    CHECK(rendered.find("write about tides") != std::string::npos);
    CHECK(rendered.find("THINK-SHAPE") != std::string::npos);
    CHECK(rendered.find("{topic}") == std::string::npos);

    // The writer template ends with a literal $$content$$ example; binding
    // the real slots must leave it untouched.
    std::string writer = lib.render("writer", {{"outline", "O"},
                                               {"previous_paragraphs", "P"},
                                               {"key_point", "K"},
                                               {"thought_response", "T"}});
    CHECK(writer.find("$$content$$") != std::string::npos);
}

TEST_CASE("missing bindings and unknown templates are typed errors") {
    const auto & lib = prompt_library::builtin();
    try {
        lib.render("brainstorm", {});
        FAIL("expected missing_binding");
    } catch (const error & e) {
        CHECK(e.code() == errc::missing_binding);
        CHECK(std::string(e.what()).find("topic") != std::string::npos);
    }
    try {
        lib.get("no_such_template");
        FAIL("expected unknown_template");
    } catch (const error & e) {
        CHECK(e.code() == errc::unknown_template);
    }
}

TEST_CASE("every pipeline template is registered with slots") {
    const auto & lib = prompt_library::builtin();
    const auto & ids = prompt_library::template_ids();
    CHECK(ids.size() >= 16);
    for (const auto & id : ids) {
        CHECK(lib.has(id));
        // The comparison system prompt is constant; everything else binds.
        if (id == "winrate_system")
            CHECK(lib.get(id).placeholders.empty());
        else
            CHECK(!lib.get(id).placeholders.empty());
    }
    // Auxiliary fixtures ride along without being renderable templates.
    CHECK(!lib.fixture("think_template").empty());
    CHECK(!lib.fixture("evaluation_criteria").empty());
    CHECK(!lib.fixture("format_eval").empty());
    CHECK(!lib.fixture("format_query").empty());
}
