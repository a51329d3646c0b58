#include "superwriter/prompt_library.hpp"

#include <utility>

#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"

namespace superwriter {

namespace {

struct embedded_fixture {
    const char * name;
    const char * text;
};

const embedded_fixture k_embedded[] = {
#include "prompt_fixtures.inc"
};

const std::map<std::string, std::vector<std::string>, std::less<>> & slot_table() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> table = {
        { "brainstorm", { "topic", "think_template" } },
        { "brainstorm_review", { "topic", "task_output" } },
        { "brainstorm_refine", { "task_output", "feedback" } },
        { "outline", { "task_define_result", "topic" } },
        { "check_outline", { "task_define_result", "outline" } },
        { "refine_outline", { "check_output", "outline" } },
        { "write_thinker", { "outline", "previous_paragraphs", "key_point" } },
        { "writer", { "outline", "previous_paragraphs", "key_point", "thought_response" } },
        { "paragraph_review", { "idx+1", "combined_document" } },
        { "paragraph_modify", { "review_feedback", "updated_document[idx]" } },
        { "judge_criteria_select", { "evaluation_criteria", "query", "format_query" } },
        { "judge_score", { "query", "clean_res", "evaluate_standard", "format_eval" } },
        { "winrate_system", {} },
        { "winrate_user", { "query", "response_a", "response_b" } },
        { "lenpred_step1", { "query" } },
        { "lenpred_step2", { "query" } },
    };
    return table;
}

} // namespace

const std::vector<std::string> & prompt_library::template_ids() {
    static const std::vector<std::string> ids = {
        "brainstorm",        "brainstorm_review", "brainstorm_refine",
        "outline",           "check_outline",     "refine_outline",
        "write_thinker",     "writer",
        "paragraph_review",  "paragraph_modify",
        "judge_criteria_select", "judge_score",
        "winrate_system",    "winrate_user",
        "lenpred_step1",     "lenpred_step2",
    };
    return ids;
}

void prompt_library::index_templates() {
    templates_.clear();
    for (const auto & id : template_ids()) {
        auto it = fixtures_.find(id);
        if (it == fixtures_.end()) {
            throw_error(errc::unknown_template, "fixture for template '" + id + "' not found");
        }
        prompt_template t;
        t.id           = id;
        t.body         = it->second;
        t.placeholders = slot_table().at(id);
        templates_.emplace(id, std::move(t));
    }
}

const prompt_library & prompt_library::builtin() {
    static const prompt_library lib = [] {
        prompt_library l;
        for (const auto & f : k_embedded) {
            l.fixtures_.emplace(f.name, f.text);
        }
        l.index_templates();
        return l;
    }();
    return lib;
}

prompt_library prompt_library::from_dir(const std::filesystem::path & dir) {
    prompt_library lib;
    if (!std::filesystem::is_directory(dir)) {
        throw_error(errc::io_failure, "prompt directory not found: " + dir.string());
    }
    for (const auto & entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".txt") {
            lib.fixtures_[entry.path().stem().string()] = read_text_file(entry.path());
        }
    }
    lib.index_templates();
    return lib;
}

bool prompt_library::has(std::string_view id) const {
    return templates_.find(id) != templates_.end();
}

const prompt_template & prompt_library::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) {
        throw_error(errc::unknown_template, std::string(id));
    }
    return it->second;
}

const std::string & prompt_library::fixture(std::string_view name) const {
    auto it = fixtures_.find(name);
    if (it == fixtures_.end()) {
        throw_error(errc::unknown_template, "fixture '" + std::string(name) + "' not found");
    }
    return it->second;
}

std::string prompt_library::render(std::string_view id,
                                   const std::map<std::string, std::string> & bindings) const {
    const prompt_template & tpl = get(id);
    for (const auto & name : tpl.placeholders) {
        if (bindings.find(name) == bindings.end()) {
            throw_error(errc::missing_binding,
                        "template '" + tpl.id + "' requires {" + name + "}");
        }
    }

    // Single left-to-right pass; substituted values are never rescanned, so
    // slot-shaped text inside a bound value stays literal.
    std::string out;
    out.reserve(tpl.body.size());
    const std::string & body = tpl.body;
    size_t              pos  = 0;
    while (pos < body.size()) {
        const size_t brace = body.find('{', pos);
        if (brace == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        out.append(body, pos, brace - pos);
        const size_t close   = body.find('}', brace + 1);
        bool         matched = false;
        if (close != std::string::npos) {
            const std::string name = body.substr(brace + 1, close - brace - 1);
            auto              it   = bindings.find(name);
            if (it != bindings.end()) {
                out += it->second;
                pos     = close + 1;
                matched = true;
            }
        }
        if (!matched) {
            out += '{';
            pos = brace + 1;
        }
    }
    return out;
}

} // namespace superwriter
