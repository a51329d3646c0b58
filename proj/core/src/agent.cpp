#include "superwriter/agent.hpp"

#include "superwriter/errors.hpp"
#include "superwriter/extract.hpp"
#include "superwriter/jsonl.hpp"

namespace superwriter {

namespace fs = std::filesystem;

namespace {

constexpr const char * k_outline_reask =
    "The previous outline could not be used. Provide a revised outline with numbered "
    "paragraphs, a word count for every paragraph, at most 20 paragraphs, and a total "
    "word target of at most 16,000 words.";

constexpr const char * k_delimiter_reask =
    "Your previous reply did not enclose the paragraph content in $$...$$. Reply again "
    "with the full paragraph enclosed like $$content$$.";

} // namespace

std::string plan_outline_text(const plan_record & plan) {
    return format_outline(outline_doc{ plan.title, plan.outline_final });
}

std::string draft_text(const draft_document & draft) {
    std::string out;
    for (size_t i = 0; i < draft.paragraphs.size(); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += draft.paragraphs[i].content;
    }
    return out;
}

std::string refined_text(const refined_document & refined) {
    std::string out;
    for (size_t i = 0; i < refined.paragraphs.size(); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += refined.paragraphs[i];
    }
    return out;
}

std::string combine_previous(const std::vector<draft_paragraph> & paragraphs, int upto) {
    std::string out;
    for (int i = 0; i < upto && i < static_cast<int>(paragraphs.size()); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += paragraphs[i].content;
    }
    return out;
}

std::string combined_document(const std::vector<std::string> & paragraphs) {
    std::string out;
    for (size_t i = 0; i < paragraphs.size(); ++i) {
        if (i > 0) {
            out += "\n\n";
        }
        out += "Paragraph " + std::to_string(i + 1) + ":\n" + paragraphs[i];
    }
    return out;
}

std::string key_point_text(const paragraph_spec & spec) {
    return "Paragraph " + std::to_string(spec.index) + ": " + spec.description + " (" +
           std::to_string(spec.word_count) + " words)";
}

writing_agent::writing_agent(gateway & gw, const prompt_library & lib, agent_options options)
    : gw_(&gw), lib_(&lib), options_(std::move(options)) {}

chat_response writing_agent::ask(const std::string & label, const std::string & prompt,
                                 int attempt_tag, call_trace * trace) const {
    chat_request request;
    request.model       = options_.model;
    request.messages    = { { "user", prompt } };
    request.temperature = options_.temperature;
    request.top_p       = options_.top_p;
    request.max_tokens  = options_.max_tokens;
    request.attempt_tag = attempt_tag;

    chat_response resp = gw_->complete(request);
    if (trace) {
        trace->push_back({ label, attempt_tag, request.messages, resp.content });
    }
    return resp;
}

std::string writing_agent::ask_delimited(const std::string & label, const std::string & prompt,
                                         int attempt_tag, int paragraph,
                                         call_trace * trace) const {
    chat_response first = ask(label, prompt, attempt_tag, trace);
    try {
        return extract_delimited(first.content).payload;
    } catch (const error &) {
        if (!options_.reask) {
            throw_error(errc::delimiter_missing,
                        label + " reply for paragraph " + std::to_string(paragraph) +
                            " has no $$ payload");
        }
    }

    chat_request request;
    request.model       = options_.model;
    request.messages    = { { "user", prompt },
                            { "assistant", first.content },
                            { "user", k_delimiter_reask } };
    request.temperature = options_.temperature;
    request.top_p       = options_.top_p;
    request.max_tokens  = options_.max_tokens;
    request.attempt_tag = attempt_tag;
    chat_response retry = gw_->complete(request);
    if (trace) {
        trace->push_back({ label + "/reask", attempt_tag, request.messages, retry.content });
    }
    try {
        return extract_delimited(retry.content).payload;
    } catch (const error &) {
        throw_error(errc::delimiter_missing,
                    label + " reply for paragraph " + std::to_string(paragraph) +
                        " has no $$ payload after re-ask");
    }
}

plan_record writing_agent::run_plan(const writing_query & query, int attempt_tag,
                                    call_trace * trace) const {
    plan_record plan;

    plan.brainstorm =
        ask("brainstorm",
            lib_->render("brainstorm", { { "topic", query.text },
                                         { "think_template", lib_->fixture("think_template") } }),
            attempt_tag, trace)
            .content;

    plan.review_feedback =
        ask("brainstorm_review",
            lib_->render("brainstorm_review",
                         { { "topic", query.text }, { "task_output", plan.brainstorm } }),
            attempt_tag, trace)
            .content;

    plan.refined_design =
        ask("brainstorm_refine",
            lib_->render("brainstorm_refine", { { "task_output", plan.brainstorm },
                                                { "feedback", plan.review_feedback } }),
            attempt_tag, trace)
            .content;

    // Outline steps parse into paragraph specs and enforce the caps; one
    // corrective re-ask before the typed failure.
    auto outline_step = [&](const std::string & label, const std::string & prompt)
        -> std::pair<outline_doc, std::string> {
        chat_response first = ask(label, prompt, attempt_tag, trace);
        std::string   violation;
        try {
            outline_doc doc = parse_outline(first.content);
            violation       = outline_violation(doc, options_.limits);
            if (violation.empty()) {
                return { doc, first.content };
            }
        } catch (const error &) {
            if (!options_.reask) {
                throw;
            }
        }
        if (!options_.reask && !violation.empty()) {
            throw_error(errc::constraint_violated, label + ": " + violation);
        }

        chat_request request;
        request.model       = options_.model;
        request.messages    = { { "user", prompt },
                                { "assistant", first.content },
                                { "user", k_outline_reask } };
        request.temperature = options_.temperature;
        request.top_p       = options_.top_p;
        request.max_tokens  = options_.max_tokens;
        request.attempt_tag = attempt_tag;
        chat_response retry = gw_->complete(request);
        if (trace) {
            trace->push_back({ label + "/reask", attempt_tag, request.messages, retry.content });
        }
        outline_doc doc = parse_outline(retry.content); // throws outline_unparseable
        violation       = outline_violation(doc, options_.limits);
        if (!violation.empty()) {
            throw_error(errc::constraint_violated, label + ": " + violation);
        }
        return { doc, retry.content };
    };

    auto [outline_first, outline_first_raw] = outline_step(
        "outline", lib_->render("outline", { { "task_define_result", plan.refined_design },
                                             { "topic", query.text } }));
    plan.outline = outline_first.paragraphs;
    if (plan.title.empty()) {
        plan.title = outline_first.title;
    }

    plan.outline_feedback =
        ask("check_outline",
            lib_->render("check_outline", { { "task_define_result", plan.refined_design },
                                            { "outline", outline_first_raw } }),
            attempt_tag, trace)
            .content;

    auto [outline_final, outline_final_raw] = outline_step(
        "refine_outline", lib_->render("refine_outline", { { "check_output", plan.outline_feedback },
                                                           { "outline", outline_first_raw } }));
    plan.outline_final = outline_final.paragraphs;
    if (!outline_final.title.empty()) {
        plan.title = outline_final.title;
    }
    return plan;
}

draft_document writing_agent::run_write(const plan_record & plan, int attempt_tag,
                                        call_trace * trace) const {
    if (plan.outline_final.empty()) {
        throw_error(errc::stage_incomplete, "plan has no final outline");
    }
    const std::string outline_text = plan_outline_text(plan);

    draft_document draft;
    for (const auto & spec : plan.outline_final) {
        const std::string previous = combine_previous(draft.paragraphs, spec.index - 1);
        const std::string thought =
            ask("write_thinker/" + std::to_string(spec.index),
                lib_->render("write_thinker", { { "outline", outline_text },
                                                { "previous_paragraphs", previous },
                                                { "key_point", key_point_text(spec) } }),
                attempt_tag, trace)
                .content;

        const std::string content = ask_delimited(
            "writer/" + std::to_string(spec.index),
            lib_->render("writer", { { "outline", outline_text },
                                     { "previous_paragraphs", previous },
                                     { "key_point", key_point_text(spec) },
                                     { "thought_response", thought } }),
            attempt_tag, spec.index, trace);

        draft.paragraphs.push_back({ spec.index, thought, content });
    }
    return draft;
}

refined_document writing_agent::run_refine(const draft_document & draft, int attempt_tag,
                                           call_trace * trace) const {
    if (draft.paragraphs.empty()) {
        throw_error(errc::stage_incomplete, "draft has no paragraphs");
    }

    refined_document refined;
    for (const auto & p : draft.paragraphs) {
        refined.paragraphs.push_back(p.content);
    }

    for (size_t idx = 0; idx < refined.paragraphs.size(); ++idx) {
        const std::string position = std::to_string(idx + 1);
        const std::string feedback =
            ask("paragraph_review/" + position,
                lib_->render("paragraph_review",
                             { { "idx+1", position },
                               { "combined_document", combined_document(refined.paragraphs) } }),
                attempt_tag, trace)
                .content;

        const std::string revised = ask_delimited(
            "paragraph_modify/" + position,
            lib_->render("paragraph_modify",
                         { { "review_feedback", feedback },
                           { "updated_document[idx]", refined.paragraphs[idx] } }),
            attempt_tag, static_cast<int>(idx + 1), trace);

        refined.paragraphs[idx] = revised;
        refined.revision_log.push_back({ static_cast<int>(idx + 1), feedback, revised });
    }
    return refined;
}

agent_run writing_agent::run_full(const writing_query & query, int attempt_tag) const {
    agent_run run;
    run.query   = query;
    run.plan    = run_plan(query, attempt_tag, &run.trace);
    run.draft   = run_write(run.plan, attempt_tag, &run.trace);
    run.refined = run_refine(run.draft, attempt_tag, &run.trace);
    return run;
}

void to_json(nlohmann::json & j, const writing_query & q) {
    j = nlohmann::json{ { "id", q.id }, { "text", q.text }, { "language", q.language } };
}

void from_json(const nlohmann::json & j, writing_query & q) {
    j.at("id").get_to(q.id);
    j.at("text").get_to(q.text);
    q.language = j.value("language", "en");
}

void to_json(nlohmann::json & j, const plan_record & p) {
    j = nlohmann::json{ { "brainstorm", p.brainstorm },
                        { "review_feedback", p.review_feedback },
                        { "refined_design", p.refined_design },
                        { "title", p.title },
                        { "outline", p.outline },
                        { "outline_feedback", p.outline_feedback },
                        { "outline_final", p.outline_final } };
}

void from_json(const nlohmann::json & j, plan_record & p) {
    j.at("brainstorm").get_to(p.brainstorm);
    j.at("review_feedback").get_to(p.review_feedback);
    j.at("refined_design").get_to(p.refined_design);
    j.at("title").get_to(p.title);
    j.at("outline").get_to(p.outline);
    j.at("outline_feedback").get_to(p.outline_feedback);
    j.at("outline_final").get_to(p.outline_final);
}

void to_json(nlohmann::json & j, const draft_document & d) {
    auto paragraphs = nlohmann::json::array();
    for (const auto & p : d.paragraphs) {
        paragraphs.push_back({ { "index", p.index }, { "think", p.think },
                               { "content", p.content } });
    }
    j = nlohmann::json{ { "paragraphs", paragraphs } };
}

void from_json(const nlohmann::json & j, draft_document & d) {
    d.paragraphs.clear();
    for (const auto & pj : j.at("paragraphs")) {
        draft_paragraph p;
        pj.at("index").get_to(p.index);
        pj.at("think").get_to(p.think);
        pj.at("content").get_to(p.content);
        d.paragraphs.push_back(std::move(p));
    }
}

void to_json(nlohmann::json & j, const refined_document & r) {
    auto log = nlohmann::json::array();
    for (const auto & e : r.revision_log) {
        log.push_back({ { "index", e.index },
                        { "review_feedback", e.review_feedback },
                        { "revised_content", e.revised_content } });
    }
    j = nlohmann::json{ { "paragraphs", r.paragraphs }, { "revision_log", log } };
}

void from_json(const nlohmann::json & j, refined_document & r) {
    j.at("paragraphs").get_to(r.paragraphs);
    r.revision_log.clear();
    for (const auto & ej : j.at("revision_log")) {
        revision_entry e;
        ej.at("index").get_to(e.index);
        ej.at("review_feedback").get_to(e.review_feedback);
        ej.at("revised_content").get_to(e.revised_content);
        r.revision_log.push_back(std::move(e));
    }
}

void to_json(nlohmann::json & j, const call_record & c) {
    j = nlohmann::json{ { "label", c.label },
                        { "attempt_tag", c.attempt_tag },
                        { "messages", c.messages },
                        { "reply", c.reply } };
}

void from_json(const nlohmann::json & j, call_record & c) {
    j.at("label").get_to(c.label);
    j.at("attempt_tag").get_to(c.attempt_tag);
    j.at("messages").get_to(c.messages);
    j.at("reply").get_to(c.reply);
}

void save_run(const fs::path & dir, const agent_run & run) {
    fs::create_directories(dir);
    write_json_file(dir / "query.json", run.query);
    write_json_file(dir / "plan.json", run.plan);
    write_json_file(dir / "draft.json", run.draft);
    write_json_file(dir / "refined.json", run.refined);
    std::vector<nlohmann::json> trace;
    trace.reserve(run.trace.size());
    for (const auto & c : run.trace) {
        trace.push_back(c);
    }
    write_jsonl(dir / "trace.jsonl", trace);
}

agent_run load_run(const fs::path & dir) {
    for (const char * name : { "query.json", "plan.json", "draft.json", "refined.json" }) {
        if (!fs::exists(dir / name)) {
            throw_error(errc::incomplete_trace, (dir / name).string() + " is missing");
        }
    }
    agent_run run;
    run.query   = read_json_file(dir / "query.json").get<writing_query>();
    run.plan    = read_json_file(dir / "plan.json").get<plan_record>();
    run.draft   = read_json_file(dir / "draft.json").get<draft_document>();
    run.refined = read_json_file(dir / "refined.json").get<refined_document>();
    if (fs::exists(dir / "trace.jsonl")) {
        for (const auto & j : read_jsonl(dir / "trace.jsonl")) {
            run.trace.push_back(j.get<call_record>());
        }
    }
    return run;
}

} // namespace superwriter
