#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "superwriter/gateway.hpp"
#include "superwriter/outline.hpp"
#include "superwriter/prompt_library.hpp"

namespace superwriter {

struct writing_query {
    std::string id;
    std::string text;
    std::string language = "en"; // "en" or "zh"; text flows through unmodified
};

struct plan_record {
    std::string brainstorm;
    std::string review_feedback;
    std::string refined_design;
    std::string title;
    std::vector<paragraph_spec> outline;       // parsed from the first outline reply
    std::string outline_feedback;
    std::vector<paragraph_spec> outline_final; // parsed from the refined outline
};

struct draft_paragraph {
    int         index = 0; // 1-based
    std::string think;
    std::string content;
};

struct draft_document {
    std::vector<draft_paragraph> paragraphs;
};

struct revision_entry {
    int         index = 0; // 1-based
    std::string review_feedback;
    std::string revised_content;
};

struct refined_document {
    std::vector<std::string>    paragraphs;   // final contents, in order
    std::vector<revision_entry> revision_log; // one entry per paragraph pass
};

// One model call as issued: rendered messages plus the raw reply.
struct call_record {
    std::string               label;
    int                       attempt_tag = 0;
    std::vector<chat_message> messages;
    std::string               reply;
};

using call_trace = std::vector<call_record>;

struct agent_run {
    writing_query    query;
    plan_record      plan;
    draft_document   draft;
    refined_document refined;
    call_trace       trace;
};

struct agent_options {
    std::string model       = "mock";
    double      temperature = 0.6;
    double      top_p       = 0.95;
    int         max_tokens  = 8192;
    // One corrective re-ask before a typed failure (unparseable outline,
    // cap violation, missing $$ delimiter).
    bool           reask  = true;
    outline_limits limits = {};
};

// Canonical text assemblies shared by prompts, preference pairs, and
// dataset records; chaining equality depends on these being the single
// source of these byte sequences.
std::string plan_outline_text(const plan_record & plan);
std::string draft_text(const draft_document & draft);
std::string refined_text(const refined_document & refined);
std::string combine_previous(const std::vector<draft_paragraph> & paragraphs, int upto);
std::string combined_document(const std::vector<std::string> & paragraphs);
std::string key_point_text(const paragraph_spec & spec);

class writing_agent {
  public:
    writing_agent(gateway & gw, const prompt_library & lib, agent_options options = {});

    // Stage 1: brainstorm, review, refine, outline, check, refine outline.
    plan_record run_plan(const writing_query & query, int attempt_tag = 0,
                         call_trace * trace = nullptr) const;

    // Stage 2: per paragraph, a thinking pass then a writing pass; each
    // writer prompt carries all previously written paragraphs.
    draft_document run_write(const plan_record & plan, int attempt_tag = 0,
                             call_trace * trace = nullptr) const;

    // Stage 3: per paragraph in order, review against the current full
    // document, then an in-place revision.
    refined_document run_refine(const draft_document & draft, int attempt_tag = 0,
                                call_trace * trace = nullptr) const;

    agent_run run_full(const writing_query & query, int attempt_tag = 0) const;

    const agent_options & options() const { return options_; }

  private:
    chat_response ask(const std::string & label, const std::string & prompt, int attempt_tag,
                      call_trace * trace) const;
    std::string ask_delimited(const std::string & label, const std::string & prompt,
                              int attempt_tag, int paragraph, call_trace * trace) const;

    gateway *              gw_;
    const prompt_library * lib_;
    agent_options          options_;
};

void to_json(nlohmann::json & j, const writing_query & q);
void from_json(const nlohmann::json & j, writing_query & q);
void to_json(nlohmann::json & j, const plan_record & p);
void from_json(const nlohmann::json & j, plan_record & p);
void to_json(nlohmann::json & j, const draft_document & d);
void from_json(const nlohmann::json & j, draft_document & d);
void to_json(nlohmann::json & j, const refined_document & r);
void from_json(const nlohmann::json & j, refined_document & r);
void to_json(nlohmann::json & j, const call_record & c);
void from_json(const nlohmann::json & j, call_record & c);

// Run directory layout: plan.json, draft.json, refined.json, trace.jsonl.
void save_run(const std::filesystem::path & dir, const agent_run & run);
agent_run load_run(const std::filesystem::path & dir); // throws incomplete_trace

} // namespace superwriter
