#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "superwriter/agent.hpp"
#include "superwriter/errors.hpp"
#include "superwriter/mock_backend.hpp"
#include "support/testenv.hpp"

using namespace superwriter;

namespace {

struct rig {
    std::shared_ptr<mock_backend> backend;
    gateway                       gw;
    writing_agent                 agent;

    explicit rig(mock_script script, agent_options opts = {})
        : backend(std::make_shared<mock_backend>(std::move(script))),
          gw(backend),
          agent(gw, prompt_library::builtin(), opts) {}
};

const writing_query k_query{"q1", "Write a short story about a lighthouse keeper.", "en"};

} // namespace

TEST_CASE("stage 1 runs six calls and fills every plan field") {
    rig        r(testenv::pipeline_script());
    call_trace trace;
    plan_record plan = r.agent.run_plan(k_query, 4, &trace);

    CHECK(r.backend->invocation_count() == 6);
    REQUIRE(trace.size() == 6);
    const char * labels[] = {"brainstorm",     "brainstorm_review", "brainstorm_refine",
                             "outline",        "check_outline",     "refine_outline"};
    for (size_t i = 0; i < 6; ++i) {
        CHECK(trace[i].label == labels[i]);
        CHECK(trace[i].attempt_tag == 4);
        CHECK(!trace[i].reply.empty());
    }

    CHECK(plan.brainstorm.find("v4") != std::string::npos); // attempt tag reached the script
    CHECK(!plan.review_feedback.empty());
    CHECK(!plan.refined_design.empty());
    CHECK(plan.title.find("Scripted Piece") == 0);
    CHECK(plan.outline.size() == 3);
    CHECK(!plan.outline_feedback.empty());
    CHECK(plan.outline_final.size() == 3);
    CHECK(plan.outline_final[1].word_count == 120);
}

TEST_CASE("stage 1 chains each call on the previous replies") {
    rig        r(testenv::pipeline_script());
    call_trace trace;
    plan_record plan = r.agent.run_plan(k_query, 0, &trace);

    auto prompt_of = [&](size_t i) { return trace[i].messages.back().content; };
    CHECK(prompt_of(0).find(k_query.text) != std::string::npos);
    CHECK(prompt_of(1).find(plan.brainstorm) != std::string::npos);
    CHECK(prompt_of(2).find(plan.brainstorm) != std::string::npos);
    CHECK(prompt_of(2).find(plan.review_feedback) != std::string::npos);
    CHECK(prompt_of(3).find(plan.refined_design) != std::string::npos);
    CHECK(prompt_of(5).find(plan.outline_feedback) != std::string::npos);
}

TEST_CASE("stage 2 writes each paragraph with accumulated context") {
    rig         r(testenv::pipeline_script());
    plan_record plan = r.agent.run_plan(k_query);

    call_trace     trace;
    draft_document draft = r.agent.run_write(plan, 9, &trace);

    CHECK(r.backend->invocation_count() == 6 + 6); // plan + 3 x (think, write)
    REQUIRE(draft.paragraphs.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(draft.paragraphs[i].index == i + 1);
        CHECK(!draft.paragraphs[i].think.empty());
        CHECK(draft.paragraphs[i].content.find("Drafted beat v9") == 0); // $$ stripped
    }

    REQUIRE(trace.size() == 6);
    CHECK(trace[0].label == "write_thinker/1");
    CHECK(trace[1].label == "writer/1");
    CHECK(trace[4].label == "write_thinker/3");

    // The third writer prompt carries both earlier paragraphs verbatim.
    const std::string & third = trace[5].messages.back().content;
    CHECK(third.find(draft.paragraphs[0].content) != std::string::npos);
    CHECK(third.find(draft.paragraphs[1].content) != std::string::npos);
    // And the first carried none of the later ones.
    CHECK(trace[1].messages.back().content.find(draft.paragraphs[2].content) ==
          std::string::npos);
}

TEST_CASE("stage 3 revises in place; later reviews see earlier revisions") {
    rig            r(testenv::pipeline_script());
    plan_record    plan  = r.agent.run_plan(k_query);
    draft_document draft = r.agent.run_write(plan);

    call_trace       trace;
    refined_document refined = r.agent.run_refine(draft, 2, &trace);

    REQUIRE(refined.paragraphs.size() == 3);
    REQUIRE(refined.revision_log.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(refined.paragraphs[i].find("Polished beat v2") == 0);
        CHECK(refined.revision_log[i].index == i + 1);
        CHECK(!refined.revision_log[i].review_feedback.empty());
    }

    // The review of paragraph 2 sees paragraph 1 already revised.
    const std::string & second_review = trace[2].messages.back().content;
    CHECK(second_review.find(refined.paragraphs[0]) != std::string::npos);
    CHECK(second_review.find(draft.paragraphs[0].content) == std::string::npos);
}

TEST_CASE("a full run makes 18 calls and round-trips through disk") {
    rig       r(testenv::pipeline_script());
    agent_run run = r.agent.run_full(k_query, 0);

    CHECK(r.backend->invocation_count() == 18);
    CHECK(run.trace.size() == 18);

    testenv::temp_dir dir("run");
    save_run(dir.path() / "r", run);
    agent_run loaded = load_run(dir.path() / "r");

    CHECK(loaded.query.id == run.query.id);
    CHECK(loaded.plan.refined_design == run.plan.refined_design);
    CHECK(loaded.plan.outline_final.size() == run.plan.outline_final.size());
    REQUIRE(loaded.draft.paragraphs.size() == run.draft.paragraphs.size());
    for (size_t i = 0; i < run.draft.paragraphs.size(); ++i) {
        CHECK(loaded.draft.paragraphs[i].think == run.draft.paragraphs[i].think);
        CHECK(loaded.draft.paragraphs[i].content == run.draft.paragraphs[i].content);
    }
    CHECK(loaded.refined.paragraphs == run.refined.paragraphs);
    REQUIRE(loaded.trace.size() == run.trace.size());
    for (size_t i = 0; i < run.trace.size(); ++i) {
        CHECK(loaded.trace[i].label == run.trace[i].label);
        CHECK(loaded.trace[i].reply == run.trace[i].reply);
    }
}

TEST_CASE("loading a missing or partial run directory is a typed failure") {
    testenv::temp_dir dir("partial");
    try {
        load_run(dir.path() / "absent");
        FAIL("expected incomplete_trace");
    } catch (const error & e) {
        CHECK(e.code() == errc::incomplete_trace);
    }

    rig       r(testenv::pipeline_script());
    agent_run run = r.agent.run_full(k_query);
    save_run(dir.path() / "half", run);
    std::filesystem::remove(dir.path() / "half" / "refined.json");
    try {
        load_run(dir.path() / "half");
        FAIL("expected incomplete_trace");
    } catch (const error & e) {
        CHECK(e.code() == errc::incomplete_trace);
    }
}

TEST_CASE("an unusable outline triggers one corrective re-ask") {
    nlohmann::json doc = {
        {"default_reply", "unmatched"},
        {"rules",
         {{{"contains", "The previous outline could not be used"},
           {"reply", "Title: Fixed\n1. Only beat (200 words)\n"}},
          {{"contains", "preliminary plan for the task"}, {"reply", "design"}},
          {{"contains", "raise at least two questions"}, {"reply", "questions"}},
          {{"contains", "revision of the current task design"}, {"reply", "refined"}},
          {{"contains", "generate a detailed, structured outline"},
           {"reply", "no structure here at all"}},
          {{"contains", "evaluate the following outline"}, {"reply", "feedback"}},
          {{"contains", "revise the outline to ensure it includes all necessary components"},
           {"reply", "Title: Final\n1. Only beat (200 words)\n"}}}}};

    rig        r(mock_script::from_json(doc));
    call_trace trace;
    plan_record plan = r.agent.run_plan(k_query, 0, &trace);
    CHECK(plan.outline.size() == 1);
    CHECK(plan.title == "Final");
    CHECK(r.backend->invocation_count() == 7); // one extra call for the re-ask
    bool saw_reask = false;
    for (const auto & rec : trace)
        saw_reask |= rec.label == "outline/reask";
    CHECK(saw_reask);

    agent_options strict;
    strict.reask = false;
    rig r2(mock_script::from_json(doc), strict);
    try {
        r2.agent.run_plan(k_query);
        FAIL("expected outline_unparseable");
    } catch (const error & e) {
        CHECK(e.code() == errc::outline_unparseable);
    }
}

TEST_CASE("a cap-violating outline is re-asked, then rejected as a violation") {
    nlohmann::json doc = {
        {"default_reply", "unmatched"},
        {"rules",
         {{{"contains", "preliminary plan for the task"}, {"reply", "design"}},
          {{"contains", "raise at least two questions"}, {"reply", "questions"}},
          {{"contains", "revision of the current task design"}, {"reply", "refined"}},
          {{"contains", "outline"},
           {"reply", "Title: Oversized\n1. Part one (9000 words)\n2. Part two (9000 words)\n"}}}}};

    agent_options strict;
    strict.reask = false;
    rig r(mock_script::from_json(doc), strict);
    try {
        r.agent.run_plan(k_query);
        FAIL("expected constraint_violated");
    } catch (const error & e) {
        CHECK(e.code() == errc::constraint_violated);
        CHECK(std::string(e.what()).find("exceeds the limit") != std::string::npos);
    }
}

TEST_CASE("a writer reply without delimiters is re-asked once, then fails typed") {
    nlohmann::json doc = {
        {"default_reply", "unmatched"},
        {"rules",
         {{{"contains", "did not enclose the paragraph content"},
           {"reply", "$$Recovered paragraph.$$"}},
          {{"contains", "develop a writing plan for the new paragraph"}, {"reply", "plan"}},
          {{"contains", "write the next paragraph"}, {"reply", "forgot the markers"}}}}};

    rig         r(mock_script::from_json(doc));
    plan_record plan;
    plan.title         = "T";
    plan.outline_final = {{1, "Only beat", 100}};

    draft_document draft = r.agent.run_write(plan);
    REQUIRE(draft.paragraphs.size() == 1);
    CHECK(draft.paragraphs[0].content == "Recovered paragraph.");

    nlohmann::json never = doc;
    never["rules"][0]["reply"] = "still no markers";
    rig r2(mock_script::from_json(never));
    try {
        r2.agent.run_write(plan);
        FAIL("expected delimiter_missing");
    } catch (const error & e) {
        CHECK(e.code() == errc::delimiter_missing);
    }
}

TEST_CASE("canonical assemblies are stable byte sequences") {
    plan_record plan;
    plan.title         = "T";
    plan.outline_final = {{1, "One", 100}, {2, "Two", 200}};
    CHECK(plan_outline_text(plan) == "Title: T\n1. One (100 words)\n2. Two (200 words)\n");

    draft_document draft;
    draft.paragraphs = {{1, "tA", "first"}, {2, "tB", "second"}};
    CHECK(draft_text(draft) == "first\n\nsecond");
    CHECK(combine_previous(draft.paragraphs, 0).empty());
    CHECK(combine_previous(draft.paragraphs, 1) == "first");
    CHECK(combine_previous(draft.paragraphs, 2) == "first\n\nsecond");

    refined_document refined;
    refined.paragraphs = {"ra", "rb"};
    CHECK(refined_text(refined) == "ra\n\nrb");
    CHECK(combined_document({"pa", "pb"}) == "Paragraph 1:\npa\n\nParagraph 2:\npb");
    CHECK(key_point_text({2, "Two", 200}) == "Paragraph 2: Two (200 words)");
}
