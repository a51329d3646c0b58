#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "superwriter/agent.hpp"
#include "superwriter/gateway.hpp"
#include "superwriter/prompt_library.hpp"

namespace superwriter {

struct rubric_entry {
    std::string name;
    std::string definition;
    std::string standards;

    bool operator==(const rubric_entry &) const = default;
};

// Always six entries; Relevance, Coherence, and Clarity must be among them.
struct judge_rubric {
    std::vector<rubric_entry> entries;
};

struct score_run {
    // Criterion name -> score on the 0-10 scale; keys are a subset of the
    // rubric names (salvaged runs may drop a criterion).
    std::map<std::string, double> criterion_scores;
};

struct leaf_score {
    double                 s = 0.0; // mean over runs of per-run criterion means
    std::vector<score_run> runs;
    std::vector<std::string> diagnostics;
};

struct judge_options {
    std::string model       = "mock";
    double      temperature = 0.6;
    double      top_p       = 0.95;
    int         max_tokens  = 8192;
    int         runs        = 3;  // scoring repetitions per candidate
    bool        reask       = true;
    std::string criteria_pool; // overrides the built-in pool text when set
};

// Mean of per-run means. Empty runs (or a run with no scores) raise
// errc::score_unparseable.
double aggregate_score(const std::vector<score_run> & runs);

std::string rubric_to_standard_json(const judge_rubric & rubric);

class write_judge {
  public:
    write_judge(gateway & gw, const prompt_library & lib, judge_options options = {});

    // Renders the criteria pool + selection schema, parses the reply into
    // six named criteria, validates shape (exactly six, generals present),
    // with one corrective re-ask before a typed failure.
    judge_rubric select_rubric(const writing_query & query, call_trace * trace = nullptr) const;

    // Scores one candidate text `runs` times (attempt tags attempt_base..)
    // and aggregates; per-run JSON is parsed with salvage (numeric strings
    // accepted, missing criteria dropped with a diagnostic).
    leaf_score score_output(const writing_query & query, const std::string & candidate,
                            const judge_rubric & rubric, int attempt_base = 0,
                            call_trace * trace = nullptr) const;

    const judge_options & options() const { return options_; }

  private:
    chat_response ask(const std::string & label, const std::vector<chat_message> & messages,
                      int attempt_tag, call_trace * trace) const;

    gateway *              gw_;
    const prompt_library * lib_;
    judge_options          options_;
};

void to_json(nlohmann::json & j, const judge_rubric & r);
void from_json(const nlohmann::json & j, judge_rubric & r);
void to_json(nlohmann::json & j, const leaf_score & s);
void from_json(const nlohmann::json & j, leaf_score & s);

} // namespace superwriter
