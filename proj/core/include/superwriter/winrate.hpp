#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "superwriter/agent.hpp"
#include "superwriter/extract.hpp"
#include "superwriter/gateway.hpp"
#include "superwriter/prompt_library.hpp"

namespace superwriter {

struct matchup {
    std::string query_id;
    std::string query_text;
    std::string ours;
    std::string baseline;
};

struct judged_matchup {
    matchup      input;
    pair_verdict verdict_forward = pair_verdict::tie; // ours presented as A
    pair_verdict verdict_reverse = pair_verdict::tie; // ours presented as B
};

enum class match_outcome { win, loss, tie };

const char * match_outcome_name(match_outcome o);

struct match_result {
    match_outcome outcome = match_outcome::tie;
    int           margin  = 0; // in [-4, +4]
};

// Verdict mapped to the advantage of "ours" given which slot it occupied:
// significant 2, slight 1, tie 0, negated when the other side is favored.
int ours_advantage(pair_verdict verdict, bool ours_is_a);

match_result resolve(const judged_matchup & m);

struct winrate_summary {
    int wins   = 0;
    int losses = 0;
    int ties   = 0;

    int total() const { return wins + losses + ties; }

    // (wins + ties/2) / total, computed in integer half-units so that
    // swapping labels maps the rate to exactly 1 - rate.
    double rate() const;
};

winrate_summary summarize(const std::vector<match_result> & results); // EmptyInput on none
double          win_rate(const std::vector<match_result> & results);

struct winrate_options {
    std::string model       = "mock";
    double      temperature = 0.6;
    double      top_p       = 0.95;
    int         max_tokens  = 8192;
    bool        reask       = true;
};

class winrate_judge {
  public:
    winrate_judge(gateway & gw, const prompt_library & lib, winrate_options options = {});

    // One judged round with the given slot assignment; parses the last
    // [[..]] marker, with one corrective re-ask.
    pair_verdict judge_pair(const std::string & query_text, const std::string & response_a,
                            const std::string & response_b, int attempt_tag = 0,
                            call_trace * trace = nullptr) const;

    // Forward round (ours = A) plus reverse round (ours = B).
    judged_matchup judge_matchup(const matchup & m, int attempt_tag = 0,
                                 call_trace * trace = nullptr) const;

    const winrate_options & options() const { return options_; }

  private:
    gateway *              gw_;
    const prompt_library * lib_;
    winrate_options        options_;
};

// Pairs two response files by query_id (order taken from `ours`).
// Response rows are {query_id, response}; query text rows may add context.
std::vector<matchup> pair_responses(const std::vector<nlohmann::json> & ours,
                                    const std::vector<nlohmann::json> & baseline);

void to_json(nlohmann::json & j, const judged_matchup & m);
void from_json(const nlohmann::json & j, judged_matchup & m);
void to_json(nlohmann::json & j, const winrate_summary & s);
void from_json(const nlohmann::json & j, winrate_summary & s);

} // namespace superwriter
