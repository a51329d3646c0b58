#include "superwriter/winrate.hpp"

#include <map>

#include "superwriter/errors.hpp"

namespace superwriter {

namespace {

const char * k_verdict_reask =
    "The previous reply did not contain a final verdict marker. State your final "
    "verdict again as one of [[A>>B]], [[A>B]], [[A=B]], [[B>A]], [[B>>A]].";

} // namespace

const char * match_outcome_name(match_outcome o) {
    switch (o) {
        case match_outcome::win:  return "win";
        case match_outcome::loss: return "loss";
        case match_outcome::tie:  return "tie";
    }
    return "tie";
}

int ours_advantage(pair_verdict verdict, bool ours_is_a) {
    int a_side = 0;
    switch (verdict) {
        case pair_verdict::a_much_better: a_side = 2; break;
        case pair_verdict::a_better:      a_side = 1; break;
        case pair_verdict::tie:           a_side = 0; break;
        case pair_verdict::b_better:      a_side = -1; break;
        case pair_verdict::b_much_better: a_side = -2; break;
    }
    return ours_is_a ? a_side : -a_side;
}

match_result resolve(const judged_matchup & m) {
    match_result r;
    r.margin = ours_advantage(m.verdict_forward, true) + ours_advantage(m.verdict_reverse, false);
    r.outcome = r.margin > 0   ? match_outcome::win
                : r.margin < 0 ? match_outcome::loss
                               : match_outcome::tie;
    return r;
}

double winrate_summary::rate() const {
    const long long num = 2LL * wins + ties; // half-win units
    const long long den = 2LL * total();
    if (den == 0)
        throw_error(errc::empty_input, "no match results");
    // The complement side is derived by subtraction from the smaller
    // quotient, so label-swapped summaries produce bit-identical 1 - rate.
    if (2 * num == den)
        return 0.5;
    if (2 * num < den)
        return static_cast<double>(num) / static_cast<double>(den);
    return 1.0 - static_cast<double>(den - num) / static_cast<double>(den);
}

winrate_summary summarize(const std::vector<match_result> & results) {
    if (results.empty())
        throw_error(errc::empty_input, "no match results");
    winrate_summary s;
    for (const auto & r : results) {
        switch (r.outcome) {
            case match_outcome::win:  ++s.wins; break;
            case match_outcome::loss: ++s.losses; break;
            case match_outcome::tie:  ++s.ties; break;
        }
    }
    return s;
}

double win_rate(const std::vector<match_result> & results) {
    return summarize(results).rate();
}

winrate_judge::winrate_judge(gateway & gw, const prompt_library & lib, winrate_options options)
    : gw_(&gw), lib_(&lib), options_(std::move(options)) {}

pair_verdict winrate_judge::judge_pair(const std::string & query_text,
                                       const std::string & response_a,
                                       const std::string & response_b, int attempt_tag,
                                       call_trace * trace) const {
    std::vector<chat_message> messages = {
        {"system", lib_->render("winrate_system", {})},
        {"user", lib_->render("winrate_user", {{"query", query_text},
                                               {"response_a", response_a},
                                               {"response_b", response_b}})},
    };

    auto ask = [&](const std::string & label) {
        chat_request req;
        req.model       = options_.model;
        req.messages    = messages;
        req.temperature = options_.temperature;
        req.top_p       = options_.top_p;
        req.max_tokens  = options_.max_tokens;
        req.attempt_tag = attempt_tag;

        chat_response resp = gw_->complete(req);
        if (trace) {
            call_record rec;
            rec.label       = label;
            rec.attempt_tag = attempt_tag;
            rec.messages    = messages;
            rec.reply       = resp.content;
            trace->push_back(std::move(rec));
        }
        return resp;
    };

    chat_response first = ask("winrate");
    try {
        return parse_verdict(first.content);
    } catch (const error & e) {
        if (!options_.reask || e.code() != errc::marker_missing)
            throw;
    }
    messages.push_back({"assistant", first.content});
    messages.push_back({"user", k_verdict_reask});
    return parse_verdict(ask("winrate/reask").content);
}

judged_matchup winrate_judge::judge_matchup(const matchup & m, int attempt_tag,
                                            call_trace * trace) const {
    judged_matchup out;
    out.input           = m;
    out.verdict_forward = judge_pair(m.query_text, m.ours, m.baseline, attempt_tag, trace);
    out.verdict_reverse = judge_pair(m.query_text, m.baseline, m.ours, attempt_tag, trace);
    return out;
}

std::vector<matchup> pair_responses(const std::vector<nlohmann::json> & ours,
                                    const std::vector<nlohmann::json> & baseline) {
    std::map<std::string, const nlohmann::json *> by_id;
    for (const auto & row : baseline) {
        std::string id = row.at("query_id").get<std::string>();
        if (!by_id.emplace(id, &row).second)
            throw_error(errc::mismatched_ids, "duplicate baseline query_id '" + id + "'");
    }

    std::vector<matchup> out;
    std::size_t          used = 0;
    for (const auto & row : ours) {
        matchup m;
        m.query_id   = row.at("query_id").get<std::string>();
        m.query_text = row.value("query", "");
        m.ours       = row.at("response").get<std::string>();
        auto it      = by_id.find(m.query_id);
        if (it == by_id.end())
            throw_error(errc::mismatched_ids,
                        "query_id '" + m.query_id + "' has no baseline response");
        m.baseline = it->second->at("response").get<std::string>();
        if (m.query_text.empty())
            m.query_text = it->second->value("query", "");
        out.push_back(std::move(m));
        ++used;
    }
    if (used != by_id.size())
        throw_error(errc::mismatched_ids,
                    std::to_string(by_id.size() - used) + " baseline responses have no match");
    return out;
}

namespace {

pair_verdict verdict_from_marker(const std::string & marker) {
    for (pair_verdict v : {pair_verdict::a_much_better, pair_verdict::a_better,
                           pair_verdict::tie, pair_verdict::b_better,
                           pair_verdict::b_much_better})
        if (marker == std::string(pair_verdict_marker(v)))
            return v;
    throw_error(errc::marker_missing, "unknown verdict marker '" + marker + "'");
}

} // namespace

void to_json(nlohmann::json & j, const judged_matchup & m) {
    j = nlohmann::json{{"query_id", m.input.query_id},
                       {"query", m.input.query_text},
                       {"ours", m.input.ours},
                       {"baseline", m.input.baseline},
                       {"verdict_forward", std::string(pair_verdict_marker(m.verdict_forward))},
                       {"verdict_reverse", std::string(pair_verdict_marker(m.verdict_reverse))}};
}

void from_json(const nlohmann::json & j, judged_matchup & m) {
    m.input.query_id   = j.at("query_id").get<std::string>();
    m.input.query_text = j.value("query", "");
    m.input.ours       = j.at("ours").get<std::string>();
    m.input.baseline   = j.at("baseline").get<std::string>();
    m.verdict_forward  = verdict_from_marker(j.at("verdict_forward").get<std::string>());
    m.verdict_reverse  = verdict_from_marker(j.at("verdict_reverse").get<std::string>());
}

void to_json(nlohmann::json & j, const winrate_summary & s) {
    j = nlohmann::json{{"wins", s.wins},
                       {"losses", s.losses},
                       {"ties", s.ties},
                       {"rate_numerator", 2 * s.wins + s.ties},
                       {"rate_denominator", 2 * s.total()},
                       {"rate", s.rate()}};
}

void from_json(const nlohmann::json & j, winrate_summary & s) {
    s.wins   = j.at("wins").get<int>();
    s.losses = j.at("losses").get<int>();
    s.ties   = j.at("ties").get<int>();
}

} // namespace superwriter
