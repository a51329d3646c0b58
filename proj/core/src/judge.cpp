#include "superwriter/judge.hpp"

#include <algorithm>
#include <cmath>

#include "superwriter/errors.hpp"
#include "superwriter/extract.hpp"

namespace superwriter {

namespace {

const char * k_select_reask =
    "The previous reply could not be parsed as a criteria selection. Reply again "
    "with a single JSON object containing exactly six criteria, each with a "
    "Definition and Standards field, and include Relevance, Coherence, and Clarity.";

const char * k_score_reask =
    "The previous evaluation could not be parsed. Reply again with a single JSON "
    "object mapping every criterion name to an object with an Analysis string and "
    "a numeric Score between 0 and 10.";

const std::vector<std::string> k_general_criteria = {"Relevance", "Coherence", "Clarity"};

judge_rubric parse_rubric_reply(const std::string & reply) {
    auto block = extract_json_block(reply);
    if (!block.doc.is_object())
        throw_error(errc::rubric_unparseable, "criteria selection is not a JSON object");

    judge_rubric rubric;
    for (auto it = block.doc.begin(); it != block.doc.end(); ++it) {
        const auto & val = it.value();
        if (!val.is_object())
            throw_error(errc::rubric_unparseable,
                        "criterion '" + it.key() + "' is not a JSON object");
        rubric_entry entry;
        entry.name = val.value("Name", "");
        if (entry.name.empty())
            entry.name = it.key();
        entry.definition = val.value("Definition", "");
        entry.standards  = val.value("Standards", "");
        if (entry.definition.empty())
            throw_error(errc::rubric_unparseable,
                        "criterion '" + entry.name + "' has no Definition");
        rubric.entries.push_back(std::move(entry));
    }
    return rubric;
}

void validate_rubric(const judge_rubric & rubric) {
    if (rubric.entries.size() != 6)
        throw_error(errc::rubric_shape_invalid,
                    "expected 6 criteria, got " + std::to_string(rubric.entries.size()));
    for (const auto & required : k_general_criteria) {
        bool found = std::any_of(rubric.entries.begin(), rubric.entries.end(),
                                 [&](const rubric_entry & e) { return e.name == required; });
        if (!found)
            throw_error(errc::rubric_shape_invalid,
                        "general criterion '" + required + "' is missing");
    }
    for (size_t i = 0; i < rubric.entries.size(); ++i)
        for (size_t j = i + 1; j < rubric.entries.size(); ++j)
            if (rubric.entries[i].name == rubric.entries[j].name)
                throw_error(errc::rubric_shape_invalid,
                            "duplicate criterion '" + rubric.entries[i].name + "'");
}

double numeric_score(const nlohmann::json & v) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        try {
            size_t      pos = 0;
            std::string s   = v.get<std::string>();
            double      d   = std::stod(s, &pos);
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
                ++pos;
            if (pos == s.size())
                return d;
        } catch (const std::exception &) {
        }
    }
    return std::nan("");
}

score_run parse_score_reply(const std::string & reply, const judge_rubric & rubric,
                            std::vector<std::string> & diagnostics) {
    auto block = extract_json_block(reply);
    if (!block.doc.is_object())
        throw_error(errc::score_unparseable, "evaluation reply is not a JSON object");

    auto rubric_name = [&](const std::string & key, const nlohmann::json & val) -> std::string {
        for (const auto & e : rubric.entries)
            if (e.name == key)
                return key;
        if (val.is_object() && val.contains("Name") && val["Name"].is_string()) {
            std::string inner = val["Name"].get<std::string>();
            for (const auto & e : rubric.entries)
                if (e.name == inner)
                    return inner;
        }
        return "";
    };

    score_run run;
    for (auto it = block.doc.begin(); it != block.doc.end(); ++it) {
        std::string name = rubric_name(it.key(), it.value());
        if (name.empty()) {
            diagnostics.push_back("unrecognized criterion key: " + it.key());
            continue;
        }
        double v = std::nan("");
        if (it.value().is_object() && it.value().contains("Score"))
            v = numeric_score(it.value()["Score"]);
        else
            v = numeric_score(it.value());
        if (std::isnan(v)) {
            diagnostics.push_back("criterion '" + name + "' has no numeric score");
            continue;
        }
        if (v < 0.0 || v > 10.0)
            throw_error(errc::score_out_of_range,
                        "criterion '" + name + "' scored " + std::to_string(v));
        run.criterion_scores[name] = v;
    }
    if (run.criterion_scores.empty())
        throw_error(errc::score_unparseable, "no criterion scores found in reply");
    for (const auto & e : rubric.entries)
        if (!run.criterion_scores.count(e.name))
            diagnostics.push_back("criterion '" + e.name + "' missing from run");
    return run;
}

} // namespace

double aggregate_score(const std::vector<score_run> & runs) {
    if (runs.empty())
        throw_error(errc::score_unparseable, "no scoring runs to aggregate");
    double total = 0.0;
    for (const auto & run : runs) {
        if (run.criterion_scores.empty())
            throw_error(errc::score_unparseable, "scoring run has no criterion scores");
        double sum = 0.0;
        for (const auto & [name, v] : run.criterion_scores)
            sum += v;
        total += sum / static_cast<double>(run.criterion_scores.size());
    }
    return total / static_cast<double>(runs.size());
}

std::string rubric_to_standard_json(const judge_rubric & rubric) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto & e : rubric.entries) {
        j[e.name] = {{"Definition", e.definition}, {"Standards", e.standards}};
    }
    return j.dump(2);
}

write_judge::write_judge(gateway & gw, const prompt_library & lib, judge_options options)
    : gw_(&gw), lib_(&lib), options_(std::move(options)) {}

chat_response write_judge::ask(const std::string & label,
                               const std::vector<chat_message> & messages, int attempt_tag,
                               call_trace * trace) const {
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
}

judge_rubric write_judge::select_rubric(const writing_query & query, call_trace * trace) const {
    std::string pool = options_.criteria_pool.empty()
                           ? lib_->fixture("evaluation_criteria")
                           : options_.criteria_pool;
    std::string prompt = lib_->render("judge_criteria_select",
                                      {{"evaluation_criteria", pool},
                                       {"query", query.text},
                                       {"format_query", lib_->fixture("format_query")}});

    std::vector<chat_message> messages = {{"user", prompt}};
    chat_response             first    = ask("judge_select", messages, 0, trace);
    try {
        judge_rubric rubric = parse_rubric_reply(first.content);
        validate_rubric(rubric);
        return rubric;
    } catch (const error & e) {
        if (!options_.reask)
            throw;
        if (e.code() != errc::rubric_unparseable && e.code() != errc::rubric_shape_invalid &&
            e.code() != errc::no_json_found && e.code() != errc::json_malformed)
            throw;
    }

    messages.push_back({"assistant", first.content});
    messages.push_back({"user", k_select_reask});
    chat_response second = ask("judge_select/reask", messages, 0, trace);
    judge_rubric  rubric = parse_rubric_reply(second.content);
    validate_rubric(rubric);
    return rubric;
}

leaf_score write_judge::score_output(const writing_query & query, const std::string & candidate,
                                     const judge_rubric & rubric, int attempt_base,
                                     call_trace * trace) const {
    std::string standard = rubric_to_standard_json(rubric);
    std::string prompt   = lib_->render("judge_score",
                                        {{"query", query.text},
                                         {"clean_res", candidate},
                                         {"evaluate_standard", standard},
                                         {"format_eval", lib_->fixture("format_eval")}});

    leaf_score result;
    for (int k = 0; k < options_.runs; ++k) {
        int                       tag      = attempt_base + k;
        std::vector<chat_message> messages = {{"user", prompt}};
        std::string               label    = "judge_score/" + std::to_string(k);
        chat_response             first    = ask(label, messages, tag, trace);
        try {
            result.runs.push_back(parse_score_reply(first.content, rubric, result.diagnostics));
            continue;
        } catch (const error & e) {
            if (!options_.reask)
                throw;
            if (e.code() != errc::score_unparseable && e.code() != errc::no_json_found &&
                e.code() != errc::json_malformed)
                throw;
        }
        messages.push_back({"assistant", first.content});
        messages.push_back({"user", k_score_reask});
        chat_response second = ask(label + "/reask", messages, tag, trace);
        result.runs.push_back(parse_score_reply(second.content, rubric, result.diagnostics));
    }
    result.s = aggregate_score(result.runs);
    return result;
}

void to_json(nlohmann::json & j, const judge_rubric & r) {
    j = nlohmann::json::array();
    for (const auto & e : r.entries)
        j.push_back({{"name", e.name}, {"definition", e.definition}, {"standards", e.standards}});
}

void from_json(const nlohmann::json & j, judge_rubric & r) {
    r.entries.clear();
    for (const auto & item : j) {
        rubric_entry e;
        e.name       = item.at("name").get<std::string>();
        e.definition = item.at("definition").get<std::string>();
        e.standards  = item.at("standards").get<std::string>();
        r.entries.push_back(std::move(e));
    }
}

void to_json(nlohmann::json & j, const leaf_score & s) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto & run : s.runs)
        runs.push_back(run.criterion_scores);
    j = {{"s", s.s}, {"runs", runs}, {"diagnostics", s.diagnostics}};
}

void from_json(const nlohmann::json & j, leaf_score & s) {
    s.s = j.at("s").get<double>();
    s.runs.clear();
    for (const auto & run : j.at("runs")) {
        score_run r;
        r.criterion_scores = run.get<std::map<std::string, double>>();
        s.runs.push_back(std::move(r));
    }
    s.diagnostics = j.value("diagnostics", std::vector<std::string>{});
}

} // namespace superwriter
