#include "superwriter/dataset.hpp"

#include <cmath>

#include "superwriter/errors.hpp"

namespace superwriter {

namespace {

const char * k_yes_no_reask =
    "The previous reply did not end with a judgement marker. Answer again and "
    "finish with either \"#*# Yes\" or \"#*# No\".";

const char * k_category_reask =
    "The previous reply did not name a recognized category. Answer again and "
    "finish with a line of the form ### Category: \"Chosen category\", using one "
    "of the five listed categories.";

bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF)    // unified ideographs
        || (cp >= 0x3400 && cp <= 0x4DBF)    // ideograph extension A
        || (cp >= 0xF900 && cp <= 0xFAFF)    // compatibility ideographs
        || (cp >= 0x3040 && cp <= 0x30FF)    // hiragana, katakana
        || (cp >= 0xAC00 && cp <= 0xD7AF)    // hangul syllables
        || (cp >= 0x3000 && cp <= 0x303F)    // CJK punctuation
        || (cp >= 0xFF00 && cp <= 0xFFEF);   // full-width forms
}

} // namespace

length_filter::length_filter(gateway & gw, const prompt_library & lib, filter_options options)
    : gw_(&gw), lib_(&lib), options_(std::move(options)) {}

length_prediction length_filter::predict(const std::string & query_text, int attempt_tag,
                                         call_trace * trace) const {
    auto ask = [&](const std::string & label, std::vector<chat_message> & messages) {
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

    // Step with one corrective re-ask; Parse is (reply) -> value.
    auto step = [&](const std::string & template_id, const char * reask_text, auto parse,
                    std::vector<std::string> & diagnostics) {
        std::vector<chat_message> messages = {
            {"user", lib_->render(template_id, {{"query", query_text}})}};
        chat_response first = ask(template_id, messages);
        try {
            return parse(first.content);
        } catch (const error & e) {
            if (!options_.reask ||
                (e.code() != errc::marker_missing && e.code() != errc::category_unrecognized))
                throw;
            diagnostics.push_back(template_id + ": " + e.what());
        }
        messages.push_back({"assistant", first.content});
        messages.push_back({"user", reask_text});
        return parse(ask(template_id + "/reask", messages).content);
    };

    length_prediction out;
    out.exceeds_2k = step(
        "lenpred_step1", k_yes_no_reask,
        [](const std::string & reply) { return parse_yes_no(reply); }, out.diagnostics);
    if (!out.exceeds_2k) {
        out.category = length_category::lt2000;
        return out;
    }
    out.category = step(
        "lenpred_step2", k_category_reask,
        [](const std::string & reply) { return parse_category(reply); }, out.diagnostics);
    return out;
}

bool length_filter::keep(const length_prediction & prediction) const {
    return prediction.exceeds_2k && prediction.category >= options_.min_category;
}

std::uint64_t estimate_tokens(std::string_view text) {
    std::uint64_t latin = 0, cjk = 0;
    size_t        i = 0;
    while (i < text.size()) {
        unsigned char lead = static_cast<unsigned char>(text[i]);
        int           len  = 1;
        char32_t      cp   = lead;
        if (lead >= 0xF0)
            len = 4;
        else if (lead >= 0xE0)
            len = 3;
        else if (lead >= 0xC0)
            len = 2;

        bool valid = i + len <= text.size();
        if (valid && len > 1) {
            cp = lead & (0x7F >> len);
            for (int b = 1; b < len && valid; ++b) {
                unsigned char cont = static_cast<unsigned char>(text[i + b]);
                if ((cont & 0xC0) != 0x80)
                    valid = false;
                else
                    cp = (cp << 6) | (cont & 0x3F);
            }
        }
        if (!valid || (len == 1 && lead >= 0x80)) {
            ++latin; // malformed byte counts as one plain character
            ++i;
            continue;
        }
        (is_cjk(cp) ? cjk : latin) += 1;
        i += len;
    }
    double estimate = static_cast<double>(latin) / 4.0 + static_cast<double>(cjk) / 1.5;
    return static_cast<std::uint64_t>(std::ceil(estimate));
}

const char * sft_stage_name(sft_stage stage) {
    switch (stage) {
        case sft_stage::plan:   return "plan";
        case sft_stage::write:  return "write";
        case sft_stage::refine: return "refine";
    }
    return "plan";
}

sft_stage sft_stage_from_name(const std::string & name) {
    if (name == "plan")
        return sft_stage::plan;
    if (name == "write")
        return sft_stage::write;
    if (name == "refine")
        return sft_stage::refine;
    throw_error(errc::config_invalid, "unknown SFT stage '" + name + "'");
}

namespace {

std::string join_blocks(const std::vector<std::string> & blocks) {
    std::string out;
    for (const auto & b : blocks) {
        if (b.empty())
            continue;
        if (!out.empty())
            out += "\n\n";
        out += b;
    }
    return out;
}

} // namespace

sft_build_result build_sft_records(const agent_run & run, const sft_options & options) {
    if (run.query.id.empty())
        throw_error(errc::incomplete_trace, "run has no query id");
    if (run.plan.outline_final.empty())
        throw_error(errc::incomplete_trace, "run '" + run.query.id + "' has no final outline");
    if (run.draft.paragraphs.empty())
        throw_error(errc::incomplete_trace, "run '" + run.query.id + "' has no draft");
    if (run.refined.paragraphs.size() != run.draft.paragraphs.size())
        throw_error(errc::incomplete_trace,
                    "run '" + run.query.id + "' refined " +
                        std::to_string(run.refined.paragraphs.size()) + " of " +
                        std::to_string(run.draft.paragraphs.size()) + " paragraphs");

    const std::string outline = plan_outline_text(run.plan);
    const std::string draft   = draft_text(run.draft);
    const std::string refined = refined_text(run.refined);

    std::vector<std::string> think_write, think_refine;
    for (const auto & p : run.draft.paragraphs)
        think_write.push_back(p.think);
    for (const auto & e : run.refined.revision_log)
        think_refine.push_back(e.review_feedback);

    struct stage_plan {
        sft_stage   stage;
        std::string user;
        std::string thinking;
        std::string artifact;
    };
    const stage_plan stages[] = {
        {sft_stage::plan, run.query.text,
         join_blocks({run.plan.brainstorm, run.plan.review_feedback, run.plan.refined_design,
                      run.plan.outline_feedback}),
         outline},
        {sft_stage::write, run.query.text + "\n\n" + outline, join_blocks(think_write), draft},
        {sft_stage::refine, run.query.text + "\n\n" + draft, join_blocks(think_refine), refined},
    };

    sft_build_result out;
    for (const auto & s : stages) {
        sft_record rec;
        rec.stage    = s.stage;
        rec.query_id = run.query.id;
        rec.messages = {{"user", s.user},
                        {"assistant", options.think_open + s.thinking + options.think_close +
                                          s.artifact}};
        std::uint64_t total = 0;
        for (const auto & m : rec.messages)
            total += estimate_tokens(m.content);
        rec.token_estimate = total;
        if (total > options.token_budget) {
            out.rejections.push_back("query '" + run.query.id + "' stage " +
                                     sft_stage_name(s.stage) + ": estimated " +
                                     std::to_string(total) + " tokens exceeds budget " +
                                     std::to_string(options.token_budget));
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

void to_json(nlohmann::json & j, const sft_record & r) {
    j = nlohmann::json{{"stage", sft_stage_name(r.stage)},
                       {"query_id", r.query_id},
                       {"token_estimate", r.token_estimate},
                       {"messages", r.messages}};
}

void from_json(const nlohmann::json & j, sft_record & r) {
    r.stage          = sft_stage_from_name(j.at("stage").get<std::string>());
    r.query_id       = j.at("query_id").get<std::string>();
    r.token_estimate = j.at("token_estimate").get<std::uint64_t>();
    r.messages       = j.at("messages").get<std::vector<chat_message>>();
}

void to_json(nlohmann::json & j, const length_prediction & p) {
    j = nlohmann::json{{"exceeds_2k", p.exceeds_2k},
                       {"category", std::string(length_category_name(p.category))},
                       {"diagnostics", p.diagnostics}};
}

void from_json(const nlohmann::json & j, length_prediction & p) {
    p.exceeds_2k = j.at("exceeds_2k").get<bool>();
    p.category   = length_category_from_name(j.at("category").get<std::string>());
    p.diagnostics = j.value("diagnostics", std::vector<std::string>{});
}

} // namespace superwriter
