#include "superwriter/mock_backend.hpp"

#include <chrono>
#include <cstdio>
#include <regex>
#include <thread>

#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"

namespace superwriter {

mock_script mock_script::from_json(const nlohmann::json & j) {
    mock_script script;
    script.default_reply = j.value("default_reply", "");
    for (const auto & rj : j.value("rules", nlohmann::json::array())) {
        mock_rule r;
        r.digest   = rj.value("digest", "");
        r.contains = rj.value("contains", "");
        r.regex    = rj.value("regex", "");
        r.reply    = rj.value("reply", "");
        r.mode     = rj.value("mode", "literal");
        if (rj.contains("criteria")) {
            rj.at("criteria").get_to(r.criteria);
        }
        r.fail_times = rj.value("fail_times", 0);
        if (rj.value("finish_reason", "stop") == "length") {
            r.finish = finish_reason::length;
        }
        script.rules.push_back(std::move(r));
    }
    return script;
}

mock_script mock_script::load(const std::filesystem::path & file) {
    return from_json(read_json_file(file));
}

mock_backend::mock_backend(mock_script script)
    : script_(std::move(script)), failures_left_(script_.rules.size()) {
    for (size_t i = 0; i < script_.rules.size(); ++i) {
        failures_left_[i].store(script_.rules[i].fail_times);
    }
}

void mock_backend::set_latency_fn(std::function<int(const chat_request &)> fn) {
    latency_ = std::move(fn);
}

std::vector<chat_request> mock_backend::history() const {
    std::lock_guard lock(mu_);
    return history_;
}

static std::string substitute_tokens(std::string text, int attempt, const std::string & digest) {
    auto replace_all = [&text](const std::string & from, const std::string & to) {
        size_t pos = 0;
        while ((pos = text.find(from, pos)) != std::string::npos) {
            text.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("{attempt}", std::to_string(attempt));
    replace_all("{digest8}", digest.substr(0, 8));
    return text;
}

double mock_score_value(const std::string & digest, int attempt, const std::string & name) {
    const std::string seed = digest + "/" + std::to_string(attempt) + "/" + name;
    const std::string hex  = sha256_hex(seed).substr(0, 8);
    const auto        bits = static_cast<std::uint32_t>(std::stoul(hex, nullptr, 16));
    // Two-decimal score in [0, 10].
    return (bits % 1001) / 100.0;
}

static std::string render_score_json(const mock_rule & rule, int attempt,
                                     const std::string & digest) {
    nlohmann::ordered_json doc;
    for (const auto & name : rule.criteria) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", mock_score_value(digest, attempt, name));
        doc[name] = { { "Analysis", "Scored by scripted backend." },
                      { "Score", std::stod(buf) } };
    }
    return "Evaluation follows.\n```json\n" + doc.dump(2) + "\n```\n";
}

chat_response mock_backend::complete(const chat_request & request) {
    invocations_.fetch_add(1);
    {
        std::lock_guard lock(mu_);
        history_.push_back(request);
    }
    if (latency_) {
        const int ms = latency_(request);
        if (ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        }
    }

    const std::string digest = prompt_digest(request.messages);
    std::string       text;
    for (const auto & m : request.messages) {
        text += m.content;
        text += '\n';
    }

    for (size_t i = 0; i < script_.rules.size(); ++i) {
        const auto & rule = script_.rules[i];
        bool         hit  = false;
        if (!rule.digest.empty()) {
            hit = rule.digest == digest;
        } else if (!rule.contains.empty()) {
            hit = text.find(rule.contains) != std::string::npos;
        } else if (!rule.regex.empty()) {
            hit = std::regex_search(text, std::regex(rule.regex));
        }
        if (!hit) {
            continue;
        }
        if (failures_left_[i].load() > 0 && failures_left_[i].fetch_sub(1) > 0) {
            throw_error(errc::endpoint_unreachable, "scripted transient failure");
        }
        chat_response resp;
        resp.finish = rule.finish;
        if (rule.mode == "score_json") {
            resp.content = render_score_json(rule, request.attempt_tag, digest);
        } else {
            resp.content = substitute_tokens(rule.reply, request.attempt_tag, digest);
        }
        resp.usage.prompt_tokens     = static_cast<std::int64_t>(text.size() / 4);
        resp.usage.completion_tokens = static_cast<std::int64_t>(resp.content.size() / 4);
        return resp;
    }

    if (!script_.default_reply.empty()) {
        chat_response resp;
        resp.finish  = finish_reason::stop;
        resp.content = substitute_tokens(script_.default_reply, request.attempt_tag, digest);
        resp.usage.prompt_tokens     = static_cast<std::int64_t>(text.size() / 4);
        resp.usage.completion_tokens = static_cast<std::int64_t>(resp.content.size() / 4);
        return resp;
    }
    throw_error(errc::malformed_response, "no mock rule matched prompt digest " + digest);
}

} // namespace superwriter
