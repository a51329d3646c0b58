#include "superwriter/run_config.hpp"

#include "superwriter/errors.hpp"
#include "superwriter/http_backend.hpp"
#include "superwriter/jsonl.hpp"
#include "superwriter/mock_backend.hpp"

namespace superwriter {

namespace {

void reject_unknown(const nlohmann::json & j, std::initializer_list<const char *> known,
                    const std::string & where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char * k : known)
            if (it.key() == k)
                ok = true;
        if (!ok)
            throw_error(errc::config_invalid, "unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void read_into(const nlohmann::json & j, const char * key, T & out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

void to_json(nlohmann::json & j, const backend_config & bc) {
    j = nlohmann::json{{"kind", bc.kind},         {"endpoint", bc.endpoint},
                       {"path", bc.path},         {"model", bc.model},
                       {"api_key_env", bc.api_key_env}, {"mock_script", bc.mock_script}};
}

void from_json(const nlohmann::json & j, backend_config & bc) {
    reject_unknown(j, {"kind", "endpoint", "path", "model", "api_key_env", "mock_script"},
                   "backend");
    read_into(j, "kind", bc.kind);
    read_into(j, "endpoint", bc.endpoint);
    read_into(j, "path", bc.path);
    read_into(j, "model", bc.model);
    read_into(j, "api_key_env", bc.api_key_env);
    read_into(j, "mock_script", bc.mock_script);
}

run_config parse_config(const nlohmann::json & j) {
    reject_unknown(j,
                   {"backends", "decoding", "tree", "judge", "filtering", "concurrency",
                    "retries", "budget", "paths", "sft"},
                   "config");
    run_config cfg;

    if (j.contains("backends")) {
        const auto & b = j.at("backends");
        reject_unknown(b, {"agent", "judge", "filter", "all"}, "backends");
        if (b.contains("all")) {
            backend_config shared = b.at("all").get<backend_config>();
            cfg.agent_backend = cfg.judge_backend = cfg.filter_backend = shared;
        }
        if (b.contains("agent"))
            cfg.agent_backend = b.at("agent").get<backend_config>();
        if (b.contains("judge"))
            cfg.judge_backend = b.at("judge").get<backend_config>();
        if (b.contains("filter"))
            cfg.filter_backend = b.at("filter").get<backend_config>();
    }
    if (j.contains("decoding")) {
        const auto & d = j.at("decoding");
        reject_unknown(d, {"temperature", "top_p", "max_tokens"}, "decoding");
        read_into(d, "temperature", cfg.decoding.temperature);
        read_into(d, "top_p", cfg.decoding.top_p);
        read_into(d, "max_tokens", cfg.decoding.max_tokens);
    }
    if (j.contains("tree")) {
        const auto & t = j.at("tree");
        reject_unknown(t, {"n_plans", "n_drafts", "n_refines"}, "tree");
        read_into(t, "n_plans", cfg.tree.n_plans);
        read_into(t, "n_drafts", cfg.tree.n_drafts);
        read_into(t, "n_refines", cfg.tree.n_refines);
    }
    if (j.contains("judge")) {
        const auto & d = j.at("judge");
        reject_unknown(d, {"runs", "criteria_pool_file"}, "judge");
        read_into(d, "runs", cfg.judge_runs);
        read_into(d, "criteria_pool_file", cfg.criteria_pool_file);
    }
    if (j.contains("filtering")) {
        const auto & f = j.at("filtering");
        reject_unknown(f, {"min_category"}, "filtering");
        if (f.contains("min_category"))
            cfg.min_category =
                length_category_from_name(f.at("min_category").get<std::string>());
    }
    if (j.contains("concurrency")) {
        const auto & c = j.at("concurrency");
        reject_unknown(c, {"max_in_flight"}, "concurrency");
        read_into(c, "max_in_flight", cfg.max_in_flight);
    }
    if (j.contains("retries")) {
        const auto & r = j.at("retries");
        reject_unknown(r, {"retry_limit", "backoff_ms"}, "retries");
        read_into(r, "retry_limit", cfg.retry_limit);
        read_into(r, "backoff_ms", cfg.backoff_ms);
    }
    if (j.contains("budget")) {
        const auto & b = j.at("budget");
        reject_unknown(b, {"max_calls", "max_tokens"}, "budget");
        read_into(b, "max_calls", cfg.max_calls);
        read_into(b, "max_tokens", cfg.max_tokens);
    }
    if (j.contains("paths")) {
        const auto & p = j.at("paths");
        reject_unknown(p, {"run_dir", "prompt_dir"}, "paths");
        if (p.contains("run_dir"))
            cfg.run_dir = p.at("run_dir").get<std::string>();
        if (p.contains("prompt_dir"))
            cfg.prompt_dir = p.at("prompt_dir").get<std::string>();
    }
    if (j.contains("sft")) {
        const auto & s = j.at("sft");
        reject_unknown(s, {"token_budget"}, "sft");
        read_into(s, "token_budget", cfg.sft_token_budget);
    }
    return cfg;
}

run_config load_config_file(const std::filesystem::path & path) {
    try {
        return parse_config(read_json_file(path));
    } catch (const error &) {
        throw;
    } catch (const std::exception & e) {
        throw_error(errc::config_invalid, path.string() + ": " + e.what());
    }
}

void apply_env(run_config & cfg, const env_lookup & getenv_fn) {
    auto all_backends = {&cfg.agent_backend, &cfg.judge_backend, &cfg.filter_backend};
    if (const char * v = getenv_fn("SUPERWRITER_RUN_DIR"); v && *v)
        cfg.run_dir = v;
    if (const char * v = getenv_fn("SUPERWRITER_ENDPOINT"); v && *v)
        for (auto * b : all_backends) {
            b->kind     = "http";
            b->endpoint = v;
        }
    if (const char * v = getenv_fn("SUPERWRITER_MODEL"); v && *v)
        for (auto * b : all_backends)
            b->model = v;
    if (const char * v = getenv_fn("SUPERWRITER_MOCK_SCRIPT"); v && *v)
        for (auto * b : all_backends) {
            b->kind        = "mock";
            b->mock_script = v;
        }
}

namespace {

void validate_backend(const backend_config & bc, const std::string & role) {
    if (bc.kind != "mock" && bc.kind != "http")
        throw_error(errc::config_invalid,
                    role + " backend kind must be 'mock' or 'http', got '" + bc.kind + "'");
    if (bc.kind == "http" && bc.endpoint.empty())
        throw_error(errc::config_invalid, role + " backend needs an endpoint");
    if (bc.model.empty())
        throw_error(errc::config_invalid, role + " backend needs a model name");
}

} // namespace

void validate(const run_config & cfg) {
    validate_backend(cfg.agent_backend, "agent");
    validate_backend(cfg.judge_backend, "judge");
    validate_backend(cfg.filter_backend, "filter");
    validate(cfg.tree);
    if (cfg.judge_runs < 1)
        throw_error(errc::config_invalid, "judge.runs must be at least 1");
    if (cfg.max_in_flight < 1)
        throw_error(errc::config_invalid, "concurrency.max_in_flight must be at least 1");
    if (cfg.retry_limit < 1)
        throw_error(errc::config_invalid, "retries.retry_limit must be at least 1");
    if (cfg.backoff_ms < 0)
        throw_error(errc::config_invalid, "retries.backoff_ms must be nonnegative");
    if (cfg.max_calls < 0 || cfg.max_tokens < 0)
        throw_error(errc::config_invalid, "budget caps must be nonnegative (0 disables)");
    if (cfg.decoding.max_tokens < 1)
        throw_error(errc::config_invalid, "decoding.max_tokens must be positive");
    if (cfg.sft_token_budget < 1)
        throw_error(errc::config_invalid, "sft.token_budget must be positive");
    if (cfg.run_dir.empty())
        throw_error(errc::config_invalid, "paths.run_dir must be set");
}

nlohmann::json config_snapshot(const run_config & cfg) {
    return nlohmann::json{
        {"backends",
         {{"agent", cfg.agent_backend},
          {"judge", cfg.judge_backend},
          {"filter", cfg.filter_backend}}},
        {"decoding",
         {{"temperature", cfg.decoding.temperature},
          {"top_p", cfg.decoding.top_p},
          {"max_tokens", cfg.decoding.max_tokens}}},
        {"tree", cfg.tree},
        {"judge", {{"runs", cfg.judge_runs}, {"criteria_pool_file", cfg.criteria_pool_file}}},
        {"filtering", {{"min_category", std::string(length_category_name(cfg.min_category))}}},
        {"concurrency", {{"max_in_flight", cfg.max_in_flight}}},
        {"retries", {{"retry_limit", cfg.retry_limit}, {"backoff_ms", cfg.backoff_ms}}},
        {"budget", {{"max_calls", cfg.max_calls}, {"max_tokens", cfg.max_tokens}}},
        {"paths",
         {{"run_dir", cfg.run_dir.string()}, {"prompt_dir", cfg.prompt_dir.string()}}},
        {"sft", {{"token_budget", cfg.sft_token_budget}}},
    };
}

std::shared_ptr<chat_backend> make_backend(const backend_config & bc,
                                           const env_lookup &     getenv_fn) {
    if (bc.kind == "mock") {
        mock_script script;
        if (!bc.mock_script.empty())
            script = mock_script::load(bc.mock_script);
        return std::make_shared<mock_backend>(std::move(script));
    }
    if (bc.kind == "http") {
        http_backend_options opts;
        opts.base_url = bc.endpoint;
        opts.path     = bc.path;
        if (!bc.api_key_env.empty())
            if (const char * key = getenv_fn(bc.api_key_env.c_str()); key && *key)
                opts.api_key = key;
        return std::make_shared<http_backend>(std::move(opts));
    }
    throw_error(errc::config_invalid, "backend kind '" + bc.kind + "' not recognized");
}

} // namespace superwriter
