#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "superwriter/commands.hpp"
#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"
#include "superwriter/manifest.hpp"
#include "superwriter/winrate.hpp"
#include "support/testenv.hpp"

using namespace superwriter;

namespace {

#define CHECK_ERRC(expr, code_)                                                                    \
    do {                                                                                           \
        try {                                                                                      \
            (void)(expr);                                                                          \
            FAIL("expected a typed error");                                                        \
        } catch (const error & e) {                                                                \
            CHECK(e.code() == (code_));                                                            \
        }                                                                                          \
    } while (0)

const char * null_env(const char *) { return nullptr; }

command_io io_into(std::ostringstream & oss) { return {&oss, null_env}; }

// Mock-backed config rooted in tmp, with the scripted rules written to disk.
run_config pipeline_cfg(const std::filesystem::path & tmp, tree_config tree = {2, 2, 2}) {
    run_config cfg;
    cfg.tree = tree;
    backend_config mock;
    mock.kind        = "mock";
    mock.mock_script = testenv::write_pipeline_script(tmp / "script.json").string();
    cfg.agent_backend = cfg.judge_backend = cfg.filter_backend = mock;
    cfg.run_dir = tmp / "run";
    return cfg;
}

std::filesystem::path write_queries(const std::filesystem::path & file) {
    std::vector<nlohmann::json> rows = {
        {{"id", "q-lighthouse"},
         {"text", "Write a short story about a lighthouse keeper weathering a storm alone."},
         {"language", "en"}},
        {{"id", "q-harvest"},
         {"text",
          "Write a reflective essay on what a small town loses when its last orchard is sold."},
         {"language", "en"}},
    };
    write_jsonl(file, rows);
    return file;
}

std::int64_t counter(const run_config & cfg, const std::string & name) {
    auto manifest = read_json_file(cfg.manifest_path()).get<run_manifest>();
    auto it       = manifest.counters.find(name);
    REQUIRE(it != manifest.counters.end());
    return it->second;
}

size_t file_count(const std::filesystem::path & dir) {
    size_t n = 0;
    if (std::filesystem::exists(dir))
        for (const auto & entry : std::filesystem::recursive_directory_iterator(dir))
            n += entry.is_regular_file();
    return n;
}

} // namespace

TEST_CASE("config files parse by section and reject unknown keys") {
    run_config defaults = parse_config(nlohmann::json::object());
    CHECK(defaults.tree.n_plans == 5);
    CHECK(defaults.judge_runs == 3);
    CHECK(defaults.min_category == length_category::w2000);
    CHECK(defaults.sft_token_budget == 32768);
    CHECK(defaults.run_dir == "superwriter-run");

    nlohmann::json doc = {
        {"backends",
         {{"all", {{"kind", "mock"}, {"model", "shared"}, {"mock_script", "rules.json"}}},
          {"judge", {{"kind", "http"}, {"endpoint", "http://box:1"}, {"model", "critic"}}}}},
        {"decoding", {{"temperature", 0.2}, {"top_p", 0.9}, {"max_tokens", 2048}}},
        {"tree", {{"n_plans", 3}, {"n_drafts", 2}, {"n_refines", 2}}},
        {"judge", {{"runs", 5}, {"criteria_pool_file", "pool.txt"}}},
        {"filtering", {{"min_category", "8000 words"}}},
        {"concurrency", {{"max_in_flight", 2}}},
        {"retries", {{"retry_limit", 4}, {"backoff_ms", 10}}},
        {"budget", {{"max_calls", 100}, {"max_tokens", 5000}}},
        {"paths", {{"run_dir", "out"}, {"prompt_dir", "prompts"}}},
        {"sft", {{"token_budget", 1024}}},
    };
    run_config cfg = parse_config(doc);
    CHECK(cfg.agent_backend.kind == "mock");
    CHECK(cfg.agent_backend.model == "shared");       // "all" fans out
    CHECK(cfg.filter_backend.mock_script == "rules.json");
    CHECK(cfg.judge_backend.kind == "http");          // role override wins
    CHECK(cfg.judge_backend.endpoint == "http://box:1");
    CHECK(cfg.decoding.temperature == 0.2);
    CHECK(cfg.tree.n_plans == 3);
    CHECK(cfg.judge_runs == 5);
    CHECK(cfg.criteria_pool_file == "pool.txt");
    CHECK(cfg.min_category == length_category::w8000);
    CHECK(cfg.max_in_flight == 2);
    CHECK(cfg.retry_limit == 4);
    CHECK(cfg.max_calls == 100);
    CHECK(cfg.run_dir == "out");
    CHECK(cfg.prompt_dir == "prompts");
    CHECK(cfg.sft_token_budget == 1024);

    CHECK_ERRC(parse_config({{"treee", nlohmann::json::object()}}), errc::config_invalid);
    CHECK_ERRC(parse_config({{"tree", {{"plans", 3}}}}), errc::config_invalid);
    CHECK_ERRC(parse_config({{"backends", {{"agent", {{"modle", "x"}}}}}}),
               errc::config_invalid);
    CHECK_ERRC(parse_config({{"filtering", {{"min_category", "3000 words"}}}}),
               errc::category_unrecognized);
}

TEST_CASE("config files load from disk with typed failures") {
    testenv::temp_dir tmp("cfg");
    {
        std::ofstream out(tmp.path() / "good.json");
        out << R"({"tree": {"n_plans": 2, "n_drafts": 2, "n_refines": 2}})" << "\n";
    }
    CHECK(load_config_file(tmp.path() / "good.json").tree.n_plans == 2);

    {
        std::ofstream out(tmp.path() / "broken.json");
        out << "{ not json";
    }
    CHECK_ERRC(load_config_file(tmp.path() / "broken.json"), errc::config_invalid);
    CHECK_ERRC(load_config_file(tmp.path() / "absent.json"), errc::io_failure);
}

TEST_CASE("environment variables override file values for every role") {
    std::map<std::string, std::string> env;
    env_lookup lookup = [&env](const char * name) -> const char * {
        auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    };

    run_config cfg;
    apply_env(cfg, lookup);
    CHECK(cfg.run_dir == "superwriter-run"); // nothing set, nothing changed
    CHECK(cfg.agent_backend.kind == "mock");

    env["SUPERWRITER_RUN_DIR"]  = "elsewhere";
    env["SUPERWRITER_ENDPOINT"] = "http://mirror:8000";
    env["SUPERWRITER_MODEL"]    = "served-model";
    apply_env(cfg, lookup);
    CHECK(cfg.run_dir == "elsewhere");
    for (const auto * b : {&cfg.agent_backend, &cfg.judge_backend, &cfg.filter_backend}) {
        CHECK(b->kind == "http");
        CHECK(b->endpoint == "http://mirror:8000");
        CHECK(b->model == "served-model");
    }

    env.clear();
    env["SUPERWRITER_MOCK_SCRIPT"] = "rules.json";
    apply_env(cfg, lookup);
    for (const auto * b : {&cfg.agent_backend, &cfg.judge_backend, &cfg.filter_backend}) {
        CHECK(b->kind == "mock");
        CHECK(b->mock_script == "rules.json");
        CHECK(b->model == "served-model"); // untouched by the script override
    }

    env["SUPERWRITER_RUN_DIR"] = ""; // empty values are ignored
    apply_env(cfg, lookup);
    CHECK(cfg.run_dir == "elsewhere");
}

TEST_CASE("config validation names the offending setting") {
    run_config cfg;
    validate(cfg); // defaults are valid

    run_config bad = cfg;
    bad.agent_backend.kind = "grpc";
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.judge_backend.kind = "http"; // no endpoint
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.filter_backend.model.clear();
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.tree.n_refines = 0;
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.judge_runs = 0;
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.max_calls = -1;
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.sft_token_budget = 0;
    CHECK_ERRC(validate(bad), errc::config_invalid);

    bad = cfg;
    bad.run_dir.clear();
    CHECK_ERRC(validate(bad), errc::config_invalid);
}

TEST_CASE("config snapshots are stable and sensitive to every section") {
    run_config a, b;
    CHECK(config_snapshot(a) == config_snapshot(b));
    CHECK(config_snapshot(a) == config_snapshot(a));

    b.tree.n_drafts = 2;
    CHECK(config_snapshot(a) != config_snapshot(b));
    b = a;
    b.judge_runs = 4;
    CHECK(config_snapshot(a) != config_snapshot(b));
    b = a;
    b.agent_backend.model = "other";
    CHECK(config_snapshot(a) != config_snapshot(b));
    b = a;
    b.run_dir = "other-dir";
    CHECK(config_snapshot(a) != config_snapshot(b));
}

TEST_CASE("backends are instantiated per role configuration") {
    testenv::temp_dir tmp("mkbackend");
    backend_config    bc;
    bc.kind        = "mock";
    bc.mock_script = testenv::write_pipeline_script(tmp.path() / "script.json").string();
    auto backend   = make_backend(bc, null_env);

    chat_request req;
    req.messages = {{"user", "please raise at least two questions about this"}};
    CHECK(backend->complete(req).content.find("Question pass") == 0);

    backend_config bare; // constructs, but an empty script matches nothing
    auto           empty_backend = make_backend(bare, null_env);
    CHECK_ERRC(empty_backend->complete(req), errc::malformed_response);

    backend_config unknown;
    unknown.kind = "grpc";
    CHECK_ERRC(make_backend(unknown, null_env), errc::config_invalid);

    backend_config http;
    http.kind     = "http";
    http.endpoint = "http://127.0.0.1:1";
    CHECK(make_backend(http, null_env) != nullptr); // construction does not connect
}

TEST_CASE("the manifest pins the configuration it was created under") {
    testenv::temp_dir tmp("manifest");
    const auto        path = tmp.path() / "manifest.json";
    nlohmann::json    snap = {{"tree", {{"n_plans", 2}}}};

    run_manifest first = load_or_init_manifest(path, snap);
    CHECK(!first.run_id.empty());
    CHECK(!first.created_at.empty());
    CHECK(first.counters.empty());

    first.counters["write.runs"] = 2;
    first.errors.push_back("sft: one record rejected");
    save_manifest(first, path);

    run_manifest second = load_or_init_manifest(path, snap);
    CHECK(second.run_id == first.run_id);
    CHECK(second.created_at == first.created_at);
    CHECK(second.counters.at("write.runs") == 2);
    REQUIRE(second.errors.size() == 1);

    nlohmann::json changed = {{"tree", {{"n_plans", 3}}}};
    CHECK_ERRC(load_or_init_manifest(path, changed), errc::manifest_conflict);
}

TEST_CASE("the command pipeline runs a (2,2,2) forest end to end") {
    testenv::temp_dir tmp("pipeline");
    run_config        cfg     = pipeline_cfg(tmp.path());
    auto              queries = write_queries(tmp.path() / "queries.jsonl");
    std::ostringstream oss;

    // Filter: two scripted predictions, both kept.
    cmd_filter(cfg, queries, io_into(oss));
    CHECK(counter(cfg, "filter.queries") == 2);
    CHECK(counter(cfg, "filter.kept") == 2);
    CHECK(counter(cfg, "filter.backend_calls") == 4); // yes/no + category per query
    CHECK(read_jsonl(cfg.filtered_path()).size() == 2);
    CHECK(read_jsonl(cfg.kept_path()).size() == 2);
    auto filtered_row = read_jsonl(cfg.filtered_path())[0];
    CHECK(filtered_row.at("kept") == true);
    CHECK(filtered_row.at("category") == "4000 words");

    // Write: one full pass per query, nothing cached yet.
    cmd_write(cfg, queries, io_into(oss));
    CHECK(counter(cfg, "write.runs") == 2);
    CHECK(counter(cfg, "write.backend_calls") == 36); // 18 calls per run
    CHECK(std::filesystem::exists(cfg.runs_dir() / "q-lighthouse" / "plan.json"));

    // Tree: 14 nodes of 6 calls per query; the attempt-zero path is already
    // in the cache from the full runs.
    cmd_tree(cfg, queries, io_into(oss));
    CHECK(counter(cfg, "tree.trees") == 2);
    CHECK(counter(cfg, "tree.backend_calls") == 168 - 36);
    CHECK(counter(cfg, "tree.cache_hits") == 36);

    // Judge: one rubric selection plus three runs per leaf, per tree.
    cmd_judge(cfg, {}, io_into(oss));
    CHECK(counter(cfg, "judge.leaves") == 16);
    CHECK(counter(cfg, "judge.backend_calls") == 2 * (1 + 8 * 3));

    // Pairs: exported count matches a fresh harvest of the stored trees.
    cmd_pairs(cfg, {}, io_into(oss));
    size_t expected_pairs = 0;
    for (const char * id : {"q-harvest", "q-lighthouse"}) {
        generation_tree tree    = load_tree(cfg.trees_dir() / id);
        auto            rewards = compute_rewards(collect_scores(tree), tree.config);
        expected_pairs += harvest_pairs(tree, rewards).pairs.size();
        CHECK(std::filesystem::exists(cfg.trees_dir() / id / "rewards.json"));
    }
    CHECK(counter(cfg, "pairs.exported") == static_cast<std::int64_t>(expected_pairs));
    CHECK(counter(cfg, "pairs.degenerate") >= 2); // two-plan trees always report one
    CHECK(import_pairs(cfg.pairs_path()).size() == expected_pairs);

    // SFT: three records per completed run, split by stage.
    cmd_sft(cfg, {}, io_into(oss));
    CHECK(counter(cfg, "sft.records") == 6);
    CHECK(counter(cfg, "sft.rejected") == 0);
    for (const char * stage : {"plan", "write", "refine"})
        CHECK(read_jsonl(cfg.sft_dir() / (std::string(stage) + ".jsonl")).size() == 2);

    // Winrate: two polished wins and one tie against the scripted judge.
    std::vector<nlohmann::json> ours = {
        {{"query_id", "q-lighthouse"}, {"query", "storm"}, {"response", "polished storm tale"}},
        {{"query_id", "q-harvest"}, {"query", "orchard"}, {"response", "polished orchard essay"}},
        {{"query_id", "q-letter"}, {"query", "letter"}, {"response", "plain letter"}},
    };
    std::vector<nlohmann::json> baseline = {
        {{"query_id", "q-lighthouse"}, {"response", "plain storm tale"}},
        {{"query_id", "q-harvest"}, {"response", "plain orchard essay"}},
        {{"query_id", "q-letter"}, {"response", "plain letter too"}},
    };
    write_jsonl(tmp.path() / "ours.jsonl", ours);
    write_jsonl(tmp.path() / "baseline.jsonl", baseline);
    cmd_winrate(cfg, tmp.path() / "ours.jsonl", tmp.path() / "baseline.jsonl", io_into(oss));
    CHECK(counter(cfg, "winrate.matchups") == 3);
    CHECK(counter(cfg, "winrate.wins") == 2);
    CHECK(counter(cfg, "winrate.losses") == 0);
    CHECK(counter(cfg, "winrate.ties") == 1);
    CHECK(counter(cfg, "winrate.backend_calls") == 6);
    CHECK(read_jsonl(cfg.winrate_dir() / "matchups.jsonl").size() == 3);
    auto summary = read_json_file(cfg.winrate_dir() / "summary.json");
    CHECK(summary.at("rate_numerator") == 5);
    CHECK(summary.at("rate_denominator") == 6);
    CHECK(summary.at("rate").get<double>() == 1.0 - 1.0 / 6.0);

    // Report: counters, errors, and the artifact inventory.
    std::ostringstream report;
    cmd_report(cfg, io_into(report));
    const std::string text = report.str();
    CHECK(text.find("write.runs = 2") != std::string::npos);
    CHECK(text.find("judge.leaves = 16") != std::string::npos);
    CHECK(text.find("pairs.jsonl: " + std::to_string(expected_pairs)) != std::string::npos);
    CHECK(text.find("sft/plan.jsonl: 2 records") != std::string::npos);
    CHECK(text.find("winrate: 2W/0L/1T") != std::string::npos);
    CHECK(text.find("counters: none") == std::string::npos);

    SUBCASE("every phase is idempotent under the same configuration") {
        std::ostringstream again;
        cmd_filter(cfg, queries, io_into(again));
        CHECK(counter(cfg, "filter.backend_calls") == 0);
        CHECK(counter(cfg, "filter.cache_hits") == 4);

        cmd_write(cfg, queries, io_into(again));
        CHECK(counter(cfg, "write.backend_calls") == 0);
        CHECK(counter(cfg, "write.runs") == 2);

        cmd_tree(cfg, queries, io_into(again));
        CHECK(counter(cfg, "tree.backend_calls") == 0);
        CHECK(counter(cfg, "tree.cache_hits") == 0); // node files, not the cache

        cmd_judge(cfg, {}, io_into(again));
        CHECK(counter(cfg, "judge.backend_calls") == 0);

        cmd_pairs(cfg, {}, io_into(again));
        CHECK(counter(cfg, "pairs.exported") == static_cast<std::int64_t>(expected_pairs));

        cmd_winrate(cfg, tmp.path() / "ours.jsonl", tmp.path() / "baseline.jsonl",
                    io_into(again));
        CHECK(counter(cfg, "winrate.backend_calls") == 0);
        CHECK(counter(cfg, "winrate.cache_hits") == 6);
    }

    SUBCASE("a changed tree shape refuses to resume") {
        run_config changed = cfg;
        changed.tree.n_refines = 3;
        CHECK_ERRC(cmd_tree(changed, queries, io_into(oss)), errc::manifest_conflict);
    }
}

TEST_CASE("pairs demand judged trees and report the first unscored leaf") {
    testenv::temp_dir tmp("unjudged");
    run_config        cfg     = pipeline_cfg(tmp.path());
    auto              queries = write_queries(tmp.path() / "queries.jsonl");
    std::ostringstream oss;

    cmd_tree(cfg, queries, io_into(oss));
    try {
        cmd_pairs(cfg, {}, io_into(oss));
        FAIL("expected unscored_leaf");
    } catch (const error & e) {
        CHECK(e.code() == errc::unscored_leaf);
        CHECK(std::string(e.what()).find("(0,0,0)") != std::string::npos);
    }
}

TEST_CASE("empty inputs fail loudly at the command layer") {
    testenv::temp_dir tmp("empty");
    run_config        cfg = pipeline_cfg(tmp.path());
    std::ostringstream oss;

    auto empty_file = tmp.path() / "none.jsonl";
    std::ofstream(empty_file).close();
    CHECK_ERRC(cmd_write(cfg, empty_file, io_into(oss)), errc::empty_input);
    CHECK_ERRC(cmd_judge(cfg, {}, io_into(oss)), errc::empty_input); // no trees yet
    CHECK_ERRC(cmd_winrate(cfg, empty_file, empty_file, io_into(oss)), errc::empty_input);
}

TEST_CASE("a fresh run directory reports empty state") {
    testenv::temp_dir tmp("fresh");
    run_config        cfg = pipeline_cfg(tmp.path());
    std::ostringstream oss;
    cmd_report(cfg, io_into(oss));
    CHECK(oss.str().find("counters: none") != std::string::npos);
    CHECK(oss.str().find("errors: none") != std::string::npos);
}

TEST_CASE("an interrupted forest resumes until the full call ledger is spent") {
    testenv::temp_dir tmp("interrupt");
    run_config        cfg = pipeline_cfg(tmp.path(), tree_config{5, 4, 3});
    cfg.max_calls         = 100;

    std::vector<nlohmann::json> one = {
        {{"id", "q-lighthouse"},
         {"text", "Write a short story about a lighthouse keeper weathering a storm alone."},
         {"language", "en"}}};
    auto queries = tmp.path() / "one.jsonl";
    write_jsonl(queries, one);
    std::ostringstream oss;

    // (5 + 20 + 60) nodes of 6 calls each; 100 fresh calls per attempt.
    const size_t total = 510;
    for (int attempt = 1; attempt <= 5; ++attempt) {
        CHECK_ERRC(cmd_tree(cfg, queries, io_into(oss)), errc::budget_exceeded);
        CHECK(file_count(cfg.cache_dir()) == static_cast<size_t>(100 * attempt));
    }

    cmd_tree(cfg, queries, io_into(oss)); // 510 = 5 * 100 + 10
    CHECK(counter(cfg, "tree.trees") == 1);
    CHECK(counter(cfg, "tree.backend_calls") == 10);
    CHECK(file_count(cfg.cache_dir()) == total);

    cmd_tree(cfg, queries, io_into(oss));
    CHECK(counter(cfg, "tree.backend_calls") == 0);
    CHECK(file_count(cfg.cache_dir()) == total);

    generation_tree tree = load_tree(cfg.trees_dir() / "q-lighthouse");
    CHECK(tree.plans.size() == 5);
    CHECK(tree.drafts.size() == 20);
    CHECK(tree.refinements.size() == 60);
}
