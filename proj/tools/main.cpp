// superwriter: filter queries, run the writing agent, expand generation
// trees, judge leaves, harvest preference pairs, build SFT records, and
// compare response files, all against one run directory.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "superwriter/commands.hpp"
#include "superwriter/errors.hpp"
#include "superwriter/extract.hpp"
#include "superwriter/run_config.hpp"

using namespace superwriter;

namespace {

struct flag_overrides {
    std::string config_file;
    std::string run_dir;
    std::string endpoint;
    std::string model;
    std::string mock_script_file;
    std::string prompt_dir;
    std::string criteria_pool;
    std::string min_category;
    int         plans = 0, drafts = 0, refines = 0;
    int         judge_runs = 0;
    int         max_in_flight = 0;
    int         retry_limit = 0;
    long long   backoff_ms = -1;
    long long   budget_calls = -1;
    long long   budget_tokens = -1;
    long long   sft_budget = -1;
};

// Precedence: command line > environment > config file.
run_config effective_config(const flag_overrides & fl, const CLI::App & app) {
    run_config cfg;
    if (!fl.config_file.empty())
        cfg = load_config_file(fl.config_file);
    apply_env(cfg, [](const char * name) { return std::getenv(name); });

    auto given = [&app](const std::string & name) { return app.count(name) > 0; };
    if (given("--run-dir"))
        cfg.run_dir = fl.run_dir;
    if (given("--prompt-dir"))
        cfg.prompt_dir = fl.prompt_dir;
    if (given("--endpoint")) {
        for (backend_config * bc : {&cfg.agent_backend, &cfg.judge_backend, &cfg.filter_backend}) {
            bc->kind     = "http";
            bc->endpoint = fl.endpoint;
        }
    }
    if (given("--mock-script")) {
        for (backend_config * bc : {&cfg.agent_backend, &cfg.judge_backend, &cfg.filter_backend}) {
            bc->kind        = "mock";
            bc->mock_script = fl.mock_script_file;
        }
    }
    if (given("--model"))
        for (backend_config * bc : {&cfg.agent_backend, &cfg.judge_backend, &cfg.filter_backend})
            bc->model = fl.model;
    if (given("--plans"))
        cfg.tree.n_plans = fl.plans;
    if (given("--drafts"))
        cfg.tree.n_drafts = fl.drafts;
    if (given("--refines"))
        cfg.tree.n_refines = fl.refines;
    if (given("--judge-runs"))
        cfg.judge_runs = fl.judge_runs;
    if (given("--criteria-pool"))
        cfg.criteria_pool_file = fl.criteria_pool;
    if (given("--min-category"))
        cfg.min_category = length_category_from_name(fl.min_category);
    if (given("--max-in-flight"))
        cfg.max_in_flight = fl.max_in_flight;
    if (given("--retry-limit"))
        cfg.retry_limit = fl.retry_limit;
    if (given("--backoff-ms"))
        cfg.backoff_ms = fl.backoff_ms;
    if (given("--budget-calls"))
        cfg.max_calls = fl.budget_calls;
    if (given("--budget-tokens"))
        cfg.max_tokens = fl.budget_tokens;
    if (given("--sft-token-budget"))
        cfg.sft_token_budget = fl.sft_budget;
    return cfg;
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"writing-agent pipeline: plan, write, refine, judge, harvest"};
    app.require_subcommand(1);

    flag_overrides fl;
    app.add_option("-c,--config", fl.config_file, "JSON config file");
    app.add_option("--run-dir", fl.run_dir, "run directory (artifacts, cache, manifest)");
    app.add_option("--endpoint", fl.endpoint, "chat-completions base URL for every role");
    app.add_option("--model", fl.model, "model name for every role");
    app.add_option("--mock-script", fl.mock_script_file, "scripted mock backend for every role");
    app.add_option("--prompt-dir", fl.prompt_dir, "directory of prompt template overrides");
    app.add_option("--plans", fl.plans, "Stage-1 branches per tree");
    app.add_option("--drafts", fl.drafts, "Stage-2 branches per plan");
    app.add_option("--refines", fl.refines, "Stage-3 branches per draft");
    app.add_option("--judge-runs", fl.judge_runs, "score repetitions per leaf");
    app.add_option("--criteria-pool", fl.criteria_pool, "rubric criteria pool file");
    app.add_option("--min-category", fl.min_category,
                   "smallest kept length category (e.g. \"2000 words\")");
    app.add_option("--max-in-flight", fl.max_in_flight, "concurrent request cap");
    app.add_option("--retry-limit", fl.retry_limit, "attempts per backend call");
    app.add_option("--backoff-ms", fl.backoff_ms, "base retry backoff in milliseconds");
    app.add_option("--budget-calls", fl.budget_calls, "abort after this many backend calls");
    app.add_option("--budget-tokens", fl.budget_tokens, "abort after this many tokens");
    app.add_option("--sft-token-budget", fl.sft_budget, "per-record token cap");

    std::string queries, ours, baseline;
    auto * c_filter = app.add_subcommand("filter", "predict response length and keep long-form queries");
    c_filter->add_option("queries", queries, "query JSONL file")->required();
    auto * c_write = app.add_subcommand("write", "one full plan/write/refine pass per query");
    c_write->add_option("queries", queries, "query JSONL file")->required();
    auto * c_tree = app.add_subcommand("tree", "expand and persist a generation tree per query");
    c_tree->add_option("queries", queries, "query JSONL file")->required();
    auto * c_judge = app.add_subcommand("judge", "score every leaf of the persisted trees");
    c_judge->add_option("queries", queries, "query JSONL file (default: all trees)");
    auto * c_pairs = app.add_subcommand("pairs", "back-propagate rewards and export preference pairs");
    c_pairs->add_option("queries", queries, "query JSONL file (default: all trees)");
    auto * c_sft = app.add_subcommand("sft", "build stage-segmented training records from saved runs");
    c_sft->add_option("queries", queries, "query JSONL file (default: all runs)");
    auto * c_winrate = app.add_subcommand("winrate", "pairwise-judge two response files");
    c_winrate->add_option("ours", ours, "our responses (JSONL)")->required();
    c_winrate->add_option("baseline", baseline, "baseline responses (JSONL)")->required();
    auto * c_report = app.add_subcommand("report", "print manifest counters and artifact inventory");

    CLI11_PARSE(app, argc, argv);

    try {
        run_config cfg = effective_config(fl, app);
        command_io io  = default_io(std::cout);
        if (*c_filter)
            cmd_filter(cfg, queries, io);
        else if (*c_write)
            cmd_write(cfg, queries, io);
        else if (*c_tree)
            cmd_tree(cfg, queries, io);
        else if (*c_judge)
            cmd_judge(cfg, queries, io);
        else if (*c_pairs)
            cmd_pairs(cfg, queries, io);
        else if (*c_sft)
            cmd_sft(cfg, queries, io);
        else if (*c_winrate)
            cmd_winrate(cfg, ours, baseline, io);
        else if (*c_report)
            cmd_report(cfg, io);
    } catch (const error & e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception & e) {
        std::cerr << "UnexpectedFailure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
