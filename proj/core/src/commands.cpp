#include "superwriter/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"
#include "superwriter/manifest.hpp"
#include "superwriter/winrate.hpp"

namespace superwriter {

namespace {

std::vector<writing_query> read_queries(const std::filesystem::path & file) {
    std::vector<writing_query> out;
    for (const auto & row : read_jsonl(file))
        out.push_back(row.get<writing_query>());
    if (out.empty())
        throw_error(errc::empty_input, "no queries in " + file.string());
    return out;
}

// Query ids from the file when given, else the existing subdirectories.
std::vector<std::string> select_ids(const std::filesystem::path & queries_file,
                                    const std::filesystem::path & scan_dir) {
    std::vector<std::string> ids;
    if (!queries_file.empty()) {
        for (const auto & q : read_queries(queries_file))
            ids.push_back(q.id);
        return ids;
    }
    if (std::filesystem::exists(scan_dir))
        for (const auto & entry : std::filesystem::directory_iterator(scan_dir))
            if (entry.is_directory())
                ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());
    if (ids.empty())
        throw_error(errc::empty_input, "nothing to process under " + scan_dir.string());
    return ids;
}

struct phase {
    run_config               cfg;
    command_io               io;
    run_manifest             manifest;
    prompt_library           lib;
    std::unique_ptr<gateway> gw; // set only when the phase talks to a model

    phase(const run_config & config, command_io io_, const backend_config * role)
        : cfg(config), io(io_), lib(config.prompt_dir.empty()
                                        ? prompt_library::builtin()
                                        : prompt_library::from_dir(config.prompt_dir)) {
        validate(cfg);
        std::filesystem::create_directories(cfg.run_dir);
        manifest = load_or_init_manifest(cfg.manifest_path(), config_snapshot(cfg));
        if (role) {
            gateway_options opts;
            opts.retry_limit = cfg.retry_limit;
            opts.backoff_ms  = cfg.backoff_ms;
            opts.max_calls   = cfg.max_calls;
            opts.max_tokens  = cfg.max_tokens;
            gw = std::make_unique<gateway>(make_backend(*role, io.env),
                                           response_cache(cfg.cache_dir()), opts);
        }
    }

    void finish(const std::string & prefix) {
        if (gw) {
            manifest.counters[prefix + ".backend_calls"] = gw->backend_calls();
            manifest.counters[prefix + ".cache_hits"]    = gw->cache_hits();
        }
        save_manifest(manifest, cfg.manifest_path());
    }

    std::ostream & out() { return *io.out; }
};

agent_options make_agent_options(const run_config & cfg) {
    agent_options opts;
    opts.model       = cfg.agent_backend.model;
    opts.temperature = cfg.decoding.temperature;
    opts.top_p       = cfg.decoding.top_p;
    opts.max_tokens  = cfg.decoding.max_tokens;
    return opts;
}

judge_options make_judge_options(const run_config & cfg) {
    judge_options opts;
    opts.model       = cfg.judge_backend.model;
    opts.temperature = cfg.decoding.temperature;
    opts.top_p       = cfg.decoding.top_p;
    opts.max_tokens  = cfg.decoding.max_tokens;
    opts.runs        = cfg.judge_runs;
    if (!cfg.criteria_pool_file.empty())
        opts.criteria_pool = read_text_file(cfg.criteria_pool_file);
    return opts;
}

} // namespace

command_io default_io(std::ostream & out) {
    return {&out, [](const char * name) { return std::getenv(name); }};
}

void cmd_filter(const run_config & cfg, const std::filesystem::path & queries_file,
                command_io io) {
    phase ph(cfg, io, &cfg.filter_backend);
    auto  queries = read_queries(queries_file);

    filter_options fopts;
    fopts.model        = cfg.filter_backend.model;
    fopts.temperature  = cfg.decoding.temperature;
    fopts.top_p        = cfg.decoding.top_p;
    fopts.max_tokens   = cfg.decoding.max_tokens;
    fopts.min_category = cfg.min_category;
    length_filter filter(*ph.gw, ph.lib, fopts);

    std::vector<nlohmann::json> rows, kept_rows;
    for (const auto & q : queries) {
        length_prediction pred = filter.predict(q.text);
        bool              kept = filter.keep(pred);
        nlohmann::json    row  = {{"id", q.id},
                                  {"text", q.text},
                                  {"language", q.language},
                                  {"exceeds_2k", pred.exceeds_2k},
                                  {"category", std::string(length_category_name(pred.category))},
                                  {"kept", kept}};
        rows.push_back(row);
        if (kept)
            kept_rows.push_back(nlohmann::json(q));
        for (const auto & d : pred.diagnostics)
            ph.manifest.errors.push_back("filter '" + q.id + "': " + d);
    }
    write_jsonl(cfg.filtered_path(), rows);
    write_jsonl(cfg.kept_path(), kept_rows);

    ph.manifest.counters["filter.queries"] = static_cast<std::int64_t>(rows.size());
    ph.manifest.counters["filter.kept"]    = static_cast<std::int64_t>(kept_rows.size());
    ph.out() << "filtered " << rows.size() << " queries, kept " << kept_rows.size() << "\n";
    ph.finish("filter");
}

void cmd_write(const run_config & cfg, const std::filesystem::path & queries_file,
               command_io io) {
    phase ph(cfg, io, &cfg.agent_backend);
    auto  queries = read_queries(queries_file);

    writing_agent agent(*ph.gw, ph.lib, make_agent_options(cfg));
    std::int64_t  completed = 0;
    for (const auto & q : queries) {
        const std::filesystem::path dir = cfg.runs_dir() / q.id;
        bool                        have = false;
        if (std::filesystem::exists(dir)) {
            try {
                load_run(dir);
                have = true;
            } catch (const error &) {
                have = false; // partial save; regenerate through the cache
            }
        }
        if (!have)
            save_run(dir, agent.run_full(q));
        ++completed;
        ph.out() << "run " << q.id << (have ? " already complete" : " written") << "\n";
    }
    ph.manifest.counters["write.runs"] = completed;
    ph.finish("write");
}

void cmd_tree(const run_config & cfg, const std::filesystem::path & queries_file,
              command_io io) {
    phase ph(cfg, io, &cfg.agent_backend);
    auto  queries = read_queries(queries_file);

    writing_agent  agent(*ph.gw, ph.lib, make_agent_options(cfg));
    forest_builder builder(agent, cfg.tree, cfg.trees_dir());
    std::int64_t   trees = 0;
    for (const auto & q : queries) {
        generation_tree tree = builder.expand(q);
        ++trees;
        ph.out() << "tree " << q.id << ": " << tree.plans.size() << " plans, "
                 << tree.drafts.size() << " drafts, " << tree.refinements.size()
                 << " refinements\n";
    }
    ph.manifest.counters["tree.trees"] = trees;
    ph.finish("tree");
}

void cmd_judge(const run_config & cfg, const std::filesystem::path & queries_file,
               command_io io) {
    phase ph(cfg, io, &cfg.judge_backend);
    auto  ids = select_ids(queries_file, cfg.trees_dir());

    write_judge  judge(*ph.gw, ph.lib, make_judge_options(cfg));
    std::int64_t leaves = 0;
    for (const auto & id : ids) {
        const std::filesystem::path dir  = cfg.trees_dir() / id;
        generation_tree             tree = load_tree(dir);
        judge_tree(judge, tree, dir);
        leaves += tree.config.leaf_count();
        ph.out() << "judged " << id << ": " << tree.config.leaf_count() << " leaves\n";
    }
    ph.manifest.counters["judge.leaves"] = leaves;
    ph.finish("judge");
}

void cmd_pairs(const run_config & cfg, const std::filesystem::path & queries_file,
               command_io io) {
    phase ph(cfg, io, nullptr);
    auto  ids = select_ids(queries_file, cfg.trees_dir());

    std::vector<preference_pair> all_pairs;
    std::int64_t                 degenerate = 0;
    for (const auto & id : ids) {
        const std::filesystem::path dir  = cfg.trees_dir() / id;
        generation_tree             tree = load_tree(dir);
        std::vector<double>         scores  = collect_scores(tree);
        reward_assignment           rewards = compute_rewards(scores, tree.config);
        write_json_file(dir / "rewards.json", rewards);

        harvest_result harvest = harvest_pairs(tree, rewards);
        for (const auto & d : harvest.diagnostics) {
            ph.manifest.errors.push_back("pairs '" + id + "': " + d);
            ++degenerate;
        }
        all_pairs.insert(all_pairs.end(), harvest.pairs.begin(), harvest.pairs.end());
        ph.out() << "harvested " << id << ": " << harvest.pairs.size() << " pairs\n";
    }

    if (all_pairs.empty()) {
        ph.out() << "no signal: every level was degenerate, nothing exported\n";
    } else {
        size_t n = export_pairs(all_pairs, cfg.pairs_path());
        ph.out() << "exported " << n << " pairs to " << cfg.pairs_path().string() << "\n";
    }
    ph.manifest.counters["pairs.exported"]   = static_cast<std::int64_t>(all_pairs.size());
    ph.manifest.counters["pairs.degenerate"] = degenerate;
    ph.finish("pairs");
}

void cmd_sft(const run_config & cfg, const std::filesystem::path & queries_file,
             command_io io) {
    phase ph(cfg, io, nullptr);
    auto  ids = select_ids(queries_file, cfg.runs_dir());

    sft_options sopts;
    sopts.token_budget = cfg.sft_token_budget;

    std::vector<nlohmann::json> by_stage[3];
    std::int64_t                records = 0, rejected = 0;
    for (const auto & id : ids) {
        agent_run        run    = load_run(cfg.runs_dir() / id);
        sft_build_result result = build_sft_records(run, sopts);
        for (const auto & rec : result.records) {
            by_stage[static_cast<int>(rec.stage)].push_back(nlohmann::json(rec));
            ++records;
        }
        for (const auto & reason : result.rejections) {
            ph.manifest.errors.push_back("sft: " + reason);
            ++rejected;
        }
    }

    std::filesystem::create_directories(cfg.sft_dir());
    for (sft_stage stage : {sft_stage::plan, sft_stage::write, sft_stage::refine})
        write_jsonl(cfg.sft_dir() / (std::string(sft_stage_name(stage)) + ".jsonl"),
                    by_stage[static_cast<int>(stage)]);

    ph.manifest.counters["sft.records"]  = records;
    ph.manifest.counters["sft.rejected"] = rejected;
    ph.out() << "built " << records << " records (" << rejected << " rejected) in "
             << cfg.sft_dir().string() << "\n";
    ph.finish("sft");
}

void cmd_winrate(const run_config & cfg, const std::filesystem::path & ours_file,
                 const std::filesystem::path & baseline_file, command_io io) {
    phase ph(cfg, io, &cfg.judge_backend);

    auto matchups = pair_responses(read_jsonl(ours_file), read_jsonl(baseline_file));
    if (matchups.empty())
        throw_error(errc::empty_input, "no matchups between the response files");

    winrate_options wopts;
    wopts.model       = cfg.judge_backend.model;
    wopts.temperature = cfg.decoding.temperature;
    wopts.top_p       = cfg.decoding.top_p;
    wopts.max_tokens  = cfg.decoding.max_tokens;
    winrate_judge judge(*ph.gw, ph.lib, wopts);

    std::vector<nlohmann::json> rows;
    std::vector<match_result>   results;
    for (const auto & m : matchups) {
        judged_matchup judged = judge.judge_matchup(m);
        match_result   res    = resolve(judged);
        results.push_back(res);

        nlohmann::json row = judged;
        row["margin"]      = res.margin;
        row["outcome"]     = match_outcome_name(res.outcome);
        rows.push_back(std::move(row));
    }

    winrate_summary summary = summarize(results);
    std::filesystem::create_directories(cfg.winrate_dir());
    write_jsonl(cfg.winrate_dir() / "matchups.jsonl", rows);
    write_json_file(cfg.winrate_dir() / "summary.json", summary);

    ph.manifest.counters["winrate.matchups"] = summary.total();
    ph.manifest.counters["winrate.wins"]     = summary.wins;
    ph.manifest.counters["winrate.losses"]   = summary.losses;
    ph.manifest.counters["winrate.ties"]     = summary.ties;
    ph.out() << "win " << summary.wins << " / loss " << summary.losses << " / tie "
             << summary.ties << ", rate " << summary.rate() << "\n";
    ph.finish("winrate");
}

void cmd_report(const run_config & cfg, command_io io) {
    phase ph(cfg, io, nullptr);

    auto & out = ph.out();
    out << "run " << ph.manifest.run_id << " created " << ph.manifest.created_at << "\n";
    if (ph.manifest.counters.empty())
        out << "counters: none\n";
    for (const auto & [name, value] : ph.manifest.counters)
        out << "  " << name << " = " << value << "\n";
    if (ph.manifest.errors.empty())
        out << "errors: none\n";
    for (const auto & e : ph.manifest.errors)
        out << "  error: " << e << "\n";

    auto count_lines = [](const std::filesystem::path & p) {
        return std::filesystem::exists(p) ? read_jsonl(p).size() : 0;
    };
    if (std::filesystem::exists(cfg.pairs_path()))
        out << "pairs.jsonl: " << count_lines(cfg.pairs_path()) << " pairs\n";
    for (const char * stage : {"plan", "write", "refine"}) {
        auto p = cfg.sft_dir() / (std::string(stage) + ".jsonl");
        if (std::filesystem::exists(p))
            out << "sft/" << stage << ".jsonl: " << count_lines(p) << " records\n";
    }
    auto summary_path = cfg.winrate_dir() / "summary.json";
    if (std::filesystem::exists(summary_path)) {
        winrate_summary s = read_json_file(summary_path).get<winrate_summary>();
        out << "winrate: " << s.wins << "W/" << s.losses << "L/" << s.ties << "T rate "
            << s.rate() << "\n";
    }
    ph.finish("report");
}

} // namespace superwriter
