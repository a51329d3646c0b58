#include "superwriter/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"

namespace superwriter {

namespace {

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

void check_finite(const std::vector<double> & scores) {
    for (size_t i = 0; i < scores.size(); ++i)
        if (!std::isfinite(scores[i]))
            throw_error(errc::non_finite_input,
                        "score at flat index " + std::to_string(i) + " is not finite");
}

// Lowest index attaining the extremum; first==true -> maximum.
template <typename Get>
int arg_extreme(int count, Get get, bool maximum) {
    int best = 0;
    for (int i = 1; i < count; ++i) {
        double v = get(i), b = get(best);
        if (maximum ? v > b : v < b)
            best = i;
    }
    return best;
}

} // namespace

void validate(const tree_config & cfg) {
    if (cfg.n_plans < 1 || cfg.n_drafts < 1 || cfg.n_refines < 1)
        throw_error(errc::config_invalid,
                    "tree dimensions must be positive, got (" + std::to_string(cfg.n_plans) +
                        "," + std::to_string(cfg.n_drafts) + "," +
                        std::to_string(cfg.n_refines) + ")");
}

std::string coord_label(const leaf_coord & c) {
    auto part = [](int v) { return v < 0 ? std::string("-") : std::to_string(v); };
    return "(" + part(c.plan) + "," + part(c.draft) + "," + part(c.refine) + ")";
}

int ordinal_reward(int rank, int total) {
    if (rank < 1 || total < 1 || rank > total)
        throw_error(errc::size_mismatch,
                    "rank " + std::to_string(rank) + " outside 1.." + std::to_string(total));
    if (rank * 6 <= total)
        return 2;
    if (rank * 6 <= 2 * total)
        return 1;
    if (rank * 6 <= 4 * total)
        return 0;
    if (rank * 6 <= 5 * total)
        return -1;
    return -2;
}

std::vector<leaf_reward> discretize(const std::vector<double> & scores, size_t expected_count) {
    if (expected_count < 1 || scores.size() != expected_count)
        throw_error(errc::size_mismatch,
                    "expected " + std::to_string(expected_count) + " scores, got " +
                        std::to_string(scores.size()));
    check_finite(scores);

    const int        n = static_cast<int>(scores.size());
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });

    // Equal scores share the rank of their first (highest-score) position.
    std::vector<leaf_reward> out(scores.size());
    int                      rank = 1;
    for (int pos = 0; pos < n; ++pos) {
        if (pos > 0 && scores[order[pos]] < scores[order[pos - 1]])
            rank = pos + 1;
        leaf_reward & r = out[order[pos]];
        r.rank          = rank;
        r.percentile    = static_cast<double>(rank) / static_cast<double>(n);
        r.ordinal       = ordinal_reward(rank, n);
    }
    return out;
}

std::vector<leaf_reward> discretize(const std::vector<double> & scores) {
    return discretize(scores, scores.size());
}

stage_rewards aggregate(const std::vector<int> & ordinals, const tree_config & cfg) {
    validate(cfg);
    if (ordinals.size() != static_cast<size_t>(cfg.leaf_count()))
        throw_error(errc::size_mismatch,
                    "expected " + std::to_string(cfg.leaf_count()) + " ordinals, got " +
                        std::to_string(ordinals.size()));

    stage_rewards out;
    out.stage2.resize(cfg.draft_count());
    out.stage1.resize(cfg.n_plans);

    for (int i = 0; i < cfg.n_plans; ++i) {
        for (int j = 0; j < cfg.n_drafts; ++j) {
            double sum = 0.0;
            for (int k = 0; k < cfg.n_refines; ++k)
                sum += ordinals[cfg.leaf_index(i, j, k)];
            out.stage2[cfg.draft_index(i, j)] = sum / cfg.n_refines;
        }
        double sum = 0.0;
        for (int j = 0; j < cfg.n_drafts; ++j)
            sum += out.stage2[cfg.draft_index(i, j)];
        out.stage1[i] = sum / cfg.n_drafts;
    }
    return out;
}

reward_assignment compute_rewards(const std::vector<double> & scores, const tree_config & cfg) {
    validate(cfg);
    reward_assignment out;
    out.leaves = discretize(scores, static_cast<size_t>(cfg.leaf_count()));

    std::vector<int> ordinals(out.leaves.size());
    for (size_t i = 0; i < out.leaves.size(); ++i)
        ordinals[i] = out.leaves[i].ordinal;

    stage_rewards stages = aggregate(ordinals, cfg);
    out.stage2           = std::move(stages.stage2);
    out.stage1           = std::move(stages.stage1);
    return out;
}

const char * pair_level_name(pair_level level) {
    switch (level) {
        case pair_level::plan:   return "plan";
        case pair_level::write:  return "write";
        case pair_level::refine: return "refine";
    }
    return "plan";
}

pair_level pair_level_from_name(const std::string & name) {
    if (name == "plan")
        return pair_level::plan;
    if (name == "write")
        return pair_level::write;
    if (name == "refine")
        return pair_level::refine;
    throw_error(errc::config_invalid, "unknown pair level '" + name + "'");
}

pair_report select_pairs(const std::vector<double> & scores, const reward_assignment & rewards,
                         const tree_config & cfg, harvest_options opts) {
    validate(cfg);
    const size_t n_leaves = static_cast<size_t>(cfg.leaf_count());
    if (scores.size() != n_leaves || rewards.leaves.size() != n_leaves ||
        rewards.stage2.size() != static_cast<size_t>(cfg.draft_count()) ||
        rewards.stage1.size() != static_cast<size_t>(cfg.n_plans))
        throw_error(errc::size_mismatch, "scores or rewards do not match the tree shape");

    pair_report rep;
    const auto & s1 = rewards.stage1;
    const auto & s2 = rewards.stage2;

    // Plan level: best plan against the two worst others.
    int best = arg_extreme(cfg.n_plans, [&](int i) { return s1[i]; }, true);
    int low  = arg_extreme(cfg.n_plans, [&](int i) { return s1[i]; }, false);
    if (best == low) {
        rep.diagnostics.push_back(
            "DegenerateLevel: plan rewards admit no best/worst split; plan pairs skipped");
    } else {
        std::vector<int> others;
        for (int i = 0; i < cfg.n_plans; ++i)
            if (i != best)
                others.push_back(i);
        std::stable_sort(others.begin(), others.end(),
                         [&](int a, int b) { return s1[a] < s1[b]; });
        for (size_t w = 0; w < others.size() && w < 2; ++w) {
            pair_selection p;
            p.level           = pair_level::plan;
            p.chosen          = {best, -1, -1};
            p.rejected        = {others[w], -1, -1};
            p.chosen_reward   = s1[best];
            p.rejected_reward = s1[others[w]];
            rep.pairs.push_back(p);
        }
        if (others.size() < 2)
            rep.diagnostics.push_back(
                "plan level has a single rejected candidate; one pair emitted instead of two");
    }

    // Best two plans (by reward, lowest index first on ties) anchor the
    // write level whether or not the plan level produced pairs.
    std::vector<int> ranked(cfg.n_plans);
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](int a, int b) { return s1[a] > s1[b]; });

    std::vector<std::pair<int, int>> refine_anchors; // (plan, draft)
    for (int slot = 0; slot < cfg.n_plans && slot < 2; ++slot) {
        int  p    = ranked[slot];
        auto row  = [&](int j) { return s2[cfg.draft_index(p, j)]; };
        int  jmax = arg_extreme(cfg.n_drafts, row, true);
        int  jmin = arg_extreme(cfg.n_drafts, row, false);
        if (jmax == jmin) {
            rep.diagnostics.push_back("DegenerateLevel: draft rewards for plan " +
                                      std::to_string(p) + " are uniform; write pair skipped");
            continue;
        }
        pair_selection sel;
        sel.level           = pair_level::write;
        sel.chosen          = {p, jmax, -1};
        sel.rejected        = {p, jmin, -1};
        sel.chosen_reward   = row(jmax);
        sel.rejected_reward = row(jmin);
        rep.pairs.push_back(sel);
        refine_anchors.emplace_back(p, opts.refine_from_losers ? jmin : jmax);
    }

    // Refine level: within each anchored draft, judged scores decide.
    for (auto [p, j] : refine_anchors) {
        auto leaf = [&](int k) { return scores[cfg.leaf_index(p, j, k)]; };
        int  kmax = arg_extreme(cfg.n_refines, leaf, true);
        int  kmin = arg_extreme(cfg.n_refines, leaf, false);
        if (kmax == kmin) {
            rep.diagnostics.push_back("DegenerateLevel: refinement scores for plan " +
                                      std::to_string(p) + " draft " + std::to_string(j) +
                                      " are uniform; refine pair skipped");
            continue;
        }
        pair_selection sel;
        sel.level           = pair_level::refine;
        sel.chosen          = {p, j, kmax};
        sel.rejected        = {p, j, kmin};
        sel.chosen_reward   = leaf(kmax);
        sel.rejected_reward = leaf(kmin);
        rep.pairs.push_back(sel);
    }

    return rep;
}

std::vector<double> collect_scores(const generation_tree & tree) {
    validate(tree.config);
    const int           n = tree.config.leaf_count();
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < tree.config.n_plans; ++i)
        for (int j = 0; j < tree.config.n_drafts; ++j)
            for (int k = 0; k < tree.config.n_refines; ++k) {
                int idx = tree.config.leaf_index(i, j, k);
                if (idx >= static_cast<int>(tree.leaf_scores.size()) ||
                    tree.leaf_scores[idx].runs.empty() ||
                    !std::isfinite(tree.leaf_scores[idx].s))
                    throw_error(errc::unscored_leaf,
                                "leaf " + coord_label({i, j, k}) + " has no judge score");
                out[idx] = tree.leaf_scores[idx].s;
            }
    return out;
}

std::string plan_level_text(const plan_record & plan) {
    return plan.refined_design + "\n\n" + plan_outline_text(plan);
}

harvest_result harvest_pairs(const generation_tree & tree, const reward_assignment & rewards,
                             harvest_options opts) {
    std::vector<double> scores = collect_scores(tree);
    pair_report         rep    = select_pairs(scores, rewards, tree.config, opts);

    auto write_context = [&](int plan) {
        return tree.query.text + "\n\n" + plan_level_text(tree.plans[plan]);
    };

    harvest_result out;
    out.diagnostics = rep.diagnostics;
    for (const auto & sel : rep.pairs) {
        preference_pair p;
        p.query_id        = tree.query.id;
        p.level           = sel.level;
        p.chosen_coord    = sel.chosen;
        p.rejected_coord  = sel.rejected;
        p.chosen_reward   = sel.chosen_reward;
        p.rejected_reward = sel.rejected_reward;
        switch (sel.level) {
            case pair_level::plan:
                p.context  = tree.query.text;
                p.chosen   = plan_level_text(tree.plans[sel.chosen.plan]);
                p.rejected = plan_level_text(tree.plans[sel.rejected.plan]);
                break;
            case pair_level::write:
                p.context = write_context(sel.chosen.plan);
                p.chosen  = draft_text(
                    tree.drafts[tree.config.draft_index(sel.chosen.plan, sel.chosen.draft)]);
                p.rejected = draft_text(
                    tree.drafts[tree.config.draft_index(sel.rejected.plan, sel.rejected.draft)]);
                break;
            case pair_level::refine:
                p.context = write_context(sel.chosen.plan) + "\n\n" +
                            draft_text(tree.drafts[tree.config.draft_index(sel.chosen.plan,
                                                                           sel.chosen.draft)]);
                p.chosen   = refined_text(tree.refinements[tree.config.leaf_index(
                    sel.chosen.plan, sel.chosen.draft, sel.chosen.refine)]);
                p.rejected = refined_text(tree.refinements[tree.config.leaf_index(
                    sel.rejected.plan, sel.rejected.draft, sel.rejected.refine)]);
                break;
        }
        out.pairs.push_back(std::move(p));
    }
    return out;
}

void to_json(nlohmann::json & j, const preference_pair & p) {
    j = nlohmann::json{
        {"level", pair_level_name(p.level)},
        {"prompt", p.context},
        {"chosen", p.chosen},
        {"rejected", p.rejected},
        {"provenance",
         {{"query_id", p.query_id},
          {"chosen", {p.chosen_coord.plan, p.chosen_coord.draft, p.chosen_coord.refine}},
          {"rejected", {p.rejected_coord.plan, p.rejected_coord.draft, p.rejected_coord.refine}},
          {"chosen_reward", p.chosen_reward},
          {"rejected_reward", p.rejected_reward}}},
    };
}

void from_json(const nlohmann::json & j, preference_pair & p) {
    p.level    = pair_level_from_name(j.at("level").get<std::string>());
    p.context  = j.at("prompt").get<std::string>();
    p.chosen   = j.at("chosen").get<std::string>();
    p.rejected = j.at("rejected").get<std::string>();

    const auto & prov = j.at("provenance");
    p.query_id        = prov.at("query_id").get<std::string>();
    auto read_coord   = [](const nlohmann::json & a) {
        return leaf_coord{a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>()};
    };
    p.chosen_coord    = read_coord(prov.at("chosen"));
    p.rejected_coord  = read_coord(prov.at("rejected"));
    p.chosen_reward   = prov.at("chosen_reward").get<double>();
    p.rejected_reward = prov.at("rejected_reward").get<double>();
}

size_t export_pairs(const std::vector<preference_pair> & pairs,
                    const std::filesystem::path & path) {
    if (pairs.empty())
        throw_error(errc::empty_input, "no preference pairs to export");
    std::vector<nlohmann::json> rows;
    rows.reserve(pairs.size());
    for (const auto & p : pairs)
        rows.push_back(p);
    write_jsonl(path, rows);
    return pairs.size();
}

std::vector<preference_pair> import_pairs(const std::filesystem::path & path) {
    std::vector<preference_pair> out;
    for (const auto & row : read_jsonl(path))
        out.push_back(row.get<preference_pair>());
    return out;
}

double dpo_loss(double beta, double delta) {
    if (!std::isfinite(beta) || !std::isfinite(delta))
        throw_error(errc::non_finite_input, "beta and delta must be finite");
    if (beta <= 0.0)
        throw_error(errc::config_invalid, "beta must be positive");
    double x = -beta * delta;
    return x <= 0.0 ? std::log1p(std::exp(x)) : x + std::log1p(std::exp(-x));
}

forest_builder::forest_builder(writing_agent & agent, tree_config cfg, std::filesystem::path root)
    : agent_(&agent), cfg_(cfg), root_(std::move(root)) {
    validate(cfg_);
}

std::filesystem::path forest_builder::tree_dir(const std::string & query_id) const {
    return root_ / query_id;
}

std::filesystem::path forest_builder::plan_dir(const std::filesystem::path & tree_dir, int i) {
    return tree_dir / ("plan_" + two_digits(i));
}

std::filesystem::path forest_builder::draft_dir(const std::filesystem::path & tree_dir, int i,
                                                int j) {
    return plan_dir(tree_dir, i) / ("draft_" + two_digits(j));
}

std::filesystem::path forest_builder::refine_dir(const std::filesystem::path & tree_dir, int i,
                                                 int j, int k) {
    return draft_dir(tree_dir, i, j) / ("refine_" + two_digits(k));
}

namespace {

// Loads the node artifact when present; otherwise generates, persists,
// and returns it. Errors gain the node coordinate.
template <typename T, typename Gen>
T node(const std::filesystem::path & dir, const char * file, const leaf_coord & at, Gen gen) {
    std::filesystem::path path = dir / file;
    if (std::filesystem::exists(path)) {
        try {
            return read_json_file(path).get<T>();
        } catch (const std::exception & e) {
            throw_error(errc::io_failure,
                        "node " + coord_label(at) + ": unreadable " + path.string() + ": " +
                            e.what());
        }
    }
    try {
        T value = gen();
        std::filesystem::create_directories(dir);
        write_json_file(path, value);
        return value;
    } catch (const error & e) {
        throw error(e.code(), "node " + coord_label(at) + ": " + e.what());
    }
}

} // namespace

generation_tree forest_builder::expand(const writing_query & query) const {
    if (query.id.empty())
        throw_error(errc::config_invalid, "query id must be non-empty");

    const std::filesystem::path dir = tree_dir(query.id);
    std::filesystem::create_directories(dir);

    const std::filesystem::path meta_path = dir / "tree.json";
    if (std::filesystem::exists(meta_path)) {
        nlohmann::json meta = read_json_file(meta_path);
        tree_config    prior = meta.at("config").get<tree_config>();
        if (!(prior == cfg_))
            throw_error(errc::config_invalid,
                        "tree at " + dir.string() + " was expanded with a different shape");
    } else {
        write_json_file(meta_path, nlohmann::json{{"query", query}, {"config", cfg_}});
    }

    generation_tree tree;
    tree.query  = query;
    tree.config = cfg_;

    for (int i = 0; i < cfg_.n_plans; ++i) {
        plan_record plan =
            node<plan_record>(plan_dir(dir, i), "plan.json", {i, -1, -1},
                              [&] { return agent_->run_plan(query, i); });
        tree.plans.push_back(plan);

        for (int j = 0; j < cfg_.n_drafts; ++j) {
            draft_document draft = node<draft_document>(
                draft_dir(dir, i, j), "draft.json", {i, j, -1},
                [&] { return agent_->run_write(plan, cfg_.draft_index(i, j)); });
            tree.drafts.push_back(draft);

            for (int k = 0; k < cfg_.n_refines; ++k) {
                refined_document refined = node<refined_document>(
                    refine_dir(dir, i, j, k), "refined.json", {i, j, k},
                    [&] { return agent_->run_refine(draft, cfg_.leaf_index(i, j, k)); });
                tree.refinements.push_back(std::move(refined));
            }
        }
    }
    return tree;
}

void judge_tree(write_judge & judge, generation_tree & tree,
                const std::filesystem::path & tree_dir) {
    validate(tree.config);
    if (tree.refinements.size() != static_cast<size_t>(tree.config.leaf_count()))
        throw_error(errc::incomplete_tree,
                    "tree has " + std::to_string(tree.refinements.size()) + " leaves, expected " +
                        std::to_string(tree.config.leaf_count()));

    const std::filesystem::path rubric_path = tree_dir / "rubric.json";
    if (std::filesystem::exists(rubric_path)) {
        tree.rubric = read_json_file(rubric_path).get<judge_rubric>();
    } else {
        tree.rubric = judge.select_rubric(tree.query);
        std::filesystem::create_directories(tree_dir);
        write_json_file(rubric_path, tree.rubric);
    }

    const int runs = judge.options().runs;
    tree.leaf_scores.assign(static_cast<size_t>(tree.config.leaf_count()), leaf_score{});

    for (int i = 0; i < tree.config.n_plans; ++i)
        for (int j = 0; j < tree.config.n_drafts; ++j)
            for (int k = 0; k < tree.config.n_refines; ++k) {
                const int idx = tree.config.leaf_index(i, j, k);
                const std::filesystem::path score_path =
                    forest_builder::refine_dir(tree_dir, i, j, k) / "score.json";
                if (std::filesystem::exists(score_path)) {
                    tree.leaf_scores[idx] = read_json_file(score_path).get<leaf_score>();
                    continue;
                }
                try {
                    tree.leaf_scores[idx] =
                        judge.score_output(tree.query, refined_text(tree.refinements[idx]),
                                           tree.rubric, idx * runs);
                } catch (const error & e) {
                    throw error(e.code(), "leaf " + coord_label({i, j, k}) + ": " + e.what());
                }
                std::filesystem::create_directories(score_path.parent_path());
                write_json_file(score_path, tree.leaf_scores[idx]);
            }
}

generation_tree load_tree(const std::filesystem::path & tree_dir) {
    const std::filesystem::path meta_path = tree_dir / "tree.json";
    if (!std::filesystem::exists(meta_path))
        throw_error(errc::incomplete_tree, "no tree metadata at " + meta_path.string());
    nlohmann::json meta = read_json_file(meta_path);

    generation_tree tree;
    tree.query  = meta.at("query").get<writing_query>();
    tree.config = meta.at("config").get<tree_config>();
    validate(tree.config);

    auto require = [&](const std::filesystem::path & p, const leaf_coord & at) {
        if (!std::filesystem::exists(p))
            throw_error(errc::incomplete_tree,
                        "node " + coord_label(at) + " missing: " + p.string());
        return read_json_file(p);
    };

    tree.leaf_scores.assign(static_cast<size_t>(tree.config.leaf_count()), leaf_score{});
    for (int i = 0; i < tree.config.n_plans; ++i) {
        tree.plans.push_back(require(forest_builder::plan_dir(tree_dir, i) / "plan.json",
                                     {i, -1, -1})
                                 .get<plan_record>());
        for (int j = 0; j < tree.config.n_drafts; ++j) {
            tree.drafts.push_back(
                require(forest_builder::draft_dir(tree_dir, i, j) / "draft.json", {i, j, -1})
                    .get<draft_document>());
            for (int k = 0; k < tree.config.n_refines; ++k) {
                tree.refinements.push_back(
                    require(forest_builder::refine_dir(tree_dir, i, j, k) / "refined.json",
                            {i, j, k})
                        .get<refined_document>());
                const std::filesystem::path score_path =
                    forest_builder::refine_dir(tree_dir, i, j, k) / "score.json";
                if (std::filesystem::exists(score_path))
                    tree.leaf_scores[tree.config.leaf_index(i, j, k)] =
                        read_json_file(score_path).get<leaf_score>();
            }
        }
    }

    const std::filesystem::path rubric_path = tree_dir / "rubric.json";
    if (std::filesystem::exists(rubric_path))
        tree.rubric = read_json_file(rubric_path).get<judge_rubric>();
    return tree;
}

void to_json(nlohmann::json & j, const tree_config & cfg) {
    j = nlohmann::json{
        {"n_plans", cfg.n_plans}, {"n_drafts", cfg.n_drafts}, {"n_refines", cfg.n_refines}};
}

void from_json(const nlohmann::json & j, tree_config & cfg) {
    cfg.n_plans   = j.at("n_plans").get<int>();
    cfg.n_drafts  = j.at("n_drafts").get<int>();
    cfg.n_refines = j.at("n_refines").get<int>();
}

void to_json(nlohmann::json & j, const reward_assignment & r) {
    std::vector<int>    ranks, ordinals;
    std::vector<double> percentiles;
    for (const auto & leaf : r.leaves) {
        ranks.push_back(leaf.rank);
        percentiles.push_back(leaf.percentile);
        ordinals.push_back(leaf.ordinal);
    }
    j = nlohmann::json{{"ranks", ranks},
                       {"percentiles", percentiles},
                       {"ordinals", ordinals},
                       {"stage2", r.stage2},
                       {"stage1", r.stage1}};
}

void from_json(const nlohmann::json & j, reward_assignment & r) {
    auto ranks       = j.at("ranks").get<std::vector<int>>();
    auto percentiles = j.at("percentiles").get<std::vector<double>>();
    auto ordinals    = j.at("ordinals").get<std::vector<int>>();
    if (ranks.size() != percentiles.size() || ranks.size() != ordinals.size())
        throw_error(errc::size_mismatch, "reward arrays have inconsistent lengths");
    r.leaves.clear();
    for (size_t i = 0; i < ranks.size(); ++i)
        r.leaves.push_back({ranks[i], percentiles[i], ordinals[i]});
    r.stage2 = j.at("stage2").get<std::vector<double>>();
    r.stage1 = j.at("stage1").get<std::vector<double>>();
}

} // namespace superwriter
