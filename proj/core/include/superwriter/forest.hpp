#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "superwriter/agent.hpp"
#include "superwriter/judge.hpp"

namespace superwriter {

struct tree_config {
    int n_plans   = 5;
    int n_drafts  = 4; // per plan
    int n_refines = 3; // per draft

    int leaf_count() const { return n_plans * n_drafts * n_refines; }
    int draft_count() const { return n_plans * n_drafts; }
    int draft_index(int plan, int draft) const { return plan * n_drafts + draft; }
    int leaf_index(int plan, int draft, int refine) const {
        return draft_index(plan, draft) * n_refines + refine;
    }

    bool operator==(const tree_config &) const = default;
};

void validate(const tree_config & cfg); // throws config_invalid on nonpositive dims

struct leaf_coord {
    int plan   = -1;
    int draft  = -1;
    int refine = -1;

    bool operator==(const leaf_coord &) const = default;
};

std::string coord_label(const leaf_coord & c); // "(i,j,k)" with -1 rendered as "-"

struct leaf_reward {
    int    rank       = 0;   // 1 + |{leaves with strictly greater score}|
    double percentile = 0.0; // rank / N
    int    ordinal    = 0;   // in {-2,-1,0,+1,+2}
};

// Full reward tensor: per-leaf discretization plus the averaged
// draft-level (stage2) and plan-level (stage1) rewards.
struct reward_assignment {
    std::vector<leaf_reward> leaves; // leaf-indexed
    std::vector<double>      stage2; // draft-indexed means over refines
    std::vector<double>      stage1; // plan-indexed means over drafts
};

// Percentile bands with inclusive upper boundaries, evaluated in exact
// integer arithmetic: rank/N <= 1/6 -> +2, <= 2/6 -> +1, <= 4/6 -> 0,
// <= 5/6 -> -1, else -2.
int ordinal_reward(int rank, int total);

std::vector<leaf_reward> discretize(const std::vector<double> & scores, size_t expected_count);
std::vector<leaf_reward> discretize(const std::vector<double> & scores);

struct stage_rewards {
    std::vector<double> stage2;
    std::vector<double> stage1;
};

stage_rewards aggregate(const std::vector<int> & ordinals, const tree_config & cfg);

reward_assignment compute_rewards(const std::vector<double> & scores, const tree_config & cfg);

enum class pair_level { plan, write, refine };

const char * pair_level_name(pair_level level);
pair_level   pair_level_from_name(const std::string & name);

// Index-level pair choice; text assembly happens in harvest_pairs.
struct pair_selection {
    pair_level level = pair_level::plan;
    leaf_coord chosen;   // components below the level stay -1
    leaf_coord rejected;
    double     chosen_reward   = 0.0;
    double     rejected_reward = 0.0;

    bool operator==(const pair_selection &) const = default;
};

struct harvest_options {
    // Descend at the refine level from each losing draft instead of each
    // winning one (the j* reading is the default).
    bool refine_from_losers = false;
};

struct pair_report {
    std::vector<pair_selection> pairs;
    std::vector<std::string>    diagnostics;
};

// Harvest rules, one instance per level:
//   plan:   best plan B by stage1 vs the two worst plans (excluding B)
//   write:  per plan in the best two {B, S}: argmax vs argmin draft by stage2
//   refine: per write-level winner draft: argmax vs argmin leaf by s
// An instance whose argmax and argmin coincide (single child or all-equal
// rewards) contributes no pair and is reported as a diagnostic. All
// tie-breaks take the lowest index.
pair_report select_pairs(const std::vector<double> & scores, const reward_assignment & rewards,
                         const tree_config & cfg, harvest_options opts = {});

struct generation_tree {
    writing_query query;
    tree_config   config;

    std::vector<plan_record>      plans;       // [i]
    std::vector<draft_document>   drafts;      // [i*D + j]
    std::vector<refined_document> refinements; // [(i*D + j)*K + k]

    judge_rubric            rubric;      // filled by judging
    std::vector<leaf_score> leaf_scores; // leaf-indexed; empty runs = unscored
};

// s values per leaf; throws unscored_leaf naming the first missing coordinate.
std::vector<double> collect_scores(const generation_tree & tree);

struct preference_pair {
    std::string query_id;
    pair_level  level = pair_level::plan;
    std::string context;
    std::string chosen;
    std::string rejected;
    leaf_coord  chosen_coord;
    leaf_coord  rejected_coord;
    double      chosen_reward   = 0.0;
    double      rejected_reward = 0.0;

    bool operator==(const preference_pair &) const = default;
};

void to_json(nlohmann::json & j, const preference_pair & p);
void from_json(const nlohmann::json & j, preference_pair & p);

struct harvest_result {
    std::vector<preference_pair> pairs;
    std::vector<std::string>     diagnostics;
};

// Level-wise pair texts:
//   plan:   context = query; sides = refined design + final outline
//   write:  context = query + plan text; sides = draft document
//   refine: context = query + plan text + draft; sides = refined document
harvest_result harvest_pairs(const generation_tree & tree, const reward_assignment & rewards,
                             harvest_options opts = {});

std::string plan_level_text(const plan_record & plan);

size_t export_pairs(const std::vector<preference_pair> & pairs,
                    const std::filesystem::path & path);
std::vector<preference_pair> import_pairs(const std::filesystem::path & path);

// softplus(-beta * delta): the preference loss at margin delta.
double dpo_loss(double beta, double delta);

// Expands (or resumes) per-query trees under root/<query_id>/, one JSON
// file per node, written only after the node completes.
class forest_builder {
  public:
    forest_builder(writing_agent & agent, tree_config cfg, std::filesystem::path root);

    generation_tree expand(const writing_query & query) const;

    std::filesystem::path tree_dir(const std::string & query_id) const;

    static std::filesystem::path plan_dir(const std::filesystem::path & tree_dir, int i);
    static std::filesystem::path draft_dir(const std::filesystem::path & tree_dir, int i, int j);
    static std::filesystem::path refine_dir(const std::filesystem::path & tree_dir, int i, int j,
                                            int k);

    const tree_config & config() const { return cfg_; }

  private:
    writing_agent *       agent_;
    tree_config           cfg_;
    std::filesystem::path root_;
};

// Scores every leaf (rubric selected once per tree), persisting rubric and
// per-leaf scores into tree_dir; existing files are reused, not re-asked.
void judge_tree(write_judge & judge, generation_tree & tree,
                const std::filesystem::path & tree_dir);

// Rebuilds a tree from its directory without issuing any model calls.
// Generation nodes must all exist (incomplete_tree otherwise); leaf score
// files are optional and loaded when present.
generation_tree load_tree(const std::filesystem::path & tree_dir);

void to_json(nlohmann::json & j, const tree_config & cfg);
void from_json(const nlohmann::json & j, tree_config & cfg);
void to_json(nlohmann::json & j, const reward_assignment & r);
void from_json(const nlohmann::json & j, reward_assignment & r);

} // namespace superwriter
