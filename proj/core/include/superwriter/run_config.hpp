#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>

#include "superwriter/backend.hpp"
#include "superwriter/dataset.hpp"
#include "superwriter/forest.hpp"

namespace superwriter {

struct backend_config {
    std::string kind        = "mock"; // "mock" or "http"
    std::string endpoint;             // base URL, http kind only
    std::string path        = "/v1/chat/completions";
    std::string model       = "mock";
    std::string api_key_env = "SUPERWRITER_API_KEY";
    std::string mock_script;          // rule file, mock kind only

    bool operator==(const backend_config &) const = default;
};

struct decoding_config {
    double temperature = 0.6;
    double top_p       = 0.95;
    int    max_tokens  = 8192;

    bool operator==(const decoding_config &) const = default;
};

struct run_config {
    backend_config agent_backend;
    backend_config judge_backend;
    backend_config filter_backend;

    decoding_config decoding;
    tree_config     tree;

    int             judge_runs = 3;
    std::string     criteria_pool_file; // optional rubric pool override
    length_category min_category = length_category::w2000;

    int       max_in_flight = 4;
    int       retry_limit   = 3;
    int       backoff_ms    = 250;
    long long max_calls     = 0; // per-command backend call budget, 0 = off
    long long max_tokens    = 0; // per-command completion token budget, 0 = off

    std::filesystem::path run_dir = "superwriter-run";
    std::filesystem::path prompt_dir; // optional template override directory

    std::uint64_t sft_token_budget = 32768;

    std::filesystem::path cache_dir() const { return run_dir / "cache"; }
    std::filesystem::path runs_dir() const { return run_dir / "runs"; }
    std::filesystem::path trees_dir() const { return run_dir / "trees"; }
    std::filesystem::path sft_dir() const { return run_dir / "sft"; }
    std::filesystem::path winrate_dir() const { return run_dir / "winrate"; }
    std::filesystem::path manifest_path() const { return run_dir / "manifest.json"; }
    std::filesystem::path pairs_path() const { return run_dir / "pairs.jsonl"; }
    std::filesystem::path filtered_path() const { return run_dir / "filtered.jsonl"; }
    std::filesystem::path kept_path() const { return run_dir / "kept.jsonl"; }
};

// Parses the config file shape; unknown keys are rejected so typos fail
// loudly. Throws config_invalid.
run_config parse_config(const nlohmann::json & j);
run_config load_config_file(const std::filesystem::path & path);

// Environment layer between file values and command-line flags:
// SUPERWRITER_RUN_DIR, SUPERWRITER_ENDPOINT (all roles), SUPERWRITER_MODEL
// (all roles), SUPERWRITER_MOCK_SCRIPT (all roles).
using env_lookup = std::function<const char *(const char *)>;
void apply_env(run_config & cfg, const env_lookup & getenv_fn);

void validate(const run_config & cfg); // throws config_invalid

// Canonical JSON image of the effective config; manifest conflict
// detection compares these.
nlohmann::json config_snapshot(const run_config & cfg);

// Instantiates the backend for one role; mock scripts load relative to
// the current directory. Throws config_invalid.
std::shared_ptr<chat_backend> make_backend(const backend_config & bc,
                                           const env_lookup &     getenv_fn);

void to_json(nlohmann::json & j, const backend_config & bc);
void from_json(const nlohmann::json & j, backend_config & bc);

} // namespace superwriter
