#pragma once

#include <filesystem>
#include <iosfwd>

#include "superwriter/run_config.hpp"

namespace superwriter {

struct command_io {
    std::ostream * out; // progress and report text
    env_lookup     env; // API-key and override lookup
};

command_io default_io(std::ostream & out);

// Pipeline phases. Each validates the config, opens (or initializes) the
// run manifest — refusing to resume under a changed configuration — does
// its work, then saves counters back. All are idempotent: a re-invocation
// after success replays the response cache and issues no backend calls.

// Two-step length prediction over a query file; writes filtered.jsonl
// (every query with its prediction) and kept.jsonl (accepted queries).
void cmd_filter(const run_config & cfg, const std::filesystem::path & queries_file,
                command_io io);

// One full plan/write/refine pass per query into runs/<id>/.
void cmd_write(const run_config & cfg, const std::filesystem::path & queries_file,
               command_io io);

// Expands the generation forest into trees/<id>/.
void cmd_tree(const run_config & cfg, const std::filesystem::path & queries_file,
              command_io io);

// Scores every leaf of every tree. With an empty queries path, judges
// whatever trees exist.
void cmd_judge(const run_config & cfg, const std::filesystem::path & queries_file,
               command_io io);

// Discretizes, aggregates, harvests, and exports preference pairs across
// all (scored) trees into pairs.jsonl.
void cmd_pairs(const run_config & cfg, const std::filesystem::path & queries_file,
               command_io io);

// Builds stage-segmented records from completed runs into sft/<stage>.jsonl.
void cmd_sft(const run_config & cfg, const std::filesystem::path & queries_file,
             command_io io);

// Judges ours-vs-baseline response files both ways and writes the
// matchup log plus the win-rate summary.
void cmd_winrate(const run_config & cfg, const std::filesystem::path & ours_file,
                 const std::filesystem::path & baseline_file, command_io io);

// Prints the manifest summary and artifact inventory.
void cmd_report(const run_config & cfg, command_io io);

} // namespace superwriter
