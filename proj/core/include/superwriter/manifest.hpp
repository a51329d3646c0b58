#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace superwriter {

struct run_manifest {
    std::string    run_id;
    std::string    created_at; // UTC, ISO 8601
    nlohmann::json config_snapshot;

    std::map<std::string, std::int64_t> counters;
    std::vector<std::string>            errors;
};

// Loads the manifest at path, creating one from the snapshot on first
// contact. A stored snapshot differing from the given one raises
// manifest_conflict (resume must not silently change the configuration).
run_manifest load_or_init_manifest(const std::filesystem::path & path,
                                   const nlohmann::json &        snapshot);

void save_manifest(const run_manifest & manifest, const std::filesystem::path & path);

void to_json(nlohmann::json & j, const run_manifest & m);
void from_json(const nlohmann::json & j, run_manifest & m);

} // namespace superwriter
