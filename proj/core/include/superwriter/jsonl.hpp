#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace superwriter {

// Line-delimited JSON helpers. Readers report the offending line number on
// parse failure; writers end every record with a single '\n'.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path & file);
void write_jsonl(const std::filesystem::path & file, const std::vector<nlohmann::json> & records);
void append_jsonl(const std::filesystem::path & file, const nlohmann::json & record);

nlohmann::json read_json_file(const std::filesystem::path & file);
// Atomic via write-to-temp-then-rename.
void write_json_file(const std::filesystem::path & file, const nlohmann::json & doc);

std::string read_text_file(const std::filesystem::path & file);
void write_text_file(const std::filesystem::path & file, const std::string & text);

} // namespace superwriter
