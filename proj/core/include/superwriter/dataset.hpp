#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "superwriter/agent.hpp"
#include "superwriter/extract.hpp"
#include "superwriter/gateway.hpp"
#include "superwriter/prompt_library.hpp"

namespace superwriter {

struct length_prediction {
    bool                     exceeds_2k = false;
    length_category          category   = length_category::lt2000;
    std::vector<std::string> diagnostics;
};

struct filter_options {
    std::string model       = "mock";
    double      temperature = 0.6;
    double      top_p       = 0.95;
    int         max_tokens  = 8192;
    bool        reask       = true;
    // Queries predicted at or above this band (and past the 2k gate) are kept.
    length_category min_category = length_category::w2000;
};

class length_filter {
  public:
    length_filter(gateway & gw, const prompt_library & lib, filter_options options = {});

    // Two-step prediction: the yes/no gate, then the band classifier
    // (only when the gate answers yes). One corrective re-ask per step.
    length_prediction predict(const std::string & query_text, int attempt_tag = 0,
                              call_trace * trace = nullptr) const;

    bool keep(const length_prediction & prediction) const;

    const filter_options & options() const { return options_; }

  private:
    gateway *              gw_;
    const prompt_library * lib_;
    filter_options         options_;
};

// Deterministic size heuristic: ceil(latin_chars / 4 + cjk_chars / 1.5)
// over decoded code points; malformed bytes count as latin characters.
std::uint64_t estimate_tokens(std::string_view text);

enum class sft_stage { plan, write, refine };

const char * sft_stage_name(sft_stage stage);
sft_stage    sft_stage_from_name(const std::string & name);

struct sft_record {
    sft_stage                 stage = sft_stage::plan;
    std::string               query_id;
    std::vector<chat_message> messages; // one user turn, one assistant turn
    std::uint64_t             token_estimate = 0;

    bool operator==(const sft_record &) const = default;
};

struct sft_options {
    std::string   think_open   = "<think>\n";
    std::string   think_close  = "\n</think>\n\n";
    std::uint64_t token_budget = 32768;
};

struct sft_build_result {
    std::vector<sft_record>  records;
    std::vector<std::string> rejections; // one line per rejected record
};

// One record per stage; assistant = wrapped stage thinking + the stage's
// terminal artifact; each user turn embeds the previous stage's artifact
// byte-identically. Oversize records are dropped, never truncated.
sft_build_result build_sft_records(const agent_run & run, const sft_options & options = {});

void to_json(nlohmann::json & j, const sft_record & r);
void from_json(const nlohmann::json & j, sft_record & r);
void to_json(nlohmann::json & j, const length_prediction & p);
void from_json(const nlohmann::json & j, length_prediction & p);

} // namespace superwriter
