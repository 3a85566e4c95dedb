#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stylerag/app/config.hpp"
#include "stylerag/types.hpp"

namespace stylerag::app {

struct QueryArgs {
    std::string script_path;
    std::size_t position = 0;
    std::string text;           // empty = take the script line at position
    std::uint32_t k = 0;        // 0 = database default
    std::string mode = "profile+emotion";
    std::string pref_file;      // empty = no preference
    std::string explicit_clip;  // empty = no explicit style clip
    std::string probes;         // "", "exhaustive", or an integer
};

struct EvalArgs {
    std::string queries_file;   // JSONL of vectors; empty = generate n_queries
    std::uint32_t k = kDefaultTopK;
    std::vector<std::uint32_t> probe_sweep;  // empty = 1,2,4,... capped at C
    std::uint32_t n_queries = 100;
    std::uint64_t query_seed = 1234;
};

struct GenArgs {
    std::string out_manifest;
    std::string out_script;     // empty = skip the demo script
    std::uint32_t speakers = 30;
    std::uint32_t segments = 3000;
    std::uint64_t seed = 7;
};

// Exit codes: 0 success, 1 structured failure (message on stderr), 2 usage.
int cmd_build_db(const AppConfig& config, const std::string& manifest_path);
int cmd_query(const AppConfig& config, const QueryArgs& args);
int cmd_serve(const AppConfig& config);
int cmd_eval_recall(const AppConfig& config, const EvalArgs& args);
int cmd_rebuild_index(const AppConfig& config);
int cmd_gen_corpus(const GenArgs& args);

}  // namespace stylerag::app
