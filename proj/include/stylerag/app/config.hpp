#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "stylerag/types.hpp"

namespace stylerag::app {

// Every default resolves with zero external services: reference embedders,
// passthrough processors, mock synthesizer.
struct AppConfig {
    std::string db_dir = "db";
    std::size_t dim = kDefaultDim;
    std::string index_mode = "clustered";  // "exact" | "clustered"
    std::uint32_t n_clusters = 0;          // 0 selects ceil(sqrt(record count))
    std::optional<std::uint32_t> probes;   // nullopt = exhaustive
    std::uint64_t seed = 42;               // clustering seed
    std::uint64_t embedder_seed = 1;
    double quality_threshold = kDefaultQualityThreshold;
    std::uint32_t k = kDefaultTopK;
    bool normalize = false;
    std::string listen = "127.0.0.1:8080";
    std::string scripts_dir;  // empty = <db_dir>/scripts
    std::string profile_embedder = "reference";  // "reference" or http(s) URL
    std::string emotion_embedder = "reference";
    std::string user_embedder = "reference";
    std::string synthesizer = "mock";  // "mock" or http(s) URL
};

// Applies one key=value pair; throws InvalidArgument on unknown keys or
// unparsable values. Shared by the config-file and environment layers.
void apply_kv(AppConfig& config, const std::string& key, const std::string& value);

// `key = value` lines, '#' comments, blank lines ignored.
void apply_config_file(AppConfig& config, const std::string& path);

// STYLERAG_<KEY> variables, e.g. STYLERAG_DB_DIR, STYLERAG_QUALITY_THRESHOLD.
void apply_env(AppConfig& config);

// Layered resolution below flag level: defaults, then the config file (when
// given), then the environment. CLI flags are applied afterwards by the
// binary, completing the flags > env > file > defaults order.
AppConfig base_config(const std::optional<std::string>& config_path);

}  // namespace stylerag::app
