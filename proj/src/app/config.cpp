#include "stylerag/app/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "stylerag/error.hpp"

namespace stylerag::app {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const std::size_t begin = s.find_first_not_of(ws);
    if (begin == std::string::npos) return "";
    const std::size_t end = s.find_last_not_of(ws);
    return s.substr(begin, end - begin + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        // stoull would wrap negatives; require plain digits.
        if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument(value);
        }
        return std::stoull(value);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, key + " wants an integer, got \"" + value + "\"");
    }
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, key + " wants a number, got \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw Error(ErrorCode::InvalidArgument, key + " wants a boolean, got \"" + value + "\"");
}

}  // namespace

void apply_kv(AppConfig& config, const std::string& key, const std::string& value) {
    if (key == "db_dir") {
        config.db_dir = value;
    } else if (key == "dim") {
        config.dim = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "index_mode") {
        if (value != "exact" && value != "clustered") {
            throw Error(ErrorCode::InvalidArgument, "index_mode must be exact or clustered");
        }
        config.index_mode = value;
    } else if (key == "n_clusters") {
        config.n_clusters = static_cast<std::uint32_t>(parse_u64(key, value));
    } else if (key == "probes") {
        if (value == "exhaustive") {
            config.probes = std::nullopt;
        } else {
            config.probes = static_cast<std::uint32_t>(parse_u64(key, value));
        }
    } else if (key == "seed") {
        config.seed = parse_u64(key, value);
    } else if (key == "embedder_seed") {
        config.embedder_seed = parse_u64(key, value);
    } else if (key == "quality_threshold") {
        config.quality_threshold = parse_f64(key, value);
    } else if (key == "k") {
        config.k = static_cast<std::uint32_t>(parse_u64(key, value));
    } else if (key == "normalize") {
        config.normalize = parse_bool(key, value);
    } else if (key == "listen") {
        config.listen = value;
    } else if (key == "scripts_dir") {
        config.scripts_dir = value;
    } else if (key == "profile_embedder") {
        config.profile_embedder = value;
    } else if (key == "emotion_embedder") {
        config.emotion_embedder = value;
    } else if (key == "user_embedder") {
        config.user_embedder = value;
    } else if (key == "synthesizer") {
        config.synthesizer = value;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown config key: " + key);
    }
}

void apply_config_file(AppConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidArgument,
                        path + ":" + std::to_string(lineno) + " is not key = value");
        }
        apply_kv(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_env(AppConfig& config) {
    static const char* keys[] = {
        "db_dir",         "dim",        "index_mode",        "n_clusters",
        "probes",         "seed",       "embedder_seed",     "quality_threshold",
        "k",              "normalize",  "listen",            "scripts_dir",
        "profile_embedder", "emotion_embedder", "user_embedder", "synthesizer",
    };
    for (const char* key : keys) {
        std::string env_name = "STYLERAG_";
        for (const char* c = key; *c; ++c) {
            env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
        }
        if (const char* value = std::getenv(env_name.c_str())) {
            apply_kv(config, key, value);
        }
    }
}

AppConfig base_config(const std::optional<std::string>& config_path) {
    AppConfig config;
    if (config_path) apply_config_file(config, *config_path);
    apply_env(config);
    return config;
}

}  // namespace stylerag::app
